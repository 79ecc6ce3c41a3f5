"""JSON experiment configs and correlation-table files.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of them. A preparation may also be a named constructor string:

    "ket 0", "plus", "minus", "plus_y", "minus_y", "bar0", "bar1",
    "barplus", "barminus", "mixed", "qrac d=3 y0=1 y1=2", "tomographic 5"

an effect may be ``"proj <state>"``, ``"identity"``, ``"zero"`` or
``"complement <state>"`` (identity minus the projector), and a whole
instrument may be named: ``"computational"``, ``"qrac-decoding x=0"``,
``"tomographic k"`` (two outcomes, projector k of the standard operator
basis and its complement).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ContractViolationError, DataValidationError, InvalidInputError, QresError
from .qmath import check_density_matrix, independent_projector_basis, ket, named_state, proj, qrac_state
from .scenario import CorrelationTable, OperationBox, PreparationBox, table_from_raw

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "load_config",
    "parse_config",
    "resolve_config_path",
    "bundled_configs",
    "encode_matrix",
    "decode_matrix",
    "load_table",
    "table_to_json",
    "table_to_csv",
    "table_to_text",
]


class ConfigError(InvalidInputError):
    """Config parse failure; the message starts with the offending field path."""


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int
    prep: PreparationBox
    ops: OperationBox
    witness: dict | None = None
    free_set: str | None = None
    detection_mode: str | None = None
    rank_tolerance: float | None = None
    optimizer: dict = field(default_factory=dict)
    source: str = ""


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(data, where: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: matrix entries must be [re, im] number pairs") from None
    if arr.ndim == 3 and arr.shape[2] == 2 and arr.shape[0] == arr.shape[1]:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return arr.astype(complex)
    raise ConfigError(f"{where}: expected a square matrix of [re, im] pairs, got array shape {arr.shape}")


def _decode_vector(data, where: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        v = arr[:, 0] + 1j * arr[:, 1]
    elif arr.ndim == 1:
        v = arr.astype(complex)
    else:
        raise ConfigError(f"{where}: expected a vector of [re, im] pairs")
    n = np.linalg.norm(v)
    if n == 0:
        raise ConfigError(f"{where}: zero vector")
    return v / n


def _kwargs(tokens, where):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ConfigError(f"{where}: expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        try:
            out[k] = int(v)
        except ValueError:
            raise ConfigError(f"{where}: {k} must be an integer, got {v!r}") from None
    return out


def _named_ket(text: str, d: int, where: str) -> np.ndarray:
    tokens = text.split()
    if not tokens:
        raise ConfigError(f"{where}: empty state name")
    head, rest = tokens[0], tokens[1:]
    try:
        if head == "ket":
            if len(rest) != 1:
                raise ConfigError(f"{where}: use 'ket <index>'")
            return ket(int(rest[0]), d)
        if head == "qrac":
            kw = _kwargs(rest, where)
            qd = kw.get("d", d)
            if qd != d:
                raise ConfigError(f"{where}: qrac dimension {qd} != config dimension {d}")
            return qrac_state(d, kw["y0"], kw["y1"])
        if head == "tomographic":
            k = int(rest[0])
            basis = independent_projector_basis(d)
            if not 0 <= k < len(basis):
                raise ConfigError(f"{where}: tomographic index {k} out of range 0..{len(basis) - 1}")
            w, v = np.linalg.eigh(basis[k])
            return v[:, -1]
        if d != 2:
            raise ConfigError(f"{where}: named state {head!r} is a qubit state but dimension is {d}")
        return named_state(head)
    except QresError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    except (KeyError, ValueError, IndexError) as exc:
        raise ConfigError(f"{where}: cannot parse {text!r} ({exc})") from None


def _parse_state(entry, d: int, where: str) -> np.ndarray:
    if isinstance(entry, str):
        if entry.strip() == "mixed":
            return np.eye(d, dtype=complex) / d
        return proj(_named_ket(entry, d, where))
    if isinstance(entry, dict):
        if "ket" in entry:
            return proj(_decode_vector(entry["ket"], where + ".ket"))
        if "matrix" in entry:
            return decode_matrix(entry["matrix"], where + ".matrix")
        raise ConfigError(f"{where}: state object needs a 'ket' or 'matrix' field")
    return decode_matrix(entry, where)


def _parse_effect(entry, d: int, where: str) -> np.ndarray:
    if isinstance(entry, str):
        text = entry.strip()
        if text == "identity":
            return np.eye(d, dtype=complex)
        if text == "zero":
            return np.zeros((d, d), dtype=complex)
        head, _, rest = text.partition(" ")
        if head == "proj":
            return proj(_named_ket(rest, d, where))
        if head == "complement":
            return np.eye(d) - proj(_named_ket(rest, d, where))
        raise ConfigError(f"{where}: unknown effect {text!r}")
    if isinstance(entry, dict) and "matrix" in entry:
        return decode_matrix(entry["matrix"], where + ".matrix")
    return decode_matrix(entry, where)


def _parse_instrument(entry, d: int, where: str) -> list[np.ndarray]:
    if isinstance(entry, str):
        tokens = entry.split()
        head = tokens[0] if tokens else ""
        if head == "computational":
            return [proj(ket(i, d)) for i in range(d)]
        if head == "qrac-decoding":
            from .witnesses import qudit_measurement_bases

            x = _kwargs(tokens[1:], where).get("x")
            if x not in (0, 1):
                raise ConfigError(f"{where}: qrac-decoding needs x=0 or x=1")
            return [proj(v) for v in qudit_measurement_bases(d)[x]]
        if head == "tomographic":
            basis = independent_projector_basis(d)
            try:
                p = basis[int(tokens[1])]
            except (IndexError, ValueError):
                raise ConfigError(f"{where}: use 'tomographic k' with 0 <= k < {d * d}") from None
            return [p, np.eye(d) - p]
        raise ConfigError(f"{where}: unknown instrument {entry!r}")
    if not isinstance(entry, list):
        raise ConfigError(f"{where}: instrument must be a list of effects or a named instrument")
    return [_parse_effect(e, d, f"{where}[{j}]") for j, e in enumerate(entry)]


def parse_config(data: dict, source: str = "") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    if "dimension" not in data:
        raise ConfigError("dimension: missing")
    d = data["dimension"]
    if not isinstance(d, int) or d < 2:
        raise ConfigError(f"dimension: must be an integer >= 2, got {d!r}")
    preps = data.get("preparations")
    if not isinstance(preps, list) or not preps:
        raise ConfigError("preparations: must be a non-empty list")
    insts = data.get("instruments")
    if not isinstance(insts, list) or not insts:
        raise ConfigError("instruments: must be a non-empty list")
    states = [_parse_state(e, d, f"preparations[{y}]") for y, e in enumerate(preps)]
    effects = [_parse_instrument(e, d, f"instruments[{x}]") for x, e in enumerate(insts)]
    for y, s in enumerate(states):
        if s.shape != (d, d):
            raise ConfigError(f"preparations[{y}]: shape {s.shape} does not match dimension {d}")
    for x, inst in enumerate(effects):
        for j, e in enumerate(inst):
            if e.shape != (d, d):
                raise ConfigError(f"instruments[{x}][{j}]: shape {e.shape} does not match dimension {d}")
    for y, s in enumerate(states):
        try:
            check_density_matrix(s)
        except ContractViolationError as exc:
            raise ContractViolationError(f"preparations[{y}]: {exc}") from None
    prep = PreparationBox(states)
    try:
        ops = OperationBox(effects)
    except ContractViolationError as exc:
        raise ContractViolationError(f"instruments: {exc}") from None
    witness = data.get("witness")
    if isinstance(witness, str):
        witness = {"name": witness}
    return ExperimentConfig(
        dimension=d,
        prep=prep,
        ops=ops,
        witness=witness,
        free_set=data.get("free_set"),
        detection_mode=data.get("detection_mode"),
        rank_tolerance=data.get("rank_tolerance"),
        optimizer=dict(data.get("optimizer") or {}),
        source=source,
    )


def bundled_configs() -> list[str]:
    root = resources.files("qres") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_config_path(name: str):
    """A filesystem path, or the name of a bundled config such as ``examples/coherence-qubit``."""
    path = Path(name)
    if path.is_file():
        return path
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    candidate = resources.files("qres") / "configs" / f"{stem}.json"
    if candidate.is_file():
        return candidate
    raise ConfigError(f"config: no file {name!r} and no bundled config {stem!r} (bundled: {', '.join(bundled_configs())})")


def load_config(name: str) -> ExperimentConfig:
    path = resolve_config_path(name)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(data, source=str(name))


def load_table(path: str) -> CorrelationTable:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"table: no such file {path!r}") from None
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"table: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict) or "probs" not in data:
        raise DataValidationError("table: expected an object with a 'probs' field")
    return table_from_raw(data["probs"], data.get("dims"), data.get("outcomes"))


def table_to_json(table: CorrelationTable) -> str:
    return json.dumps(table.to_dict(), indent=1)


def table_to_csv(table: CorrelationTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y", "x", "j", "p"])
    for y in range(table.num_y):
        for x in range(table.num_x):
            for j in range(table.outcomes[x]):
                w.writerow([y, x, j, repr(float(table.probs[y, x, j]))])
    return buf.getvalue()


def table_to_text(table: CorrelationTable, digits: int = 6) -> str:
    lines = [f"# p(j|x,y): {table.num_y} preparations, {table.num_x} instruments, outcomes {list(table.outcomes)}"]
    for y in range(table.num_y):
        for x in range(table.num_x):
            row = " ".join(f"{table.probs[y, x, j]:.{digits}f}" for j in range(table.outcomes[x]))
            lines.append(f"y={y} x={x}: {row}")
    return "\n".join(lines)

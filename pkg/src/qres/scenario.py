"""Prepare-and-measure experiment: preparation box, operation box, and the
Born-rule correlation table p(j|x,y) = Tr(E_{j,x} rho_y)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractViolationError, DataValidationError, InvalidInputError
from .qmath import check_density_matrix, check_effect

__all__ = ["PreparationBox", "OperationBox", "CorrelationTable", "simulate", "table_from_raw"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PreparationBox:
    """Ordered states rho_y, indexed by the preparation input y."""

    states: tuple

    def __init__(self, states: Sequence):
        states = [check_density_matrix(_frozen(s)) for s in states]
        if not states:
            raise InvalidInputError("preparation box needs at least one state")
        d = states[0].shape[0]
        if any(s.shape != (d, d) for s in states):
            raise InvalidInputError("all prepared states must share one dimension")
        object.__setattr__(self, "states", tuple(_frozen(s) for s in states))

    @classmethod
    def from_kets(cls, kets) -> "PreparationBox":
        return cls([np.outer(k, np.conj(k)) for k in kets])

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class OperationBox:
    """Instruments indexed by x; instrument x is the list of effects K_{j,x}^dag K_{j,x}."""

    instruments: tuple
    atol: float = field(default=1e-10, compare=False)

    def __init__(self, instruments: Sequence[Sequence], atol: float = 1e-10):
        insts = []
        for x, inst in enumerate(instruments):
            effects = [check_effect(_frozen(e)) for e in inst]
            if len(effects) < 2:
                raise ContractViolationError(f"instrument x={x} has {len(effects)} outcome(s); at least 2 required")
            insts.append(effects)
        if not insts:
            raise InvalidInputError("operation box needs at least one instrument")
        d = insts[0][0].shape[0]
        for x, inst in enumerate(insts):
            if any(e.shape != (d, d) for e in inst):
                raise InvalidInputError(f"instrument x={x} has effects of the wrong dimension")
            err = np.abs(sum(inst) - np.eye(d)).max()
            if err > atol:
                raise ContractViolationError(
                    f"instrument x={x} is not normalized: effects sum to identity only up to {err:.3g}"
                )
        object.__setattr__(self, "instruments", tuple(tuple(inst) for inst in insts))
        object.__setattr__(self, "atol", atol)

    @classmethod
    def from_projective(cls, bases) -> "OperationBox":
        """One instrument per basis; each basis is a sequence of orthonormal kets."""
        return cls([[np.outer(k, np.conj(k)) for k in basis] for basis in bases])

    @property
    def dim(self) -> int:
        return self.instruments[0][0].shape[0]

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(len(inst) for inst in self.instruments)

    def __len__(self) -> int:
        return len(self.instruments)


@dataclass(frozen=True)
class CorrelationTable:
    """Array ``probs[y, x, j] = p(j|x,y)``.

    ``outcomes[x]`` is the number of genuine outcomes of instrument x; cells
    with ``j >= outcomes[x]`` are padding and hold zero.
    """

    probs: np.ndarray
    outcomes: tuple[int, ...]

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "outcomes", tuple(int(k) for k in self.outcomes))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.probs.shape

    @property
    def num_y(self) -> int:
        return self.probs.shape[0]

    @property
    def num_x(self) -> int:
        return self.probs.shape[1]

    @property
    def num_j(self) -> int:
        return self.probs.shape[2]

    def p(self, j: int, x: int, y: int) -> float:
        return float(self.probs[y, x, j])

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "outcomes": list(self.outcomes), "probs": self.probs.tolist()}


def _validate(probs: np.ndarray, outcomes, norm_tol: float, range_tol: float, exc) -> None:
    ny, nx, nj = probs.shape
    if len(outcomes) != nx:
        raise exc(f"outcome counts given for {len(outcomes)} instruments, table has {nx}")
    for x, k in enumerate(outcomes):
        if not 1 <= k <= nj:
            raise exc(f"instrument x={x}: outcome count {k} outside 1..{nj}")
        if np.any(np.abs(probs[:, x, k:]) > range_tol):
            raise exc(f"instrument x={x}: padding cells j>={k} must be zero")
    lo, hi = probs.min(), probs.max()
    if lo < -range_tol or hi > 1 + range_tol:
        raise exc(f"probabilities must lie in [0, 1]; found range [{lo:.6g}, {hi:.6g}]")
    sums = probs.sum(axis=2)
    bad = np.argwhere(np.abs(sums - 1) > norm_tol)
    if bad.size:
        y, x = bad[0]
        raise exc(f"sum_j p(j|x={x},y={y}) = {sums[y, x]:.6g}, expected 1")


def simulate(prep: PreparationBox, ops: OperationBox, imag_tol: float = 1e-12) -> CorrelationTable:
    if prep.dim != ops.dim:
        raise InvalidInputError(f"state dimension {prep.dim} != operation dimension {ops.dim}")
    d = prep.dim
    nj = max(ops.outcomes)
    effects = np.zeros((len(ops), nj, d, d), dtype=complex)
    for x, inst in enumerate(ops.instruments):
        effects[x, : len(inst)] = inst
    rhos = np.stack(prep.states)
    # Tr(E rho) = sum_ab E_ab rho_ba
    raw = np.einsum("xjab,yba->yxj", effects, rhos)
    if np.abs(raw.imag).max() > imag_tol:
        raise ContractViolationError(f"Born-rule probabilities have imaginary part {np.abs(raw.imag).max():.3g}")
    probs = raw.real
    _validate(probs, ops.outcomes, 1e-10, 1e-12, ContractViolationError)
    return CorrelationTable(probs, ops.outcomes)


def table_from_raw(probs, dims=None, outcomes=None, atol: float = 1e-6) -> CorrelationTable:
    """Validate externally supplied probabilities ``probs[y][x][j]``.

    Experimental data gets the looser normalization gate ``atol``.
    """
    try:
        p = np.asarray(probs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataValidationError(f"probabilities are not a rectangular numeric array: {exc}") from None
    if dims is not None:
        dims = tuple(int(v) for v in dims)
        if p.size != int(np.prod(dims)):
            raise DataValidationError(f"{p.size} probabilities do not fit dims {dims}")
        p = p.reshape(dims)
    if p.ndim != 3:
        raise DataValidationError(f"expected a 3-d array indexed [y][x][j], got {p.ndim} dimension(s)")
    if outcomes is None:
        outcomes = (p.shape[2],) * p.shape[1]
    _validate(p, tuple(outcomes), atol, atol, DataValidationError)
    return CorrelationTable(p, tuple(outcomes))

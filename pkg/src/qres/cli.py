"""Command-line front end: ``qres simulate|witness|detect|certify|list``.

Exit codes: 0 success, 1 invalid input, 2 physical-contract violation,
3 when no optimizer restart converged.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from . import fileio
from .errors import InvalidInputError, NonConvergenceError, QresError
from .freesets import FREE_SET_NAMES, get_free_set
from .optimizer import (
    Constrain,
    InnerSearch,
    OptimizationConfig,
    certify_bound,
    certify_qudit_coherence,
    enumerate_vertex_bound,
    gap_search,
)
from .ranktest import detect
from .scenario import simulate
from .witnesses import WITNESS_NAMES, evaluate, generic_witness, get_witness

FORMATS = ("text", "json", "csv")
_RESTART_METHODS = ("seesaw", "nelder_mead", "hybrid", "alternating-l1")
_MODES = {"states": Constrain.STATES_ONLY, "operations": Constrain.OPERATIONS_ONLY, "both": Constrain.BOTH}
_SEARCHES = {
    "seesaw": InnerSearch.SEESAW,
    "nelder-mead": InnerSearch.NELDER_MEAD,
    "hybrid": InnerSearch.HYBRID,
    "enumerate": None,
}

WITNESS_HELP = {
    "coherence": "qubit coherence witness, 3 preparations x 2 binary measurements",
    "coherence-d": "random-access-code coherence witness for qudits (--dim d)",
    "imaginarity": "nonlinear qubit imaginarity witness, 4 preparations x 3 measurements",
    "purity": "single-preparation purity witness (--dim d)",
    "magic": "coherence expression against the qubit stabilizer polytope",
    "generic": "l1 distance to a reference table (--table or --reference)",
}
FREE_SET_HELP = {
    "incoherent": "states and effects diagonal in the computational basis",
    "real": "qubit states and effects with real matrix entries",
    "real-projective": "real qubit states with real projective measurements",
    "stabilizer": "convex hull of the six qubit Pauli eigenstates",
    "maximally-mixed": "the maximally mixed state only",
    "asymmetry-d2": "alias of incoherent for qubits",
    "athermality-d2": "alias of incoherent for qubits",
}


# ------------------------------------------------------------------ formatting


def _num(v: float, digits: int = 6) -> str:
    return f"{round(float(v), digits) + 0.0:.{digits}f}"


def _matrix_text(m, digits: int = 6) -> str:
    rows = []
    for row in np.asarray(m, dtype=complex):
        rows.append("[" + ", ".join(f"{_num(z.real, digits)}{'+' if round(z.imag, digits) >= 0 else '-'}"
                                   f"{_num(abs(z.imag), digits)}i" for z in row) + "]")
    return "[" + ", ".join(rows) + "]"


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=1)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        for k, v in report.items():
            w.writerow([k, v if isinstance(v, (str, int, float)) or v is None else json.dumps(v)])
        return buf.getvalue().rstrip("\n")
    raise AssertionError(fmt)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# ------------------------------------------------------------------ argument helpers


def _seed(args, config=None) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QRES_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise InvalidInputError(f"QRES_SEED must be an integer, got {env!r}") from None
    if config is not None and "seed" in config.optimizer:
        return int(config.optimizer["seed"])
    return 0


def _table_and_config(args, required=True):
    if args.config and args.table:
        raise InvalidInputError("give either --config or --table, not both")
    if args.config:
        cfg = fileio.load_config(args.config)
        return simulate(cfg.prep, cfg.ops), cfg
    if args.table:
        return fileio.load_table(args.table), None
    if required:
        raise InvalidInputError("need --config or --table")
    return None, None


def _witness_name(args, config):
    name = args.witness or (config and (config.witness or {}).get("name"))
    if not name:
        raise InvalidInputError("no witness given (use --witness or a config 'witness' field)")
    return name


def _dim(args, config, fallback=None):
    if args.dim is not None:
        return args.dim
    if config is not None:
        return config.dimension
    return fallback


def _check_witness_dim(spec, d):
    if d is not None and spec.dim != d:
        raise InvalidInputError(f"witness {spec.name!r} is defined for d={spec.dim}, not d={d}")


def _reference_table(args):
    path = args.reference or args.table
    if not path:
        if args.config:
            cfg = fileio.load_config(args.config)
            return simulate(cfg.prep, cfg.ops)
        raise InvalidInputError("the generic witness needs a reference table (--reference, --table or --config)")
    return fileio.load_table(path)


# ------------------------------------------------------------------ commands


def cmd_simulate(args) -> int:
    if not args.config:
        raise InvalidInputError("simulate needs --config")
    config = fileio.load_config(args.config)
    table = simulate(config.prep, config.ops)
    if args.format == "json":
        text = fileio.table_to_json(table)
    elif args.format == "csv":
        text = fileio.table_to_csv(table).rstrip("\n")
    else:
        text = fileio.table_to_text(table)
    _emit(text, args.out)
    return 0


def cmd_witness(args) -> int:
    table, config = _table_and_config(args)
    name = _witness_name(args, config)
    if name == "generic":
        if args.reference is None:
            raise InvalidInputError("witness generic needs --reference (the reference table)")
        ref = fileio.load_table(args.reference)
        free = get_free_set(args.free_set, _dim(args, config, 2)) if args.free_set else None
        cfg = OptimizationConfig(restarts=args.restarts or 50, seed=_seed(args, config))
        spec = generic_witness(ref, epsilon=args.epsilon, free=free, cfg=cfg)
    else:
        params = (config.witness or {}) if config else {}
        d = args.dim or params.get("d") or (config.dimension if config else None)
        if d is None and name in ("coherence-d", "purity"):
            d = table.num_j
        spec = get_witness(name, d)
        _check_witness_dim(spec, d)
    res = evaluate(spec, table)
    published = res.paper_bound if res.paper_bound is not None else res.free_bound
    report = {
        "witness": spec.name,
        "value": res.value,
        "free_bound": res.free_bound,
        "published_bound": published,
        "bound_provenance": res.bound_provenance,
        "verdict": res.verdict.value,
    }
    if res.note:
        report["note"] = res.note
    if args.format == "text":
        lines = [
            f"witness           {spec.name}",
            f"value             {_num(res.value)}",
            f"free bound        {_num(res.free_bound)}",
            f"published bound   {published:g}",
            f"bound provenance  {res.bound_provenance}",
            f"verdict           {res.verdict.value}",
        ]
        if res.note:
            lines.append(f"note              {res.note}")
        text = "\n".join(lines)
    else:
        text = _render(report, args.format)
    _emit(text, args.out)
    return 0


def cmd_detect(args) -> int:
    table, config = _table_and_config(args)
    free_name = args.free_set or (config.free_set if config else None)
    if not free_name:
        raise InvalidInputError("detect needs --free-set (or a config 'free_set' field)")
    free = get_free_set(free_name, _dim(args, config, 2))
    mode = args.mode or (config.detection_mode if config and config.detection_mode else "STATES")
    rank_tol = args.rank_tol if args.rank_tol is not None else (
        config.rank_tolerance if config and config.rank_tolerance is not None else 1e-8)
    v = detect(table, free, mode, rel_tol=rank_tol, outcome=args.outcome)
    for w in v.warnings:
        print(f"warning: {w}", file=sys.stderr)
    report = {
        "free_set": free.name,
        "mode": v.mode.value,
        "rank": v.rank,
        "budget_N": v.budget_N,
        "rank_tolerance": v.tolerance_used,
        "singular_values": list(v.singular_values),
        "verdict": v.verdict.value,
        "hypothesis_violated": v.hypothesis_violated,
        "warnings": list(v.warnings),
    }
    if args.format == "text":
        lines = [
            f"free set          {free.name} (d={free.dim})",
            f"mode              {v.mode.value}",
            f"rank              {v.rank}",
            f"budget N          {v.budget_N}",
            f"rank tolerance    {v.tolerance_used:g}",
            "singular values   " + " ".join(f"{s:.6e}" for s in v.singular_values),
            f"verdict           {v.verdict.value}",
        ]
        lines += [f"warning           {w}" for w in v.warnings]
        text = "\n".join(lines)
    else:
        text = _render(report, args.format)
    _emit(text, args.out)
    return 0


def _realization_dump(states, instruments):
    return {
        "states": [fileio.encode_matrix(s) for s in states],
        "instruments": [[fileio.encode_matrix(e) for e in inst] for inst in instruments],
    }


def _certify_report(name, free, constrain, method, value, published, provenance, restarts, agreeing,
                    non_converged, seed, note, states, instruments):
    return {
        "witness": name,
        "free_set": free.name,
        "constrained_side": constrain,
        "method": method,
        "certified_value": value,
        "published_bound": published,
        "abs_difference": None if published is None else abs(value - published),
        "bound_provenance": provenance,
        "restarts": restarts,
        "restarts_agreeing": agreeing,
        "non_converged": non_converged,
        "seed": seed,
        "note": note,
        "argmax": _realization_dump(states, instruments),
    }


def _certify_text(r, states, instruments) -> str:
    pub = "n/a" if r["published_bound"] is None else f"{r['published_bound']:g}"
    diff = "n/a" if r["abs_difference"] is None else _num(r["abs_difference"], 9)
    lines = [
        f"witness            {r['witness']}",
        f"free set           {r['free_set']}",
        f"constrained side   {r['constrained_side']}",
        f"method             {r['method']}",
        f"certified value    {_num(r['certified_value'], 9)}",
        f"published bound    {pub}",
        f"|difference|       {diff}",
        f"bound provenance   {r['bound_provenance']}",
        f"{'restarts agreeing' if r['method'] in _RESTART_METHODS else 'optimal candidates':<19}"
        f"{r['restarts_agreeing']}/{r['restarts']}",
        f"non-converged      {r['non_converged']}",
        f"seed               {r['seed']}",
        f"note               {r['note']}",
        "argmax states",
    ]
    lines += [f"  y={y}  {_matrix_text(s)}" for y, s in enumerate(states)]
    lines.append("argmax instruments")
    for x, inst in enumerate(instruments):
        lines += [f"  x={x} j={j}  {_matrix_text(e)}" for j, e in enumerate(inst)]
    return "\n".join(lines)


def cmd_certify(args) -> int:
    config = fileio.load_config(args.config) if args.config else None
    name = _witness_name(args, config)
    seed = _seed(args, config)
    opt = dict(config.optimizer) if config else {}
    opt.pop("seed", None)
    if args.restarts is not None:
        opt["restarts"] = args.restarts
    elif name == "generic":
        opt.setdefault("restarts", 50)
    if args.search and args.search != "enumerate":
        opt["inner_search"] = _SEARCHES[args.search]
    try:
        cfg = OptimizationConfig(seed=seed, **opt)
    except TypeError as exc:
        raise InvalidInputError(f"optimizer: {exc}") from None

    if name == "generic":
        ref = _reference_table(args)
        free = get_free_set(args.free_set or (config.free_set if config else None) or "incoherent",
                            _dim(args, config, 2))
        g = gap_search(ref, free, cfg)
        agreeing = int(np.count_nonzero(np.asarray(g.restart_values) >= g.value - cfg.agree_tol))
        d = free.dim
        states, instruments = g.states, [[e, np.eye(d) - e] for e in g.effects]
        report = _certify_report(
            "generic", free, "STATES_ONLY", "alternating-l1", g.value, None, "certified-numeric",
            cfg.restarts, agreeing, g.non_converged, seed,
            "negated smallest l1 distance found from the reference table to a free realization (an upper "
            "estimate of the true gap)", states, instruments)
        non_conv, runs = g.non_converged, cfg.restarts
    else:
        d = _dim(args, config)
        spec = get_witness(name, d)
        _check_witness_dim(spec, d)
        free_name = args.free_set or (config.free_set if config else None) or spec.default_free_set
        free = get_free_set(free_name, spec.dim)
        constrain = _MODES[args.mode.lower()] if args.mode else Constrain(spec.default_constrain)
        if name == "coherence-d":
            if free_name != "incoherent":
                raise InvalidInputError("coherence-d is certified against the incoherent free set only")
            cb = certify_qudit_coherence(spec.dim, cfg)
        elif args.search == "enumerate":
            cb = enumerate_vertex_bound(spec, free, cfg, constrain)
        else:
            cb = certify_bound(spec, free, constrain, cfg)
        published = spec.paper_bound if spec.paper_bound is not None else spec.free_bound
        runs = len(cb.restart_values)
        states, instruments = cb.argmax_states, cb.argmax_effects.instruments
        report = _certify_report(
            spec.name, free, cb.constrain.value, cb.method, cb.value, published, spec.bound_provenance,
            runs, cb.restarts_agreeing, cb.non_converged, seed, cb.note, states, instruments)
        non_conv = cb.non_converged
    text = _certify_text(report, states, instruments) if args.format == "text" else _render(report, args.format)
    _emit(text, args.out)
    if runs and non_conv == runs:
        raise NonConvergenceError(f"none of the {runs} restarts converged")
    return 0


def cmd_list(args) -> int:
    report = {
        "witnesses": {n: WITNESS_HELP[n] for n in WITNESS_NAMES},
        "free_sets": {n: FREE_SET_HELP[n] for n in FREE_SET_NAMES},
        "configs": fileio.bundled_configs(),
    }
    if args.format == "text":
        lines = ["witnesses"] + [f"  {k:<16}{v}" for k, v in report["witnesses"].items()]
        lines += ["free sets"] + [f"  {k:<16}{v}" for k, v in report["free_sets"].items()]
        lines += ["bundled configs (use --config examples/<name>)"] + [f"  {c}" for c in report["configs"]]
        text = "\n".join(lines)
    elif args.format == "json":
        text = json.dumps(report, indent=1)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "name", "description"])
        for k, v in report["witnesses"].items():
            w.writerow(["witness", k, v])
        for k, v in report["free_sets"].items():
            w.writerow(["free_set", k, v])
        for c in report["configs"]:
            w.writerow(["config", c, ""])
        text = buf.getvalue().rstrip("\n")
    _emit(text, args.out)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON path or bundled name such as examples/coherence-qubit)")
    common.add_argument("--table", help="correlation table JSON file")
    common.add_argument("--witness", help="witness name (see 'qres list')")
    common.add_argument("--free-set", help="free set name (see 'qres list')")
    common.add_argument("--mode", type=str.lower, choices=("states", "operations", "both"),
                        help="detection mode / constrained side")
    common.add_argument("--rank-tol", type=float, help="relative singular-value threshold (default 1e-8)")
    common.add_argument("--restarts", type=int, help="optimizer restarts")
    common.add_argument("--seed", type=int, help="master seed (falls back to $QRES_SEED, then the config, then 0)")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--dim", type=int, help="Hilbert-space dimension")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qres", description="Semi-device-independent resource detection.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate a config and print p(j|x,y)")
    w = sub.add_parser("witness", parents=[common], help="evaluate a witness on a table or config")
    w.add_argument("--reference", help="reference table for the generic witness")
    w.add_argument("--epsilon", type=float, help="margin of the generic witness (estimated if omitted)")
    d = sub.add_parser("detect", parents=[common], help="rank test against a free set")
    d.add_argument("--outcome", type=int, default=0, help="outcome j used for the correlation matrix")
    c = sub.add_parser("certify", parents=[common], help="numerically certify a free bound")
    c.add_argument("--search", choices=tuple(_SEARCHES), help="search strategy (default: witness-appropriate)")
    c.add_argument("--reference", help="reference table for the generic witness")
    sub.add_parser("list", parents=[common], help="list witnesses, free sets and bundled configs")
    return p


COMMANDS = {
    "simulate": cmd_simulate,
    "witness": cmd_witness,
    "detect": cmd_detect,
    "certify": cmd_certify,
    "list": cmd_list,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except QresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

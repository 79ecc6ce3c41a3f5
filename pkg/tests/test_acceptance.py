"""Acceptance gate: ten criteria, each checked at its stated tolerance.

Run with ``pytest -v tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``;
each criterion prints a single PASS/FAIL line.
"""

import io
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from qres import freesets
from qres.cli import main
from qres.optimizer import Constrain, OptimizationConfig, certify_bound, certify_qudit_coherence, estimate_gap
from qres.qmath import random_povm
from qres.ranktest import Detection, DetectionMode, build_state_test_matrix, detect, numerical_rank, state_test_construction
from qres.scenario import OperationBox, PreparationBox, simulate
from qres.witnesses import coherence_qubit, coherence_qudit, evaluate, imaginarity_qubit, magic_qubit, purity


def criterion_1():
    t0 = time.perf_counter()
    spec = coherence_qubit()
    value = evaluate(spec, simulate(spec.reference_prep, spec.reference_ops)).value
    dt = time.perf_counter() - t0
    ok = abs(value - (3 + np.sqrt(2))) < 1e-9 and dt < 1
    return ok, f"W_C={value:.12f} target 3+sqrt2, {dt:.3f}s"


def criterion_2():
    t0 = time.perf_counter()
    cb = certify_bound(coherence_qubit(), freesets.incoherent(2), Constrain.BOTH, OptimizationConfig(restarts=200))
    dt = time.perf_counter() - t0
    ok = abs(cb.value - 4) < 1e-6 and cb.restarts_agreeing >= 50 and dt < 60
    return ok, f"bound={cb.value:.9f}, {cb.restarts_agreeing}/200 agreeing, {dt:.2f}s"


def criterion_3():
    t0 = time.perf_counter()
    parts, ok = [], True
    for d in (2, 3, 4):
        spec = coherence_qudit(d)
        ref = evaluate(spec, spec.reference_table()).value
        cb = certify_qudit_coherence(d, assignments="permutations")
        ok &= abs(ref - (d * d + d * np.sqrt(d))) < 1e-9 and abs(cb.value - (d * d + d)) < 1e-4
        parts.append(f"d={d}: ref {ref:.9f} bound {cb.value:.6f}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    return ok, "; ".join(parts) + f", {dt:.2f}s"


def criterion_4():
    spec = imaginarity_qubit()
    ref = evaluate(spec, spec.reference_table()).value
    cb = certify_bound(spec, freesets.real_states(2), Constrain.BOTH, OptimizationConfig(restarts=200))
    ok = abs(ref - (4 + np.sqrt(2))) < 1e-9 and cb.value <= 5 + 1e-6
    return ok, (f"W_I ref={ref:.12f}; max over real states/effects {cb.value:.9f} (limit 5+1e-6), "
                f"{cb.non_converged}/200 restarts hit the evaluation budget")


def criterion_5():
    t0 = time.perf_counter()
    spec = magic_qubit()
    cb = certify_bound(spec, freesets.stabilizer_qubit(), Constrain.STATES_ONLY, OptimizationConfig(restarts=200))
    ref = evaluate(spec, spec.reference_table()).value
    dt = time.perf_counter() - t0
    ok = abs(cb.value - 4.32) < 0.01 and ref > cb.value and dt < 300
    return ok, f"certified {cb.value:.9f} vs 4.32, reference {ref:.6f}, {dt:.2f}s"


def criterion_6():
    parts, ok = [], True
    for d in (2, 3):
        spec = purity(d)
        cb = certify_bound(spec, freesets.maximally_mixed(d), Constrain.STATES_ONLY, OptimizationConfig(restarts=200))
        ref = evaluate(spec, spec.reference_table()).value
        ok &= abs(cb.value - 1 / d) < 1e-9 and abs(ref - 1) < 1e-12
        parts.append(f"d={d}: bound {cb.value:.12f} ref {ref:.3f}")
    return ok, "; ".join(parts)


def criterion_7():
    t0 = time.perf_counter()
    ok, checked = True, 0
    for d in (2, 3):
        for n in range(1, d * d):
            prep, ops = state_test_construction(d, n + 1)
            ok &= numerical_rank(build_state_test_matrix(simulate(prep, ops))) == n + 1
            checked += 1
    dt = time.perf_counter() - t0
    ok &= dt < 10
    return ok, f"{checked} budgets checked, {dt:.2f}s"


def criterion_8():
    ok, parts = True, []
    for fs in (freesets.incoherent(2), freesets.incoherent(3), freesets.real_states(2)):
        rng = np.random.default_rng(8)
        d, k = fs.dim, fs.dim**2 + 1
        worst = 0
        for _ in range(1000):
            states = [fs.sample_state(rng) for _ in range(k)]
            ops = OperationBox([random_povm(d, 2, rng) for _ in range(k)])
            v = detect(simulate(PreparationBox(states), ops), fs, DetectionMode.STATES)
            ok &= v.verdict is Detection.CONSISTENT_WITH_FREE and v.rank <= fs.state_rank_budget
            worst = max(worst, v.rank)
        parts.append(f"{fs.name} d={d}: max rank {worst} <= N={fs.state_rank_budget}")
    return ok, "; ".join(parts)


def criterion_9():
    prep, ops = state_test_construction(2, 3)
    gap = estimate_gap(simulate(prep, ops), freesets.incoherent(2))
    return gap < -1e-3, f"estimated gap {gap:.6f} (needs < -1e-3)"


def _certify_report(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = main(argv)
    return rc, buf.getvalue()


def criterion_10():
    runs = [
        ["certify", "--witness", "coherence", "--free-set", "incoherent", "--mode", "both", "--seed", "7"],
        ["certify", "--witness", "magic", "--free-set", "stabilizer", "--seed", "7"],
        ["certify", "--witness", "imaginarity", "--free-set", "real-projective", "--restarts", "3", "--seed", "7"],
    ]
    ok = True
    for argv in runs:
        a, b = _certify_report(argv), _certify_report(argv)
        ok &= a == b and len(a[1]) > 0
    return ok, f"{len(runs)} certify reports repeated bit-identically" if ok else "reports differ"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return line


@pytest.mark.slow
@pytest.mark.parametrize("n", range(1, 11))
def test_acceptance(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print()
        report(n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = [report(i + 1, *c()) for i, c in enumerate(CRITERIA)]
    raise SystemExit(0 if all(" PASS " in r for r in results) else 1)

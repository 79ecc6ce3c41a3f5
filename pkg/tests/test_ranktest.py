import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qres import freesets
from qres.errors import InvalidInputError
from qres.qmath import independent_projector_basis, random_density_matrix, random_povm
from qres.ranktest import (
    Detection,
    DetectionMode,
    build_operation_test_matrix,
    build_state_test_matrix,
    detect,
    numerical_rank,
    operation_test_construction,
    state_test_construction,
)
from qres.scenario import OperationBox, PreparationBox, simulate, table_from_raw

import oracles


def test_delta_table_gives_identity():
    probs = np.zeros((2, 2, 2))
    for y in range(2):
        for x in range(2):
            probs[y, x, 0 if x == y else 1] = 1.0
    m = build_state_test_matrix(table_from_raw(probs))
    assert np.abs(m - np.eye(2)).max() == 0
    assert np.abs(build_operation_test_matrix(table_from_raw(probs)) - m.T).max() == 0
    with pytest.raises(InvalidInputError):
        build_state_test_matrix(table_from_raw(probs), outcome=2)


def test_numerical_rank_examples():
    assert numerical_rank(np.eye(4)) == 4
    rng = np.random.default_rng(1)
    assert numerical_rank(np.outer(rng.random(5), rng.random(4))) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def test_numerical_rank_invariances(seed, scale):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 5))
    m = rng.random((5, r)) @ rng.random((r, 6))
    base = numerical_rank(m)
    assert base == r
    assert numerical_rank(scale * m) == base
    assert numerical_rank(m[rng.permutation(5)][:, rng.permutation(6)]) == base


def test_four_qubit_projectors_full_rank():
    basis = independent_projector_basis(2)
    t = simulate(PreparationBox(basis), OperationBox([[p, np.eye(2) - p] for p in basis]))
    assert numerical_rank(build_state_test_matrix(t)) == 4


def test_incoherent_states_rank_at_most_two():
    rng = np.random.default_rng(5)
    inc = freesets.incoherent(2)
    states = [inc.sample_state(rng) for _ in range(3)]
    t = simulate(PreparationBox(states), OperationBox([random_povm(2, 2, rng) for _ in range(5)]))
    assert numerical_rank(build_state_test_matrix(t)) <= 2


@pytest.mark.parametrize("d", [2, 3])
def test_completeness_every_budget(d):
    for n in range(1, d * d):
        prep, ops = state_test_construction(d, n + 1)
        t = simulate(prep, ops)
        assert numerical_rank(build_state_test_matrix(t)) == n + 1
        assert oracles.exact_rank(oracles.theorem1_overlaps(d, n + 1)) == n + 1
        assert np.abs(build_state_test_matrix(t) - np.array(oracles.theorem1_overlaps(d, n + 1), dtype=float)).max() < 1e-12
        prep, ops = operation_test_construction(d, n + 1)
        t = simulate(prep, ops)
        assert numerical_rank(build_operation_test_matrix(t)) == n + 1


def test_detect_tomographic_table():
    prep, ops = state_test_construction(2, 4)
    v = detect(simulate(prep, ops), freesets.incoherent(2), "STATES")
    assert v.verdict is Detection.RESOURCE_DETECTED and v.rank == 4 and v.budget_N == 2
    assert v.tolerance_used == 1e-8 and len(v.singular_values) == 4


def test_detect_diagonal_table():
    inc = freesets.incoherent(2)
    rng = np.random.default_rng(2)
    states = [inc.sample_state(rng) for _ in range(4)]
    insts = [inc.sample_instrument(rng, 2) for _ in range(4)]
    t = simulate(PreparationBox(states), OperationBox(insts))
    for mode in DetectionMode:
        v = detect(t, inc, mode)
        assert v.verdict is Detection.CONSISTENT_WITH_FREE and v.rank <= 2


def test_detect_budget_at_d_squared_warns():
    prep, ops = state_test_construction(2, 4)
    v = detect(simulate(prep, ops), freesets.stabilizer_qubit(), "STATES")
    assert v.verdict is Detection.CONSISTENT_WITH_FREE
    assert v.hypothesis_violated and v.warnings


def test_verdict_iff_rank_exceeds_budget():
    rng = np.random.default_rng(9)
    inc = freesets.incoherent(3)
    for n in range(1, 9):
        prep, ops = state_test_construction(3, n)
        v = detect(simulate(prep, ops), inc, DetectionMode.STATES)
        assert v.detected == (v.rank > v.budget_N)
        assert v.rank == n
    t = simulate(PreparationBox([random_density_matrix(3, rng) for _ in range(3)]),
                 OperationBox([random_povm(3, 3, rng)]))
    v = detect(t, inc, "states")
    assert v.detected == (v.rank > v.budget_N)


def _free_tables(fs, side, n, rng):
    d = fs.dim
    k = d * d + 1
    for _ in range(n):
        if side == "states":
            states = [fs.sample_state(rng) for _ in range(k)]
            insts = [random_povm(d, 2, rng) for _ in range(k)]
        else:
            states = [random_density_matrix(d, rng) for _ in range(k)]
            insts = [fs.sample_instrument(rng, 2) for _ in range(k)]
        yield simulate(PreparationBox(states), OperationBox(insts))


@pytest.mark.parametrize(
    "fs, side",
    [
        (freesets.incoherent(2), "states"),
        (freesets.incoherent(3), "states"),
        (freesets.real_states(2), "states"),
        (freesets.maximally_mixed(2), "states"),
        (freesets.maximally_mixed(3), "states"),
        (freesets.incoherent(2), "operations"),
        (freesets.incoherent(3), "operations"),
        (freesets.real_states(2), "operations"),
    ],
    ids=lambda v: v if isinstance(v, str) else f"{v.name}-d{v.dim}",
)
def test_soundness_on_free_realizations(fs, side):
    rng = np.random.default_rng(2024)
    mode = DetectionMode.STATES if side == "states" else DetectionMode.OPERATIONS
    budget = fs.state_rank_budget if side == "states" else fs.effect_rank_budget
    for t in _free_tables(fs, side, 1000, rng):
        v = detect(t, fs, mode)
        assert v.verdict is Detection.CONSISTENT_WITH_FREE
        assert v.rank <= budget

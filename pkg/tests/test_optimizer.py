import numpy as np
import pytest

from qres import freesets
from qres.errors import InvalidInputError, UnsupportedDimensionError
from qres.freesets import membership
from qres.optimizer import (
    Constrain,
    InnerSearch,
    OptimizationConfig,
    _seesaw,
    _sides,
    certify_bound,
    certify_qudit_coherence,
    enumerate_vertex_bound,
    estimate_gap,
)
from qres.qmath import named_state, proj
from qres.ranktest import state_test_construction
from qres.scenario import OperationBox, PreparationBox, simulate
from qres.witnesses import coherence_qubit, coherence_qudit, imaginarity_qubit, magic_qubit, purity

import oracles


def test_config_validation():
    with pytest.raises(InvalidInputError):
        OptimizationConfig(restarts=0)
    with pytest.raises(InvalidInputError):
        OptimizationConfig(convergence_tol=0)
    with pytest.raises(InvalidInputError):
        OptimizationConfig(seed=-1)
    with pytest.raises(ValueError):
        OptimizationConfig(inner_search="GRADIENT")
    assert OptimizationConfig(inner_search="HYBRID").inner_search is InnerSearch.HYBRID


def test_restart_streams_extend():
    a = [r.random() for r in OptimizationConfig(restarts=3, seed=5).rngs()]
    b = [r.random() for r in OptimizationConfig(restarts=6, seed=5).rngs()]
    assert a == b[:3]


def _check_argmax(cb, spec, free, constrain):
    table = simulate(PreparationBox(cb.argmax_states), cb.argmax_effects)
    assert abs(spec.value(table.probs) - cb.value) < 1e-9
    if constrain in (Constrain.STATES_ONLY, Constrain.BOTH):
        for rho in cb.argmax_states:
            assert membership(free, rho).is_member
    if constrain in (Constrain.OPERATIONS_ONLY, Constrain.BOTH) and free.effects_rank_testable:
        for inst in cb.argmax_effects.instruments:
            for e in inst:
                assert membership(free, e, kind="effect").is_member


def test_coherence_bound_incoherent():
    spec, free = coherence_qubit(), freesets.incoherent(2)
    cb = certify_bound(spec, free, Constrain.BOTH, OptimizationConfig(restarts=60))
    assert abs(cb.value - 4) < 1e-6
    assert abs(cb.value - oracles.incoherent_coherence_bound_bruteforce()) < 1e-6
    assert cb.restarts_agreeing >= 15 and cb.non_converged == 0
    assert "lower bound" in cb.note
    _check_argmax(cb, spec, free, Constrain.BOTH)


def test_operations_only_side_selection():
    spec, free = coherence_qubit(), freesets.incoherent(2)
    state_side, effect_side = _sides(spec, free, Constrain.OPERATIONS_ONLY)
    assert state_side.name == "quantum" and effect_side is free
    cb = certify_bound(spec, free, Constrain.OPERATIONS_ONLY, OptimizationConfig(restarts=20))
    _check_argmax(cb, spec, free, Constrain.OPERATIONS_ONLY)
    assert cb.value <= 5 + 1e-9


@pytest.mark.parametrize("search, restarts", [(InnerSearch.SEESAW, 40), (InnerSearch.HYBRID, 6)])
def test_magic_bound(search, restarts):
    spec, free = magic_qubit(), freesets.stabilizer_qubit()
    cfg = OptimizationConfig(restarts=restarts, inner_search=search, nm_maxfev=1500)
    cb = certify_bound(spec, free, Constrain.STATES_ONLY, cfg)
    assert abs(cb.value - 4.32) < 0.01
    assert abs(cb.value - oracles.magic_bound_by_vertices()) < 1e-6
    _check_argmax(cb, spec, free, Constrain.STATES_ONLY)


def test_magic_vertex_enumeration_exact():
    cb = enumerate_vertex_bound(magic_qubit(), freesets.stabilizer_qubit())
    assert abs(cb.value - oracles.magic_bound_by_vertices()) < 1e-12
    assert len(cb.restart_values) == 6**3


@pytest.mark.parametrize("d", [2, 3])
def test_purity_bound(d):
    spec, free = purity(d), freesets.maximally_mixed(d)
    cb = certify_bound(spec, free, Constrain.STATES_ONLY, OptimizationConfig(restarts=10))
    assert abs(cb.value - 1 / d) < 1e-9
    _check_argmax(cb, spec, free, Constrain.STATES_ONLY)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_qudit_enumeration(d):
    cb = certify_qudit_coherence(d)
    assert abs(cb.value - (d * d + d)) < 1e-9
    if d <= 3:
        assert cb.value == oracles.qudit_incoherent_bound_bruteforce(d)
    perm = certify_qudit_coherence(d, assignments="permutations")
    assert abs(perm.value - (d * d + d)) < 1e-9
    spec = coherence_qudit(d)
    _check_argmax(cb, spec, freesets.incoherent(d), Constrain.BOTH)


def test_qudit_identity_assignment_instance():
    d = 3
    spec = coherence_qudit(d)
    inc = freesets.incoherent(d)
    basis = [np.diag(np.eye(d)[i]).astype(complex) for i in range(d)]
    ops = OperationBox([basis, basis])
    coeffs = spec.coefficients
    states = [inc.optimal_state(sum(coeffs[y, x, j] * basis[j] for x in range(2) for j in range(d)))
              for y in range(d * d)]
    assert spec.value(simulate(PreparationBox(states), ops).probs) <= d * d + d + 1e-12


def test_qudit_dimension_range():
    with pytest.raises(UnsupportedDimensionError):
        certify_qudit_coherence(6)


def test_seesaw_is_monotone():
    spec = coherence_qubit()
    for constrain in Constrain:
        state_side, effect_side = _sides(spec, freesets.incoherent(2), constrain)
        rng = np.random.default_rng(4)
        for _ in range(10):
            rhos = np.array([state_side.sample_state(rng) for _ in range(3)])
            _, _, conv, history = _seesaw(spec, state_side, effect_side, rhos, OptimizationConfig())
            assert conv
            assert all(b >= a - 1e-12 for a, b in zip(history, history[1:]))


def test_determinism():
    spec, free = magic_qubit(), freesets.stabilizer_qubit()
    cfg = OptimizationConfig(restarts=15, seed=123)
    a = certify_bound(spec, free, "STATES_ONLY", cfg)
    b = certify_bound(spec, free, "STATES_ONLY", cfg)
    assert a.value == b.value and a.restart_values == b.restart_values
    assert all(np.array_equal(x, y) for x, y in zip(a.argmax_states, b.argmax_states))
    c = certify_bound(imaginarity_qubit(), freesets.real_states(2, "projective"), "BOTH",
                      OptimizationConfig(restarts=2, seed=9, nm_maxfev=800))
    d = certify_bound(imaginarity_qubit(), freesets.real_states(2, "projective"), "BOTH",
                      OptimizationConfig(restarts=2, seed=9, nm_maxfev=800))
    assert c.restart_values == d.restart_values


def test_imaginarity_real_projective_respects_five():
    cb = certify_bound(imaginarity_qubit(), freesets.real_states(2, "projective"), Constrain.BOTH,
                       OptimizationConfig(restarts=20, seed=1))
    assert cb.value <= 5 + 1e-6
    assert cb.value > 5 - 1e-4
    _check_argmax(cb, imaginarity_qubit(), freesets.real_states(2, "projective"), Constrain.BOTH)


def test_imaginarity_real_strategy_exceeding_five():
    # real states with a real non-projective two-outcome measurement on x=2
    b = np.sqrt(2) - 1
    bar0, bar1 = proj(named_state("bar0")), proj(named_state("bar1"))
    e0 = bar1 + b * bar0
    states = [proj(named_state("0")), proj(named_state("plus")), bar1, bar1]
    ops = OperationBox([[bar0, bar1], [proj(named_state("barplus")), proj(named_state("barminus"))], [e0, np.eye(2) - e0]])
    real = freesets.real_states(2)
    for rho in states:
        assert membership(real, rho).is_member
    for inst in ops.instruments:
        for e in inst:
            assert membership(real, e, kind="effect").is_member
    value = imaginarity_qubit().value(simulate(PreparationBox(states), ops).probs)
    assert abs(value - (4 + np.sqrt(2))) < 1e-9


def test_gap_free_table_is_zero():
    inc = freesets.incoherent(2)
    rng = np.random.default_rng(8)
    states = [inc.sample_state(rng) for _ in range(3)]
    ops = OperationBox([inc.sample_instrument(rng, 2) for _ in range(4)])
    gap = estimate_gap(simulate(PreparationBox(states), ops), inc, OptimizationConfig(restarts=10))
    assert abs(gap) < 1e-6


def test_gap_theorem1_is_negative_and_monotone():
    prep, ops = state_test_construction(2, 3)
    ref = simulate(prep, ops)
    inc = freesets.incoherent(2)
    small = estimate_gap(ref, inc, OptimizationConfig(restarts=5, seed=2))
    large = estimate_gap(ref, inc, OptimizationConfig(restarts=15, seed=2))
    assert large < -1e-3
    assert large >= small


def test_gap_requires_polytope():
    prep, ops = state_test_construction(2, 3)
    with pytest.raises(InvalidInputError):
        estimate_gap(simulate(prep, ops), freesets.real_states(2))

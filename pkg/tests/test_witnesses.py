import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qres.errors import InvalidInputError
from qres.qmath import ket, proj, random_density_matrix, random_povm
from qres.scenario import OperationBox, PreparationBox, simulate, table_from_raw
from qres.witnesses import (
    MAGIC_PAPER_BOUND,
    Verdict,
    coherence_qubit,
    coherence_qudit,
    evaluate,
    generic_witness,
    get_witness,
    imaginarity_qubit,
    magic_qubit,
    purity,
    qudit_measurement_bases,
)

import oracles


def uniform(ny, nx, nj):
    return table_from_raw(np.full((ny, nx, nj), 1.0 / nj))


def random_table(rng, ny, nx, nj, d=2):
    states = [random_density_matrix(d, rng) for _ in range(ny)]
    return simulate(PreparationBox(states), OperationBox([random_povm(d, nj, rng) for _ in range(nx)]))


def test_coherence_reference():
    spec = coherence_qubit()
    ref = spec.reference_table()
    assert np.abs(ref.probs - oracles.coherence_reference_table()).max() < 1e-12
    res = evaluate(spec, ref)
    assert abs(res.value - (3 + np.sqrt(2))) < 1e-9
    assert abs(res.value - (1 + 4 * np.cos(np.pi / 8) ** 2)) < 1e-9
    assert res.verdict is Verdict.VIOLATED and res.bound_provenance == "analytic"


def test_coherence_uniform_and_incoherent_optimum():
    spec = coherence_qubit()
    assert abs(evaluate(spec, uniform(3, 2, 2)).value - 2.5) < 1e-15
    # basis-state realization attaining the brute-force incoherent optimum
    states = [proj(ket(0)), proj(ket(1)), proj(ket(0))]
    ops = OperationBox([[np.eye(2), 0 * np.eye(2)], [proj(ket(0)), proj(ket(1))]])
    res = evaluate(spec, simulate(PreparationBox(states), ops))
    assert res.value == oracles.incoherent_coherence_bound_bruteforce() == 4.0
    assert res.verdict is Verdict.NOT_VIOLATED


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 1), (2, 0, 1)]))
def test_coherence_monotone_in_addends(seed, cell):
    spec = coherence_qubit()
    p = random_table(np.random.default_rng(seed), 3, 2, 2).probs.copy()
    base = spec.value(p)
    p[cell] += 0.05
    assert spec.value(p) >= base + 0.05 - 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_qudit_reference(d):
    spec = coherence_qudit(d)
    res = evaluate(spec, spec.reference_table())
    assert abs(res.value - oracles.qrac_value_closed_form(d)) < 1e-9
    assert abs(spec.free_bound - (d * d + d)) < 1e-15
    assert abs(res.value - spec.free_bound - d * (np.sqrt(d) - 1)) < 1e-9
    assert abs(evaluate(spec, uniform(d * d, 2, d)).value - 2 * d) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_qudit_decoding_bases_against_oracle(d):
    kets = oracles.qrac_kets(d)
    b0, b1 = qudit_measurement_bases(d)
    total = 0.0
    for y0 in range(d):
        for y1 in range(d):
            psi = kets[y0 * d + y1]
            total += abs(np.vdot(b0[y0], psi)) ** 2 + abs(np.vdot(b1[y1], psi)) ** 2
    assert abs(total - oracles.qrac_value_closed_form(d)) < 1e-9


def test_imaginarity_reference_and_uniform():
    spec = imaginarity_qubit()
    ref = spec.reference_table()
    assert np.abs(ref.probs - oracles.imaginarity_reference_table()).max() < 1e-12
    assert abs(evaluate(spec, ref).value - (4 + np.sqrt(2))) < 1e-9
    assert abs(evaluate(spec, uniform(4, 3, 2)).value - 3) < 1e-15
    assert spec.bound_provenance == "analytic-upper"


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_imaginarity_below_coherence_envelope(seed):
    p = random_table(np.random.default_rng(seed), 4, 3, 2).probs
    assert imaginarity_qubit().value(p) <= coherence_qubit().value(p[:3, :2]) + 1 + 1e-12


def test_purity_examples():
    for d in (2, 3):
        spec = purity(d)
        assert abs(evaluate(spec, spec.reference_table()).value - 1) < 1e-12
        mixed = simulate(PreparationBox([np.eye(d) / d]), OperationBox([[proj(ket(i, d)) for i in range(d)]]))
        res = evaluate(spec, mixed)
        assert abs(res.value - 1 / d) < 1e-12 and res.verdict is Verdict.NOT_VIOLATED


def test_purity_trivial_instrument_is_not_a_violation():
    spec = purity(2)
    t = table_from_raw(np.array([[[1.0]]]))
    res = evaluate(spec, t)
    assert res.value == 1.0
    assert res.verdict is Verdict.NOT_VIOLATED and res.note


def test_magic_bound_against_vertex_oracle():
    spec = magic_qubit()
    oracle = oracles.magic_bound_by_vertices()
    assert abs(spec.free_bound - oracle) < 1e-9
    assert abs(spec.free_bound - MAGIC_PAPER_BOUND) < 0.01
    res = evaluate(spec, spec.reference_table())
    assert res.verdict is Verdict.VIOLATED and res.paper_bound == 4.32
    assert res.value > spec.free_bound


def test_generic_witness_examples():
    ref = coherence_qubit().reference_table()
    spec = generic_witness(ref, epsilon=0.05)
    assert evaluate(spec, ref).value == 0.0
    p = ref.probs.copy()
    p[1, 0, 0] += 0.1
    p[1, 0, 1] -= 0.1
    assert abs(evaluate(spec, table_from_raw(p)).value + 0.1) < 1e-12
    with pytest.raises(InvalidInputError):
        generic_witness(ref, epsilon=0.0)
    with pytest.raises(InvalidInputError):
        generic_witness(ref)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generic_witness_nonpositive(seed):
    rng = np.random.default_rng(seed)
    ref = random_table(rng, 3, 2, 2)
    spec = generic_witness(ref, epsilon=1e-3)
    other = random_table(rng, 3, 2, 2)
    assert spec.value(other.probs) < 0
    assert spec.value(ref.probs) == 0


@pytest.mark.parametrize("name", ["coherence", "imaginarity", "magic", "purity", "coherence-d"])
def test_reference_exceeds_bound(name):
    spec = get_witness(name)
    assert abs(spec.value(spec.reference_table().probs) - spec.reference_value) < 1e-9
    assert spec.reference_value > spec.free_bound


def test_shape_mismatch_lists_missing_cells():
    spec = imaginarity_qubit()
    with pytest.raises(InvalidInputError, match=r"\(x=2,y=0,j=0\)"):
        evaluate(spec, coherence_qubit().reference_table())
    with pytest.raises(InvalidInputError):
        get_witness("nonsense")

"""Resource witnesses: functionals of a correlation table with a free bound.

A witness only ever looks at the table p(j|x,y), never at the states or
effects that produced it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .qmath import _check_dim, generalized_pauli_x, generalized_pauli_z, ket, named_state, qrac_state
from .scenario import CorrelationTable, OperationBox, PreparationBox, simulate

__all__ = [
    "Verdict",
    "WitnessSpec",
    "WitnessResult",
    "coherence_qubit",
    "coherence_qudit",
    "imaginarity_qubit",
    "purity",
    "magic_qubit",
    "generic_witness",
    "evaluate",
    "get_witness",
    "WITNESS_NAMES",
    "VIOLATION_TOL",
    "MAGIC_PAPER_BOUND",
]

VIOLATION_TOL = 1e-9
MAGIC_PAPER_BOUND = 4.32


class Verdict(str, enum.Enum):
    VIOLATED = "VIOLATED"
    NOT_VIOLATED = "NOT_VIOLATED"


@dataclass(frozen=True)
class WitnessSpec:
    """A witness ``W(p) <= free_bound``.

    ``coefficients[y, x, j]`` and ``offset`` are set for linear witnesses
    (``W = sum c * p + offset``); ``function`` is the general evaluator on
    the probability array. ``shape`` is the scenario used for reference
    realizations and optimization, ``min_shape`` the smallest table the
    evaluator accepts.
    """

    name: str
    shape: tuple[int, int, int]
    function: Callable[[np.ndarray], float] = field(repr=False)
    free_bound: float
    bound_provenance: str
    reference_prep: PreparationBox = field(repr=False)
    reference_ops: OperationBox = field(repr=False)
    reference_value: float
    coefficients: np.ndarray | None = field(default=None, repr=False)
    offset: float = 0.0
    min_shape: tuple[int, int, int] | None = None
    paper_bound: float | None = None
    measurement_class: str = "general"
    default_free_set: str | None = None
    default_constrain: str = "BOTH"
    min_outcomes_for_violation: int = 1

    @property
    def is_linear(self) -> bool:
        return self.coefficients is not None

    @property
    def required_shape(self) -> tuple[int, int, int]:
        return self.min_shape or self.shape

    @property
    def dim(self) -> int:
        return self.reference_prep.dim

    def reference_table(self) -> CorrelationTable:
        return simulate(self.reference_prep, self.reference_ops)

    def value(self, probs: np.ndarray) -> float:
        """Evaluate on a raw array ``probs[y, x, j]`` without shape checks."""
        return float(self.function(probs))


@dataclass(frozen=True)
class WitnessResult:
    value: float
    free_bound: float
    verdict: Verdict
    bound_provenance: str
    paper_bound: float | None = None
    note: str = ""

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED


def _linear(coeffs: np.ndarray, offset: float = 0.0):
    ny, nx, nj = coeffs.shape

    def f(probs):
        return float(np.sum(coeffs * probs[:ny, :nx, :nj]) + offset)

    return f


def _coherence_coefficients(ny=3, nx=2) -> np.ndarray:
    c = np.zeros((ny, nx, 2))
    # p(0|0,0) + p(0|0,1) + p(0|1,0) + p(1|1,1) + p(1|0,2), indexed [y, x, j]
    c[0, 0, 0] = c[1, 0, 0] = c[0, 1, 0] = c[1, 1, 1] = c[2, 0, 1] = 1.0
    return c


def _coherence_reference():
    s = named_state
    prep = PreparationBox.from_kets([s("0"), s("plus"), s("bar1")])
    ops = OperationBox.from_projective([[s("bar0"), s("bar1")], [s("barplus"), s("barminus")]])
    return prep, ops


def coherence_qubit() -> WitnessSpec:
    """Qubit coherence witness, free bound 4 for incoherent states and operations."""
    coeffs = _coherence_coefficients()
    prep, ops = _coherence_reference()
    return WitnessSpec(
        name="coherence",
        shape=(3, 2, 2),
        function=_linear(coeffs),
        free_bound=4.0,
        bound_provenance="analytic",
        reference_prep=prep,
        reference_ops=ops,
        reference_value=3 + np.sqrt(2),
        coefficients=coeffs,
        default_free_set="incoherent",
        default_constrain="BOTH",
    )


def qudit_measurement_bases(d: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Decoding bases for the d-level random access code.

    Outcome j of x=0 is ``X^j |0>`` (the Z_d eigenvector with eigenvalue
    w^-j); outcome j of x=1 is ``Z^j |f_0>`` with ``|f_0>`` the uniform
    superposition (the X_d eigenvector with eigenvalue w^j).
    """
    x_op, z_op = generalized_pauli_x(d), generalized_pauli_z(d)
    f0 = np.ones(d, dtype=complex) / np.sqrt(d)
    basis0 = [np.linalg.matrix_power(x_op, j) @ ket(0, d) for j in range(d)]
    basis1 = [np.linalg.matrix_power(z_op, j) @ f0 for j in range(d)]
    return basis0, basis1


def coherence_qudit(d: int) -> WitnessSpec:
    """Random-access-code coherence witness; preparation y = y0 * d + y1."""
    d = _check_dim(d)
    coeffs = np.zeros((d * d, 2, d))
    for y0 in range(d):
        for y1 in range(d):
            y = y0 * d + y1
            coeffs[y, 0, y0] = 1.0
            coeffs[y, 1, y1] = 1.0
    prep = PreparationBox.from_kets([qrac_state(d, y0, y1) for y0 in range(d) for y1 in range(d)])
    ops = OperationBox.from_projective(qudit_measurement_bases(d))
    return WitnessSpec(
        name="coherence-d",
        shape=(d * d, 2, d),
        function=_linear(coeffs),
        free_bound=float(d * d + d),
        bound_provenance="analytic",
        reference_prep=prep,
        reference_ops=ops,
        reference_value=d * d + d * np.sqrt(d),
        coefficients=coeffs,
        default_free_set="incoherent",
        default_constrain="BOTH",
    )


def _imaginarity_value(probs: np.ndarray) -> float:
    p = probs
    w_c = p[0, 0, 0] + p[1, 0, 0] + p[0, 1, 0] + p[1, 1, 1] + p[2, 0, 1]
    return float(w_c + p[3, 2, 0] - abs(p[0, 2, 0] - p[0, 2, 1]) - abs(p[1, 2, 0] - p[1, 2, 1]))


def imaginarity_qubit() -> WitnessSpec:
    """Qubit imaginarity witness (nonlinear); analytic upper bound 5 for real strategies."""
    s = named_state
    prep = PreparationBox.from_kets([s("0"), s("plus"), s("bar1"), s("plus_y")])
    ops = OperationBox.from_projective(
        [[s("bar0"), s("bar1")], [s("barplus"), s("barminus")], [s("plus_y"), s("minus_y")]]
    )
    return WitnessSpec(
        name="imaginarity",
        shape=(4, 3, 2),
        function=_imaginarity_value,
        free_bound=5.0,
        bound_provenance="analytic-upper",
        reference_prep=prep,
        reference_ops=ops,
        reference_value=4 + np.sqrt(2),
        default_free_set="real",
        default_constrain="BOTH",
    )


def purity(d: int) -> WitnessSpec:
    """Purity witness ``p(0|0,0) <= 1/d``.

    The bound presumes a measurement whose effects have unit trace (rank-one
    projective, d outcomes): with the effect 1 the maximally mixed state
    gives 1. Tables whose instrument has fewer than two outcomes are never
    declared violating.
    """
    d = _check_dim(d)
    coeffs = np.zeros((1, 1, d))
    coeffs[0, 0, 0] = 1.0
    prep = PreparationBox.from_kets([ket(0, d)])
    ops = OperationBox.from_projective([[ket(i, d) for i in range(d)]])
    return WitnessSpec(
        name="purity",
        shape=(1, 1, d),
        min_shape=(1, 1, 1),
        function=_linear(coeffs[:, :, :1]),
        free_bound=1.0 / d,
        bound_provenance="analytic",
        reference_prep=prep,
        reference_ops=ops,
        reference_value=1.0,
        coefficients=coeffs,
        measurement_class="rank_one",
        default_free_set="maximally-mixed",
        default_constrain="STATES_ONLY",
        min_outcomes_for_violation=2,
    )


@lru_cache(maxsize=1)
def _magic_bound() -> float:
    from .freesets import stabilizer_qubit
    from .optimizer import enumerate_vertex_bound

    base = coherence_qubit()
    return enumerate_vertex_bound(base, stabilizer_qubit()).value


def magic_qubit() -> WitnessSpec:
    """The coherence expression read as a magic witness.

    The threshold is recomputed exactly by enumerating stabilizer vertices
    with optimal measurements; the published two-decimal value is kept in
    ``paper_bound``.
    """
    base = coherence_qubit()
    return WitnessSpec(
        name="magic",
        shape=base.shape,
        function=base.function,
        free_bound=_magic_bound(),
        bound_provenance="certified-numeric",
        reference_prep=base.reference_prep,
        reference_ops=base.reference_ops,
        reference_value=base.reference_value,
        coefficients=base.coefficients,
        paper_bound=MAGIC_PAPER_BOUND,
        default_free_set="stabilizer",
        default_constrain="STATES_ONLY",
    )


def generic_witness(reference_table: CorrelationTable, epsilon: float | None = None, free=None, cfg=None,
                    reference_prep=None, reference_ops=None) -> WitnessSpec:
    """l1 witness ``-sum_{x,y} |p(0|x,y) - p_ref(0|x,y)| <= -epsilon``.

    Without ``epsilon`` the margin is estimated as the optimizer's smallest
    l1 distance from ``reference_table`` to tables simulable with ``free``.
    """
    ref = np.asarray(reference_table.probs[:, :, 0], dtype=float)
    if epsilon is None:
        if free is None:
            raise InvalidInputError("generic witness needs an explicit epsilon or a free set to estimate it")
        from .optimizer import estimate_gap

        epsilon = -estimate_gap(reference_table, free, cfg)
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise InvalidInputError(f"generic witness margin epsilon must be > 0, got {epsilon:g}")
    ny, nx = ref.shape

    def f(probs):
        return -float(np.abs(probs[:ny, :nx, 0] - ref).sum())

    return WitnessSpec(
        name="generic",
        shape=reference_table.dims,
        min_shape=(ny, nx, 1),
        function=f,
        free_bound=-epsilon,
        bound_provenance="caller" if free is None else "certified-numeric",
        reference_prep=reference_prep,
        reference_ops=reference_ops,
        reference_value=0.0,
        default_constrain="STATES_ONLY",
    )


def _missing_cells(spec: WitnessSpec, table: CorrelationTable) -> list[tuple[int, int, int]]:
    ny, nx, nj = spec.required_shape
    have_y, have_x = table.num_y, table.num_x
    missing = []
    for y in range(ny):
        for x in range(nx):
            k = table.outcomes[x] if x < have_x else 0
            for j in range(nj):
                if y >= have_y or x >= have_x or j >= k:
                    missing.append((x, y, j))
    return missing


def evaluate(spec: WitnessSpec, table: CorrelationTable) -> WitnessResult:
    missing = _missing_cells(spec, table)
    if missing:
        shown = ", ".join(f"(x={x},y={y},j={j})" for x, y, j in missing[:12])
        more = f" and {len(missing) - 12} more" if len(missing) > 12 else ""
        raise InvalidInputError(f"table too small for witness {spec.name!r}: missing cells {shown}{more}")
    value = spec.value(table.probs)
    note = ""
    violated = value > spec.free_bound + VIOLATION_TOL
    if violated and min(table.outcomes[: spec.required_shape[1]]) < spec.min_outcomes_for_violation:
        violated = False
        note = f"no violation verdict for instruments with fewer than {spec.min_outcomes_for_violation} outcomes"
    return WitnessResult(
        value=value,
        free_bound=spec.free_bound,
        verdict=Verdict.VIOLATED if violated else Verdict.NOT_VIOLATED,
        bound_provenance=spec.bound_provenance,
        paper_bound=spec.paper_bound,
        note=note,
    )


WITNESS_NAMES = ("coherence", "coherence-d", "imaginarity", "purity", "magic", "generic")


def get_witness(name: str, d: int | None = None) -> WitnessSpec:
    """Witness by command-line name; ``generic`` is built from a table instead."""
    if name == "coherence":
        return coherence_qubit()
    if name == "coherence-d":
        return coherence_qudit(2 if d is None else d)
    if name == "imaginarity":
        return imaginarity_qubit()
    if name == "purity":
        return purity(2 if d is None else d)
    if name == "magic":
        return magic_qubit()
    if name == "generic":
        raise InvalidInputError("the generic witness is built from a reference table (use generic_witness)")
    raise InvalidInputError(f"unknown witness {name!r}; known: {', '.join(WITNESS_NAMES)}")

"""Free states and free operations of the resource theories in scope.

Each free set knows its extremal basis and rank budgets, how to test
membership, how to sample and parametrize its members, and how to solve
the two linear half-problems used by the see-saw optimizer:

* ``optimal_state(D)``: maximize ``Re Tr(rho D)`` over free states;
* ``optimal_instrument(C)``: maximize ``sum_j Re Tr(E_j C_j)`` over free
  instruments with ``len(C)`` outcomes.

:class:`QuantumSet` is the unrestricted counterpart used for whichever side
of the experiment is not constrained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidInputError, UnsupportedDimensionError
from .qmath import (
    _check_dim,
    fix_phase,
    independent_projector_basis,
    ket,
    named_state,
    pauli,
    proj,
)

__all__ = [
    "MembershipReport",
    "FreeSet",
    "QuantumSet",
    "Incoherent",
    "RealStates",
    "StabilizerQubit",
    "MaximallyMixed",
    "incoherent",
    "real_states",
    "stabilizer_qubit",
    "maximally_mixed",
    "quantum",
    "membership",
    "get_free_set",
    "FREE_SET_NAMES",
    "MEMBER_TOL",
]

MEMBER_TOL = 1e-9

_I2 = np.eye(2, dtype=complex)
_SX = pauli("x")
_SZ = pauli("z")


@dataclass(frozen=True)
class MembershipReport:
    is_member: bool
    distance_estimate: float

    @classmethod
    def from_distance(cls, dist: float, tol: float = MEMBER_TOL) -> "MembershipReport":
        dist = max(float(dist), 0.0)
        return cls(dist <= tol, dist)

    def __bool__(self) -> bool:
        return self.is_member


# ---------------------------------------------------------------- measurement half-steps


def _herm(m):
    return (m + m.conj().T) / 2


def two_outcome_optimum(c0, c1, real=False):
    """Optimal two-outcome measurement for coefficient operators c0, c1.

    Outcome 0 receives the projector onto the non-negative eigenspace of
    c0 - c1 (ties go to the lower outcome index).
    """
    diff = _herm(np.asarray(c0) - np.asarray(c1))
    if real:
        diff = diff.real
    w, v = np.linalg.eigh(diff)
    keep = w >= -1e-14
    e0 = (v[:, keep] @ v[:, keep].conj().T).astype(complex)
    e0 = _herm(e0)
    return [e0, np.eye(diff.shape[0]) - e0]


def _polar(m):
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def projective_ascent(coeffs, fixed_assignment=False, real=False, max_iter=500, tol=1e-13):
    """Ascent over rank-one projective measurements ``{|u_i><u_i|}``.

    Each basis vector is assigned to the outcome whose coefficient operator
    it overlaps most, then the basis is updated by the polar factor of
    ``[C_{a(i)} u_i]_i``; both half-steps never decrease the objective.
    With ``fixed_assignment`` outcome j keeps basis vector j (requires
    ``len(coeffs) == d``). Starts from the eigenbasis of every coefficient
    operator and keeps the best run.
    """
    coeffs = [_herm(np.asarray(c, dtype=complex)) for c in coeffs]
    if real:
        coeffs = [c.real.astype(float) for c in coeffs]
    d = coeffs[0].shape[0]
    k = len(coeffs)
    if fixed_assignment and k != d:
        raise InvalidInputError(f"rank-one projective measurements in d={d} have exactly {d} outcomes, not {k}")
    shift = max(0.0, -min(np.linalg.eigvalsh(c).min() for c in coeffs)) + 1.0
    shifted = [c + shift * np.eye(d) for c in coeffs]

    def value(u, assign):
        return sum(float(np.real(u[:, i].conj() @ coeffs[assign[i]] @ u[:, i])) for i in range(d))

    def assign_for(u):
        if fixed_assignment:
            return list(range(d))
        scores = np.array([[np.real(u[:, i].conj() @ c @ u[:, i]) for c in coeffs] for i in range(d)])
        return [int(np.argmax(row)) for row in scores]

    best = None
    for c in coeffs:
        u = np.linalg.eigh(c)[1][:, ::-1]
        assign = assign_for(u)
        val = value(u, assign)
        for _ in range(max_iter):
            m = np.column_stack([shifted[assign[i]] @ u[:, i] for i in range(d)])
            u_new = _polar(m)
            a_new = assign_for(u_new)
            v_new = value(u_new, a_new)
            if v_new <= val + tol:
                break
            u, assign, val = u_new, a_new, v_new
        if best is None or val > best[0] + 1e-12:
            best = (val, u, assign)
    _, u, assign = best
    effects = [np.zeros((d, d), dtype=complex) for _ in range(k)]
    for i in range(d):
        effects[assign[i]] += proj(fix_phase(u[:, i]))
    return effects


def diagonal_optimum(coeffs):
    """Optimal instrument with diagonal effects: each basis index goes to its best outcome."""
    diag = np.array([np.real(np.diag(c)) for c in coeffs])
    winners = np.argmax(diag, axis=0)
    d = diag.shape[1]
    effects = []
    for j in range(len(coeffs)):
        effects.append(np.diag((winners == j).astype(float)).astype(complex))
    return effects


# ---------------------------------------------------------------- parametrization helpers


def _simplex(theta):
    theta = np.asarray(theta, dtype=float)
    sq = theta**2
    s = sq.sum()
    if s < 1e-300:
        return np.full(theta.shape, 1.0 / theta.size)
    return sq / s


def _normalized_povm(blocks):
    """Turn arbitrary square matrices A_j into a POVM ``S^-1/2 A_j^dag A_j S^-1/2``."""
    pos = [a.conj().T @ a for a in blocks]
    d = pos[0].shape[0]
    s = sum(pos) + 1e-14 * np.eye(d)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    out = [_herm(s_inv_half @ p @ s_inv_half) for p in pos]
    # exact completeness: absorb rounding into the last effect
    out[-1] = np.eye(d) - sum(out[:-1])
    return [np.asarray(o, dtype=complex) for o in out]


def _density_from_block(a):
    rho = a @ a.conj().T
    tr = np.trace(rho).real
    if tr < 1e-300:
        return np.eye(a.shape[0], dtype=complex) / a.shape[0]
    return np.asarray(rho / tr, dtype=complex)


def _complex_block(theta, d):
    theta = np.asarray(theta, dtype=float)
    return theta[: d * d].reshape(d, d) + 1j * theta[d * d : 2 * d * d].reshape(d, d)


# ---------------------------------------------------------------- free sets


class FreeSet:
    """Common interface; subclasses fill in the theory-specific pieces."""

    name: str = "abstract"
    dim: int
    state_basis: tuple
    effect_basis: tuple
    extremal_states: tuple | None = None
    real_measurements: bool = False
    measurements: str = "general"

    @property
    def state_rank_budget(self) -> int:
        return len(self.state_basis)

    @property
    def effect_rank_budget(self) -> int:
        return len(self.effect_basis)

    @property
    def states_rank_testable(self) -> bool:
        return self.state_rank_budget < self.dim**2

    @property
    def effects_rank_testable(self) -> bool:
        return self.effect_rank_budget < self.dim**2

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, dim={self.dim})"

    def _check(self, m):
        m = np.asarray(m, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise InvalidInputError(f"{self.name}: expected a {self.dim}x{self.dim} operator, got shape {m.shape}")
        return m

    # membership ---------------------------------------------------------
    def state_distance(self, rho) -> float:
        raise NotImplementedError

    def effect_distance(self, e) -> float:
        return 0.0

    def state_membership(self, rho) -> MembershipReport:
        return MembershipReport.from_distance(self.state_distance(self._check(rho)))

    def effect_membership(self, e) -> MembershipReport:
        return MembershipReport.from_distance(self.effect_distance(self._check(e)))

    # see-saw half steps -------------------------------------------------
    def optimal_state(self, op) -> np.ndarray:
        raise NotImplementedError

    def optimal_instrument(self, coeffs) -> list[np.ndarray]:
        coeffs = [self._check(c) for c in coeffs]
        if self.measurements == "rank_one":
            return projective_ascent(coeffs, fixed_assignment=True, real=self.real_measurements)
        if len(coeffs) == 2:
            return two_outcome_optimum(coeffs[0], coeffs[1], real=self.real_measurements)
        return projective_ascent(coeffs, real=self.real_measurements)

    # parametrizations ---------------------------------------------------
    def n_state_params(self) -> int:
        raise NotImplementedError

    def state_from_params(self, theta) -> np.ndarray:
        raise NotImplementedError

    def n_instrument_params(self, n_outcomes: int) -> int:
        if self.measurements == "rank_one":
            return 2 * self.dim**2
        return n_outcomes * 2 * self.dim**2

    def instrument_from_params(self, theta, n_outcomes: int) -> list[np.ndarray]:
        d = self.dim
        theta = np.asarray(theta, dtype=float)
        if self.measurements == "rank_one":
            if n_outcomes != d:
                raise InvalidInputError(f"rank-one projective measurements have {d} outcomes")
            q, _ = np.linalg.qr(_complex_block(theta, d) + 1e-12 * np.eye(d))
            return [proj(q[:, i]) for i in range(d)]
        if self.measurements == "projective":
            raise InvalidInputError(f"{self.name}: no smooth parametrization for projective measurements")
        n = 2 * d * d
        return _normalized_povm([_complex_block(theta[j * n : (j + 1) * n], d) for j in range(n_outcomes)])

    def states_from_params(self, thetas) -> np.ndarray:
        """Batched :meth:`state_from_params` over the rows of ``thetas``."""
        return np.array([self.state_from_params(t) for t in thetas])

    def instruments_from_params(self, thetas, n_outcomes: int) -> np.ndarray:
        return np.array([self.instrument_from_params(t, n_outcomes) for t in thetas])

    def sample_state(self, rng: np.random.Generator) -> np.ndarray:
        return self.state_from_params(rng.uniform(-np.pi, np.pi, self.n_state_params()))

    def sample_instrument(self, rng: np.random.Generator, n_outcomes: int) -> list[np.ndarray]:
        return self.instrument_from_params(rng.uniform(-np.pi, np.pi, self.n_instrument_params(n_outcomes)), n_outcomes)


class QuantumSet(FreeSet):
    """All states and measurements of dimension d (no restriction).

    ``measurements`` narrows the measurement side: ``"general"`` (any
    POVM), ``"projective"``, or ``"rank_one"`` (d-outcome measurements onto
    an orthonormal basis).
    """

    def __init__(self, d: int, measurements: str = "general"):
        self.dim = _check_dim(d)
        if measurements not in ("general", "projective", "rank_one"):
            raise InvalidInputError(f"unknown measurement class {measurements!r}")
        self.measurements = measurements
        self.name = "quantum" if measurements == "general" else f"quantum-{measurements}"
        basis = tuple(independent_projector_basis(self.dim))
        self.state_basis = basis
        self.effect_basis = basis

    def state_distance(self, rho) -> float:
        return 0.0

    def optimal_state(self, op) -> np.ndarray:
        w, v = np.linalg.eigh(_herm(self._check(op)))
        return proj(fix_phase(v[:, -1]))

    def n_state_params(self) -> int:
        return 2 * self.dim**2

    def state_from_params(self, theta) -> np.ndarray:
        return _density_from_block(_complex_block(theta, self.dim))


class Incoherent(FreeSet):
    """Diagonal states; instruments whose effects are diagonal in the computational basis."""

    def __init__(self, d: int, name: str = "incoherent"):
        self.dim = _check_dim(d)
        self.name = name
        basis = tuple(proj(ket(i, self.dim)) for i in range(self.dim))
        self.state_basis = basis
        self.effect_basis = basis
        self.extremal_states = basis

    @staticmethod
    def _offdiag(m) -> float:
        off = m - np.diag(np.diag(m))
        return float(np.abs(off).max()) if off.size else 0.0

    def state_distance(self, rho) -> float:
        return self._offdiag(rho)

    def effect_distance(self, e) -> float:
        return self._offdiag(e)

    def optimal_state(self, op) -> np.ndarray:
        i = int(np.argmax(np.real(np.diag(self._check(op)))))
        return proj(ket(i, self.dim))

    def optimal_instrument(self, coeffs) -> list[np.ndarray]:
        return diagonal_optimum([self._check(c) for c in coeffs])

    def n_state_params(self) -> int:
        return self.dim

    def state_from_params(self, theta) -> np.ndarray:
        return np.diag(_simplex(theta)).astype(complex)

    def n_instrument_params(self, n_outcomes: int) -> int:
        return n_outcomes * self.dim

    def instrument_from_params(self, theta, n_outcomes: int) -> list[np.ndarray]:
        w = np.asarray(theta, dtype=float).reshape(n_outcomes, self.dim) ** 2
        tot = w.sum(axis=0)
        w = np.where(tot > 1e-300, w / np.where(tot > 1e-300, tot, 1.0), 1.0 / n_outcomes)
        effects = [np.diag(w[j]).astype(complex) for j in range(n_outcomes - 1)]
        effects.append(np.eye(self.dim, dtype=complex) - sum(effects))
        return effects


class RealStates(FreeSet):
    """Qubit imaginarity theory: real density matrices and real effects.

    ``measurements="projective"`` restricts the effects further to real
    projective measurements.
    """

    real_measurements = True

    def __init__(self, d: int = 2, measurements: str = "general"):
        if d != 2:
            raise UnsupportedDimensionError("the real-state free set is implemented for qubits only (d=2)")
        if measurements not in ("general", "projective"):
            raise InvalidInputError(f"unknown measurement class {measurements!r}")
        self.dim = 2
        self.measurements = measurements
        self.name = "real" if measurements == "general" else "real-projective"
        basis = (proj(ket(0)), proj(ket(1)), proj(named_state("plus")))
        self.state_basis = basis
        self.effect_basis = basis

    def state_distance(self, rho) -> float:
        return float(np.abs(np.asarray(rho).imag).max())

    def effect_distance(self, e) -> float:
        return float(np.abs(np.asarray(e).imag).max())

    def optimal_state(self, op) -> np.ndarray:
        w, v = np.linalg.eigh(_herm(self._check(op)).real)
        return proj(fix_phase(v[:, -1].astype(complex)))

    def n_state_params(self) -> int:
        return 2

    def state_from_params(self, theta) -> np.ndarray:
        # Bloch disk in the x-z plane: angle, radius sin^2(s)
        ang, s = float(theta[0]), float(theta[1])
        r = np.sin(s) ** 2
        return (_I2 + r * (np.sin(ang) * _SX + np.cos(ang) * _SZ)) / 2

    def states_from_params(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        r = np.sin(thetas[:, 1]) ** 2
        rx, rz = r * np.sin(thetas[:, 0]), r * np.cos(thetas[:, 0])
        out = np.empty((len(thetas), 2, 2), dtype=complex)
        out[:, 0, 0], out[:, 1, 1] = (1 + rz) / 2, (1 - rz) / 2
        out[:, 0, 1] = out[:, 1, 0] = rx / 2
        return out

    def instruments_from_params(self, thetas, n_outcomes: int) -> np.ndarray:
        if n_outcomes != 2:
            return super().instruments_from_params(thetas, n_outcomes)
        thetas = np.asarray(thetas, dtype=float)
        ang = thetas[:, 0]
        if self.measurements == "projective":
            a, b = np.ones(len(thetas)), np.zeros(len(thetas))
        else:
            a, b = np.sin(thetas[:, 1]) ** 2, np.sin(thetas[:, 2]) ** 2
        # a |n><n| + b (1 - |n><n|) with Bloch direction n = (sin ang, 0, cos ang)
        mean, half = (a + b) / 2, (a - b) / 2
        out = np.empty((len(thetas), 2, 2, 2), dtype=complex)
        out[:, 0, 0, 0] = mean + half * np.cos(ang)
        out[:, 0, 1, 1] = mean - half * np.cos(ang)
        out[:, 0, 0, 1] = out[:, 0, 1, 0] = half * np.sin(ang)
        out[:, 1] = np.eye(2) - out[:, 0]
        return out

    def n_instrument_params(self, n_outcomes: int) -> int:
        if n_outcomes == 2:
            return 1 if self.measurements == "projective" else 3
        if self.measurements == "projective":
            raise InvalidInputError("real projective qubit measurements have at most 2 outcomes")
        return n_outcomes * 4

    def instrument_from_params(self, theta, n_outcomes: int) -> list[np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        if n_outcomes == 2:
            ang = theta[0]
            top = (_I2 + np.sin(ang) * _SX + np.cos(ang) * _SZ) / 2
            if self.measurements == "projective":
                a, b = 1.0, 0.0
            else:
                a, b = np.sin(theta[1]) ** 2, np.sin(theta[2]) ** 2
            e0 = a * top + b * (_I2 - top)
            return [e0, _I2 - e0]
        return _normalized_povm([theta[4 * j : 4 * j + 4].reshape(2, 2).astype(complex) for j in range(n_outcomes)])


class StabilizerQubit(FreeSet):
    """Convex hull of the six single-qubit stabilizer states; measurements unrestricted."""

    def __init__(self):
        self.dim = 2
        self.name = "stabilizer"
        kets = [named_state(n) for n in ("0", "1", "plus", "minus", "plus_y", "minus_y")]
        self.extremal_states = tuple(proj(k) for k in kets)
        v = self.extremal_states
        # |0>, |1>, |+>, |+y> span all 2x2 Hermitian operators
        self.state_basis = (v[0], v[1], v[2], v[4])
        self.effect_basis = tuple(independent_projector_basis(2))

    def state_distance(self, rho) -> float:
        return polytope_distance(rho, self.extremal_states)

    def optimal_state(self, op) -> np.ndarray:
        op = self._check(op)
        scores = [np.real(np.trace(v @ op)) for v in self.extremal_states]
        return self.extremal_states[int(np.argmax(scores))].copy()

    def n_state_params(self) -> int:
        return 6

    def state_from_params(self, theta) -> np.ndarray:
        w = _simplex(theta)
        return sum(wi * v for wi, v in zip(w, self.extremal_states))


class MaximallyMixed(FreeSet):
    """Purity theory: the single free state 1/d; measurements unrestricted."""

    def __init__(self, d: int):
        self.dim = _check_dim(d)
        self.name = "maximally-mixed"
        self.state_basis = (np.eye(self.dim, dtype=complex) / self.dim,)
        self.effect_basis = tuple(independent_projector_basis(self.dim))
        self.extremal_states = self.state_basis

    def state_distance(self, rho) -> float:
        return float(np.abs(np.asarray(rho) - np.eye(self.dim) / self.dim).max())

    def optimal_state(self, op) -> np.ndarray:
        return np.eye(self.dim, dtype=complex) / self.dim

    def n_state_params(self) -> int:
        return 0

    def state_from_params(self, theta) -> np.ndarray:
        return np.eye(self.dim, dtype=complex) / self.dim


def polytope_distance(rho, vertices) -> float:
    """Smallest max-entry deviation between ``rho`` and a mixture of ``vertices`` (LP)."""
    rho = np.asarray(rho, dtype=complex)
    nv = len(vertices)
    targets = np.concatenate([rho.real.ravel(), rho.imag.ravel()])
    cols = np.array([np.concatenate([v.real.ravel(), v.imag.ravel()]) for v in vertices]).T
    m = targets.size
    # variables: w_1..w_nv, t ; minimize t
    c = np.zeros(nv + 1)
    c[-1] = 1.0
    a_ub = np.block([[cols, -np.ones((m, 1))], [-cols, -np.ones((m, 1))]])
    b_ub = np.concatenate([targets, -targets])
    a_eq = np.concatenate([np.ones(nv), [0.0]])[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=[(0, None)] * (nv + 1), method="highs")
    if not res.success:
        raise RuntimeError(f"polytope membership LP failed: {res.message}")
    return float(res.x[-1])


# ---------------------------------------------------------------- constructors and registry


def incoherent(d: int) -> Incoherent:
    return Incoherent(d)


def real_states(d: int = 2, measurements: str = "general") -> RealStates:
    return RealStates(d, measurements)


def stabilizer_qubit() -> StabilizerQubit:
    return StabilizerQubit()


def maximally_mixed(d: int) -> MaximallyMixed:
    return MaximallyMixed(d)


def quantum(d: int, measurements: str = "general") -> QuantumSet:
    return QuantumSet(d, measurements)


def membership(spec: FreeSet, m, kind: str = "state") -> MembershipReport:
    """Check whether ``m`` is a free state (``kind="state"``) or free effect (``kind="effect"``)."""
    if kind == "state":
        return spec.state_membership(m)
    if kind == "effect":
        return spec.effect_membership(m)
    raise InvalidInputError(f"kind must be 'state' or 'effect', not {kind!r}")


FREE_SET_NAMES = (
    "incoherent",
    "real",
    "real-projective",
    "stabilizer",
    "maximally-mixed",
    "asymmetry-d2",
    "athermality-d2",
)


def get_free_set(name: str, d: int | None = None) -> FreeSet:
    """Look up a free set by its command-line name."""
    if name == "incoherent":
        return Incoherent(2 if d is None else d)
    if name in ("asymmetry-d2", "athermality-d2"):
        if d not in (None, 2):
            raise UnsupportedDimensionError(f"{name} is only defined for d=2")
        return Incoherent(2, name=name)
    if name == "real":
        return RealStates(2 if d is None else d)
    if name == "real-projective":
        return RealStates(2 if d is None else d, measurements="projective")
    if name == "stabilizer":
        if d not in (None, 2):
            raise UnsupportedDimensionError("the stabilizer free set is implemented for qubits only")
        return StabilizerQubit()
    if name == "maximally-mixed":
        return MaximallyMixed(2 if d is None else d)
    raise InvalidInputError(f"unknown free set {name!r}; known: {', '.join(FREE_SET_NAMES)}")

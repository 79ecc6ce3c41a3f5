"""Numerical certification of free bounds.

Every routine here *exhibits* a free realization, so the value it returns
is a lower bound on the true maximum over the free set. Agreement with an
analytic bound is evidence, not proof.

Search strategies
-----------------
SEESAW
    Alternate exact half-steps for linear witnesses: optimal instruments for
    fixed states, then optimal states for fixed instruments.
NELDER_MEAD
    Derivative-free simplex search over the joint state/instrument
    parametrization; the only option for nonlinear witnesses.
HYBRID
    Nelder-Mead over state parameters with instruments optimized exactly
    inside the objective, followed by a see-saw polish (linear witnesses;
    falls back to NELDER_MEAD otherwise).
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import InvalidInputError, UnsupportedDimensionError
from .freesets import FreeSet, QuantumSet, quantum
from .qmath import ket, proj
from .scenario import CorrelationTable, OperationBox, PreparationBox, simulate
from .witnesses import WitnessSpec, coherence_qudit

__all__ = [
    "Constrain",
    "InnerSearch",
    "OptimizationConfig",
    "CertifiedBound",
    "certify_bound",
    "certify_qudit_coherence",
    "enumerate_vertex_bound",
    "estimate_gap",
    "GapEstimate",
    "gap_search",
]

log = logging.getLogger(__name__)

LOWER_BOUND_NOTE = "value is attained by an explicit free realization: a lower bound on the true free maximum"


class Constrain(str, enum.Enum):
    STATES_ONLY = "STATES_ONLY"
    OPERATIONS_ONLY = "OPERATIONS_ONLY"
    BOTH = "BOTH"


class InnerSearch(str, enum.Enum):
    SEESAW = "SEESAW"
    NELDER_MEAD = "NELDER_MEAD"
    HYBRID = "HYBRID"


@dataclass(frozen=True)
class OptimizationConfig:
    restarts: int = 200
    max_seesaw_rounds: int = 500
    convergence_tol: float = 1e-9
    seed: int = 0
    inner_search: InnerSearch = InnerSearch.SEESAW
    nm_maxfev: int = 6000
    agree_tol: float = 1e-6

    def __post_init__(self):
        if self.restarts < 1 or self.max_seesaw_rounds < 1 or self.nm_maxfev < 1:
            raise InvalidInputError("restarts, max_seesaw_rounds and nm_maxfev must be positive")
        if not self.convergence_tol > 0:
            raise InvalidInputError("convergence_tol must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "inner_search", InnerSearch(self.inner_search))
        object.__setattr__(self, "seed", int(self.seed))

    def rngs(self) -> list[np.random.Generator]:
        # child i depends only on (seed, i): more restarts extend, never reshuffle
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(self.restarts)]


@dataclass(frozen=True)
class CertifiedBound:
    value: float
    argmax_states: list = field(repr=False)
    argmax_effects: OperationBox = field(repr=False)
    restarts_agreeing: int
    config_used: OptimizationConfig
    restart_values: tuple[float, ...] = field(default=(), repr=False)
    non_converged: int = 0
    method: str = "seesaw"
    constrain: Constrain = Constrain.BOTH
    note: str = LOWER_BOUND_NOTE

    @property
    def argmax_prep(self) -> PreparationBox:
        return PreparationBox(self.argmax_states)

    def table(self) -> CorrelationTable:
        return simulate(self.argmax_prep, self.argmax_effects)


# ------------------------------------------------------------------ helpers


def _sides(spec: WitnessSpec, free: FreeSet, constrain: Constrain) -> tuple[FreeSet, FreeSet]:
    d = free.dim
    if spec.reference_prep is not None and spec.dim != d:
        raise InvalidInputError(f"witness {spec.name!r} lives in d={spec.dim}, free set {free.name!r} in d={d}")
    state_side = free if constrain in (Constrain.STATES_ONLY, Constrain.BOTH) else quantum(d)
    if constrain in (Constrain.OPERATIONS_ONLY, Constrain.BOTH) and free.effects_rank_testable:
        effect_side = free
    else:
        # free set does not restrict measurements: the witness's own measurement class applies
        effect_side = quantum(d, spec.measurement_class)
    return state_side, effect_side


def _instrument_coeffs(coeffs, rhos):
    return np.einsum("yxj,yab->xjab", coeffs, rhos)


def _state_coeffs(coeffs, effects):
    return np.einsum("yxj,xjab->yab", coeffs, effects)


def _linear_value(coeffs, offset, rhos, effects):
    return float(np.einsum("yxj,xjab,yba->", coeffs, effects, rhos).real) + offset


def _best_effects(effect_side, coeffs, rhos):
    cop = _instrument_coeffs(coeffs, rhos)
    return np.array([effect_side.optimal_instrument(list(cop[x])) for x in range(cop.shape[0])])


def _best_states(state_side, coeffs, effects):
    dop = _state_coeffs(coeffs, effects)
    return np.array([state_side.optimal_state(dop[y]) for y in range(dop.shape[0])])


def _seesaw(spec, state_side, effect_side, rhos, cfg):
    coeffs, offset = spec.coefficients, spec.offset
    prev = -np.inf
    converged = False
    history = []
    effects = None
    for _ in range(cfg.max_seesaw_rounds):
        effects = _best_effects(effect_side, coeffs, rhos)
        rhos = _best_states(state_side, coeffs, effects)
        val = _linear_value(coeffs, offset, rhos, effects)
        if val < prev - 1e-9:
            raise RuntimeError(f"see-saw decreased the objective: {prev!r} -> {val!r}")
        history.append(val)
        if val - prev < cfg.convergence_tol:
            converged = True
            break
        prev = val
    return rhos, effects, converged, history


def _nelder_mead(spec, state_side, effect_side, rng, cfg):
    ny, nx, nj = spec.shape
    ns, ne = state_side.n_state_params(), effect_side.n_instrument_params(nj)
    cut = ns * ny

    def build(theta):
        rhos = state_side.states_from_params(theta[:cut].reshape(ny, ns))
        effects = effect_side.instruments_from_params(theta[cut:].reshape(nx, ne), nj)
        return rhos, effects

    def objective(theta):
        rhos, effects = build(theta)
        probs = np.einsum("xjab,yba->yxj", effects, rhos).real
        return -spec.value(probs)

    x0 = rng.uniform(-np.pi, np.pi, cut + ne * nx)
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxfev": cfg.nm_maxfev, "xatol": 1e-10, "fatol": 1e-12, "adaptive": True})
    rhos, effects = build(res.x)
    return rhos, effects, _nm_converged(res, cfg)


def _nm_converged(res, cfg) -> bool:
    # flat directions of the parametrization can stall xatol; a collapsed simplex in value still counts
    fvals = res.final_simplex[1]
    return bool(res.success) or float(fvals.max() - fvals.min()) <= cfg.convergence_tol


def _hybrid(spec, state_side, effect_side, rng, cfg):
    ny = spec.shape[0]
    n = state_side.n_state_params()
    coeffs, offset = spec.coefficients, spec.offset

    def states(theta):
        return state_side.states_from_params(theta.reshape(ny, n))

    def objective(theta):
        rhos = states(theta)
        return -_linear_value(coeffs, offset, rhos, _best_effects(effect_side, coeffs, rhos))

    x0 = rng.uniform(-np.pi, np.pi, n * ny)
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxfev": cfg.nm_maxfev, "xatol": 1e-10, "fatol": 1e-12, "adaptive": True})
    rhos, effects, conv, _ = _seesaw(spec, state_side, effect_side, states(res.x), cfg)
    return rhos, effects, conv and _nm_converged(res, cfg)


def _to_boxes(rhos, effects):
    return list(rhos), OperationBox([list(e) for e in effects])


def _summarize(values, cfg):
    values = np.asarray(values)
    best = float(values.max())
    return best, int(np.count_nonzero(values >= best - cfg.agree_tol))


# ------------------------------------------------------------------ certification


def certify_bound(spec: WitnessSpec, free: FreeSet, constrain: Constrain | str = Constrain.BOTH,
                  cfg: OptimizationConfig | None = None) -> CertifiedBound:
    """Maximize ``spec`` over realizations whose constrained side lies in ``free``.

    The unconstrained side ranges over all d-dimensional states or over the
    witness's measurement class. Returns the best value over all restarts.
    """
    cfg = cfg or OptimizationConfig()
    constrain = Constrain(constrain.upper() if isinstance(constrain, str) else constrain)
    state_side, effect_side = _sides(spec, free, constrain)
    search = cfg.inner_search
    if not spec.is_linear and search is not InnerSearch.NELDER_MEAD:
        search = InnerSearch.NELDER_MEAD
    ny = spec.shape[0]

    best = None
    values = []
    non_converged = 0
    for rng in cfg.rngs():
        if search is InnerSearch.SEESAW:
            rhos0 = np.array([state_side.sample_state(rng) for _ in range(ny)])
            rhos, effects, conv, _ = _seesaw(spec, state_side, effect_side, rhos0, cfg)
        elif search is InnerSearch.HYBRID:
            rhos, effects, conv = _hybrid(spec, state_side, effect_side, rng, cfg)
        else:
            rhos, effects, conv = _nelder_mead(spec, state_side, effect_side, rng, cfg)
        states, ops = _to_boxes(rhos, effects)
        val = spec.value(simulate(PreparationBox(states), ops).probs)
        values.append(val)
        non_converged += not conv
        if best is None or val > best[0]:
            best = (val, states, ops)
    value, agreeing = _summarize(values, cfg)
    if non_converged:
        log.info("%d of %d restarts did not converge", non_converged, cfg.restarts)
    return CertifiedBound(
        value=value,
        argmax_states=best[1],
        argmax_effects=best[2],
        restarts_agreeing=agreeing,
        config_used=replace(cfg, inner_search=search),
        restart_values=tuple(values),
        non_converged=non_converged,
        method=search.value.lower(),
        constrain=constrain,
    )


def enumerate_vertex_bound(spec: WitnessSpec, free: FreeSet, cfg: OptimizationConfig | None = None,
                           constrain: Constrain | str = Constrain.STATES_ONLY) -> CertifiedBound:
    """Exact maximum of a linear witness over a polytope of free states.

    For fixed instruments the objective is linear in each state, so the
    maximum sits at vertices; every vertex assignment is tried with
    measurements optimized exactly (exact for two-outcome instruments).
    """
    cfg = cfg or OptimizationConfig(restarts=1)
    if not spec.is_linear:
        raise InvalidInputError("vertex enumeration needs a linear witness")
    if free.extremal_states is None:
        raise InvalidInputError(f"free set {free.name!r} is not a polytope with listed vertices")
    constrain = Constrain(constrain.upper() if isinstance(constrain, str) else constrain)
    _, effect_side = _sides(spec, free, constrain)
    coeffs, offset = spec.coefficients, spec.offset
    ny = coeffs.shape[0]
    verts = np.array(free.extremal_states)
    active = [y for y in range(ny) if np.any(coeffs[y])]
    values, best = [], None
    for choice in itertools.product(range(len(verts)), repeat=len(active)):
        rhos = np.array([verts[0]] * ny)
        for y, v in zip(active, choice):
            rhos[y] = verts[v]
        effects = _best_effects(effect_side, coeffs, rhos)
        val = _linear_value(coeffs, offset, rhos, effects)
        values.append(val)
        if best is None or val > best[0] + 1e-15:
            best = (val, rhos, effects)
    states, ops = _to_boxes(best[1], best[2])
    value, agreeing = _summarize(values, cfg)
    return CertifiedBound(
        value=spec.value(simulate(PreparationBox(states), ops).probs),
        argmax_states=states,
        argmax_effects=ops,
        restarts_agreeing=agreeing,
        config_used=cfg,
        restart_values=tuple(values),
        method="vertex-enumeration",
        constrain=constrain,
        note="exact maximum over vertex assignments with optimal measurements",
    )


def _assignment_table(d: int, mode: str) -> np.ndarray:
    if mode == "all":
        funcs = itertools.product(range(d), repeat=d)
    elif mode == "permutations":
        funcs = itertools.permutations(range(d))
    else:
        raise InvalidInputError(f"assignments must be 'all' or 'permutations', not {mode!r}")
    funcs = np.array(list(funcs), dtype=int)
    onehot = np.zeros((len(funcs), d, d))
    onehot[np.arange(len(funcs))[:, None], np.arange(d)[None, :], funcs] = 1.0
    return funcs, onehot


def certify_qudit_coherence(d: int, cfg: OptimizationConfig | None = None,
                            assignments: str | None = None) -> CertifiedBound:
    """Free bound of the random-access-code coherence witness by enumeration.

    Extremal incoherent measurements send each basis index i to one outcome,
    so outcome y0 of x=0 is ``sum_{f(i)=y0} |i><i|`` and likewise for x=1
    with g. For fixed (f, g) the best state for preparation (y0, y1) is the
    top eigenvector of ``A_y0 + B_y1`` (a basis state), giving
    ``sum_{y0,y1} ||A_y0 + B_y1||``. ``assignments="all"`` enumerates every
    map f, g (default for d <= 4); ``"permutations"`` only relabelings.
    """
    if not 2 <= d <= 5:
        raise UnsupportedDimensionError(f"qudit coherence enumeration supports 2 <= d <= 5, got {d}")
    cfg = cfg or OptimizationConfig(restarts=1)
    mode = assignments or ("all" if d <= 4 else "permutations")
    funcs, onehot = _assignment_table(d, mode)
    nf = len(funcs)
    # norms[a, b] = sum_{y0,y1} max_i (F_a[i,y0] + F_b[i,y1])
    norms = np.empty((nf, nf))
    for a in range(nf):
        s = onehot[a][None, :, :, None] + onehot[:, :, None, :]  # (b, i, y0, y1)
        norms[a] = s.max(axis=1).sum(axis=(1, 2))
    best = float(norms.max())
    agreeing = int(np.count_nonzero(norms >= best - cfg.agree_tol))
    a, b = np.unravel_index(int(np.argmax(norms)), norms.shape)
    states = []
    for y0 in range(d):
        for y1 in range(d):
            i = int(np.argmax(onehot[a][:, y0] + onehot[b][:, y1]))
            states.append(proj(ket(i, d)))
    effects = [
        [np.diag(onehot[a][:, y]).astype(complex) for y in range(d)],
        [np.diag(onehot[b][:, y]).astype(complex) for y in range(d)],
    ]
    ops = OperationBox(effects)
    spec = coherence_qudit(d)
    value = spec.value(simulate(PreparationBox(states), ops).probs)
    return CertifiedBound(
        value=value,
        argmax_states=states,
        argmax_effects=ops,
        restarts_agreeing=agreeing,
        config_used=cfg,
        restart_values=tuple(norms.ravel().tolist()),
        method=f"assignment-enumeration ({mode}, {nf}x{nf} pairs)",
        constrain=Constrain.BOTH,
        note="exact maximum over extremal incoherent measurements with optimal states",
    )


# ------------------------------------------------------------------ l1 gap for the generic witness


@dataclass(frozen=True)
class GapEstimate:
    value: float
    states: list = field(repr=False)
    effects: list = field(repr=False)
    restart_values: tuple[float, ...] = field(default=(), repr=False)
    non_converged: int = 0


def _l1_fit(a: np.ndarray, m: np.ndarray, bounds, simplex: bool):
    """min_z sum_r |a[r] . z - m[r]| with z in a box (and optionally on the simplex)."""
    nr, nz = a.shape
    c = np.concatenate([np.zeros(nz), np.ones(nr)])
    a_ub = np.block([[a, -np.eye(nr)], [-a, -np.eye(nr)]])
    b_ub = np.concatenate([m, -m])
    a_eq = b_eq = None
    if simplex:
        a_eq = np.concatenate([np.ones(nz), np.zeros(nr)])[None, :]
        b_eq = [1.0]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=list(bounds) + [(0, None)] * nr, method="highs")
    if not res.success:
        raise RuntimeError(f"l1 fit LP failed: {res.message}")
    return res.x[:nz], float(res.fun)


class _EffectL1SDP:
    """Compiled SDP  min_E sum_y |Tr(E sigma_y) - m_y|  s.t.  0 <= E <= 1.

    E is expanded in a real basis of Hermitian operators so the states enter
    only through a parameter matrix and the problem is compiled once.
    """

    def __init__(self, d: int, ny: int):
        import cvxpy as cp

        self._cp = cp
        basis = []
        for i in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[i, i] = 1
            basis.append(m)
        for i in range(d):
            for k in range(i + 1, d):
                m = np.zeros((d, d), dtype=complex)
                m[i, k] = m[k, i] = 1
                basis.append(m)
                m = np.zeros((d, d), dtype=complex)
                m[i, k], m[k, i] = -1j, 1j
                basis.append(m)
        self.basis = np.array(basis)
        self.z = cp.Variable(d * d)
        self.a = cp.Parameter((ny, d * d))
        self.m = cp.Parameter(ny)
        e = sum(self.z[k] * self.basis[k] for k in range(d * d))
        cons = [e >> 0, np.eye(d) - e >> 0]
        self.problem = cp.Problem(cp.Minimize(cp.norm1(self.a @ self.z - self.m)), cons)

    def solve(self, sigmas, m):
        self.a.value = np.real(np.einsum("kab,yba->yk", self.basis, sigmas))
        self.m.value = np.asarray(m, dtype=float)
        self.problem.solve(solver=self._cp.CLARABEL)
        e = np.einsum("k,kab->ab", self.z.value, self.basis)
        w, v = np.linalg.eigh((e + e.conj().T) / 2)
        return (v * np.clip(w, 0, 1)) @ v.conj().T


def gap_search(p_ref: CorrelationTable, free: FreeSet, cfg: OptimizationConfig | None = None) -> GapEstimate:
    """Alternating l1 fit of ``p_ref(0|x,y)`` by free states and arbitrary effects.

    Free states are mixtures ``sum_v q[y,v] V_v`` of the free set's vertices;
    the state step and (for diagonal vertices) the effect step are linear
    programs, otherwise the effect step is a small SDP. Each step solves its
    half-problem exactly, so the l1 distance never increases.
    """
    cfg = cfg or OptimizationConfig(restarts=50)
    if free.extremal_states is None:
        raise InvalidInputError(f"gap estimation needs a free set with listed extremal states, not {free.name!r}")
    m = np.asarray(p_ref.probs[:, :, 0], dtype=float)
    ny, nx = m.shape
    verts = np.array(free.extremal_states)
    nv, d = len(verts), free.dim
    diagonal = all(np.abs(v - np.diag(np.diag(v))).max() < 1e-15 for v in verts)
    vdiag = np.array([np.real(np.diag(v)) for v in verts])  # (nv, d)

    sdp = None if diagonal else _EffectL1SDP(d, ny)
    best, values, non_conv = None, [], 0
    for rng in cfg.rngs():
        q = rng.dirichlet(np.ones(nv), size=ny)
        prev = np.inf
        conv = False
        for _ in range(cfg.max_seesaw_rounds):
            sig = np.einsum("yv,vab->yab", q, verts)
            effects = []
            for x in range(nx):
                if diagonal:
                    e, _ = _l1_fit(q @ vdiag, m[:, x], [(0, 1)] * d, simplex=False)
                    effects.append(np.diag(e).astype(complex))
                else:
                    effects.append(sdp.solve(sig, m[:, x]))
            t = np.array([[np.real(np.trace(e @ v)) for e in effects] for v in verts])  # (nv, nx)
            total = 0.0
            for y in range(ny):
                q[y], cost = _l1_fit(t.T, m[y], [(0, 1)] * nv, simplex=True)
                total += cost
            q = np.clip(q, 0, None)
            q /= q.sum(axis=1, keepdims=True)
            if prev - total < cfg.convergence_tol:
                conv = True
                prev = min(prev, total)
                break
            prev = total
        values.append(-prev)
        non_conv += not conv
        if best is None or -prev > best[0]:
            states = list(np.einsum("yv,vab->yab", q, verts))
            best = (-prev, states, effects)
    return GapEstimate(value=float(max(values)), states=best[1], effects=best[2],
                       restart_values=tuple(values), non_converged=non_conv)


def estimate_gap(p_ref: CorrelationTable, free: FreeSet, cfg: OptimizationConfig | None = None) -> float:
    """Best ``-sum |p(0|x,y) - p_ref(0|x,y)|`` found over free realizations.

    Strictly negative when ``p_ref`` lies outside the free-simulable set;
    its magnitude is a suitable margin for the generic witness.
    """
    return gap_search(p_ref, free, cfg).value

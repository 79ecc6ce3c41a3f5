"""Rank-based detection of resourceful preparations or operations.

Outcome-j probabilities arranged as a matrix ``M[y, x] = p(j|x,y)`` factor
through the span of the states (and of the effects). A free set whose
extremal basis has N elements can only produce matrices of rank <= N, so a
numerical rank above N certifies a resource as long as N < d**2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .qmath import _check_dim, independent_projector_basis
from .scenario import CorrelationTable, OperationBox, PreparationBox

__all__ = [
    "DetectionMode",
    "DetectionVerdict",
    "Detection",
    "build_state_test_matrix",
    "build_operation_test_matrix",
    "singular_values",
    "numerical_rank",
    "detect",
    "state_test_construction",
    "operation_test_construction",
]


class DetectionMode(str, enum.Enum):
    STATES = "STATES"
    OPERATIONS = "OPERATIONS"
    BOTH = "BOTH"


class Detection(str, enum.Enum):
    RESOURCE_DETECTED = "RESOURCE_DETECTED"
    CONSISTENT_WITH_FREE = "CONSISTENT_WITH_FREE"


@dataclass(frozen=True)
class DetectionVerdict:
    rank: int
    budget_N: int
    tolerance_used: float
    verdict: Detection
    mode: DetectionMode
    singular_values: tuple[float, ...]
    hypothesis_violated: bool = False
    warnings: tuple[str, ...] = ()

    @property
    def detected(self) -> bool:
        return self.verdict is Detection.RESOURCE_DETECTED


def build_state_test_matrix(table: CorrelationTable, outcome: int = 0) -> np.ndarray:
    """Rows indexed by preparation y, columns by instrument x."""
    if not 0 <= outcome < table.num_j:
        raise InvalidInputError(f"outcome index {outcome} out of range 0..{table.num_j - 1}")
    return np.array(table.probs[:, :, outcome], dtype=float)


def build_operation_test_matrix(table: CorrelationTable, outcome: int = 0) -> np.ndarray:
    """Rows indexed by instrument x, columns by preparation y."""
    return build_state_test_matrix(table, outcome).T.copy()


def singular_values(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        raise InvalidInputError("empty matrix")
    return np.linalg.svd(m, compute_uv=False)


def numerical_rank(m, rel_tol: float = 1e-8) -> int:
    """Number of singular values above ``rel_tol * sigma_max`` (0 for the zero matrix)."""
    s = singular_values(m)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def detect(table: CorrelationTable, free, mode: DetectionMode | str = DetectionMode.STATES,
           rel_tol: float = 1e-8, outcome: int = 0) -> DetectionVerdict:
    """Compare the correlation-matrix rank with the free set's rank budget.

    STATES uses the free-state budget, OPERATIONS the free-effect budget and
    BOTH fires if either does. A budget of d**2 or more makes the test
    vacuous: the verdict is CONSISTENT_WITH_FREE with ``hypothesis_violated``.
    """
    mode = DetectionMode(mode.upper() if isinstance(mode, str) else mode)
    d = free.dim
    budgets = {
        DetectionMode.STATES: free.state_rank_budget,
        DetectionMode.OPERATIONS: free.effect_rank_budget,
    }
    if mode is DetectionMode.BOTH:
        active = [budgets[DetectionMode.STATES], budgets[DetectionMode.OPERATIONS]]
    else:
        active = [budgets[mode]]
    applicable = [n for n in active if n < d * d]
    matrix = (build_operation_test_matrix if mode is DetectionMode.OPERATIONS else build_state_test_matrix)(
        table, outcome
    )
    s = singular_values(matrix)
    rank = numerical_rank(matrix, rel_tol)
    warnings = []
    if not applicable:
        warnings.append(f"rank budget N={min(active)} >= d^2={d * d}: the rank test cannot detect this resource")
        budget = min(active)
        verdict = Detection.CONSISTENT_WITH_FREE
    else:
        if len(applicable) < len(active):
            warnings.append(f"one side has budget >= d^2={d * d} and is not tested")
        budget = min(applicable)
        verdict = Detection.RESOURCE_DETECTED if rank > budget else Detection.CONSISTENT_WITH_FREE
    if rank > d * d:
        warnings.append(f"rank {rank} exceeds d^2={d * d}: data incompatible with dimension {d}")
    return DetectionVerdict(
        rank=rank,
        budget_N=int(budget),
        tolerance_used=float(rel_tol),
        verdict=verdict,
        mode=mode,
        singular_values=tuple(float(v) for v in s),
        hypothesis_violated=not applicable,
        warnings=tuple(warnings),
    )


def _two_outcome(proj_ops):
    d = proj_ops[0].shape[0]
    return OperationBox([[p, np.eye(d) - p] for p in proj_ops])


def state_test_construction(d: int, n_states: int) -> tuple[PreparationBox, OperationBox]:
    """``n_states`` linearly independent pure states measured by d**2
    two-outcome instruments whose outcome-0 effects are linearly independent
    rank-one projectors. The outcome-0 matrix has rank ``n_states``."""
    d = _check_dim(d)
    basis = independent_projector_basis(d)
    if not 1 <= n_states <= d * d:
        raise InvalidInputError(f"n_states must be in 1..{d * d}")
    return PreparationBox(basis[:n_states]), _two_outcome(basis)


def operation_test_construction(d: int, n_instruments: int) -> tuple[PreparationBox, OperationBox]:
    """Transpose of :func:`state_test_construction`: d**2 states, ``n_instruments`` instruments."""
    d = _check_dim(d)
    basis = independent_projector_basis(d)
    if not 1 <= n_instruments <= d * d:
        raise InvalidInputError(f"n_instruments must be in 1..{d * d}")
    return PreparationBox(basis), _two_outcome(basis[:n_instruments])

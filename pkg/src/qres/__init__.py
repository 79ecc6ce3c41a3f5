"""Semi-device-independent detection of quantum resources in prepare-and-measure experiments."""

from .errors import (
    ContractViolationError,
    DataValidationError,
    InvalidDimensionError,
    InvalidInputError,
    NonConvergenceError,
    QresError,
    UnsupportedDimensionError,
)
from .freesets import FREE_SET_NAMES, FreeSet, get_free_set
from .optimizer import (
    CertifiedBound,
    Constrain,
    InnerSearch,
    OptimizationConfig,
    certify_bound,
    certify_qudit_coherence,
    enumerate_vertex_bound,
    estimate_gap,
    gap_search,
)
from .ranktest import Detection, DetectionMode, DetectionVerdict, detect, numerical_rank
from .scenario import CorrelationTable, OperationBox, PreparationBox, simulate, table_from_raw
from .witnesses import WITNESS_NAMES, Verdict, WitnessSpec, evaluate, generic_witness, get_witness

__version__ = "0.1.0"

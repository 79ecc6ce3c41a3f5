"""Exception hierarchy shared by the library and the command line front end."""


class QresError(Exception):
    """Base class for every error raised by qres."""

    exit_code = 1


class InvalidInputError(QresError, ValueError):
    """Malformed arguments: wrong shapes, indices out of range, bad names."""

    exit_code = 1


class InvalidDimensionError(InvalidInputError):
    pass


class UnsupportedDimensionError(InvalidInputError):
    pass


class DataValidationError(InvalidInputError):
    """Experimental data failed a consistency gate (e.g. normalization)."""

    exit_code = 1


class ContractViolationError(QresError):
    """A physical invariant was broken (non-Hermitian state, incomplete POVM, ...)."""

    exit_code = 2


class NonConvergenceError(QresError):
    exit_code = 3

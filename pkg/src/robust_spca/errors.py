"""Exception types raised across the package."""


class SpcaError(Exception):
    """Base class for all package errors."""


class InputError(SpcaError, ValueError):
    """Invalid argument: wrong shape, non-finite entries, out-of-range parameter."""


class DegenerateInputError(InputError):
    """Input is valid in form but degenerate (all-zero vector, zero matrix, ...)."""


class ConvergenceError(SpcaError):
    """An iterative method hit its iteration cap.

    The best iterate found is attached as ``best`` so callers may still use it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CapacityError(SpcaError):
    """Requested computation exceeds a size guard."""


class RegimeError(SpcaError):
    """Parameters fall outside the regime where a construction exists."""


class InfeasibleMomentsError(SpcaError):
    """Target moments admit no nonnegative symmetric measure."""


class FormatError(SpcaError):
    """Malformed or truncated file."""

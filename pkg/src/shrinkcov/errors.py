"""Exception types raised by the shrinkage library."""


class ShrinkageError(Exception):
    """Base class for all library errors."""


class InvalidInputError(ShrinkageError, ValueError):
    """Malformed data: wrong shape, non-finite entries, asymmetric matrix."""


class InvalidParameterError(ShrinkageError, ValueError):
    """A model or algorithm parameter is outside its admissible range."""


class DegenerateSampleError(ShrinkageError, ValueError):
    """The sample carries no usable scale (zero trace) or the dimension is 1."""


class MissingParameterError(ShrinkageError, ValueError):
    """A method was requested without an input it cannot do without."""


class SingularMatrixError(ShrinkageError, ArithmeticError):
    """A covariance estimate could not be factorized for a linear solve."""

    def __init__(self, message: str, estimator: str | None = None):
        super().__init__(message if estimator is None else f"{message} (estimator: {estimator})")
        self.estimator = estimator


class NonConvergenceError(ShrinkageError, RuntimeError):
    """An iteration that is guaranteed to converge did not within its budget."""

"""Exception types raised across the package."""


class SketchbalError(Exception):
    """Base class for all package errors."""


class DimensionError(SketchbalError, ValueError):
    """Operand shapes are incompatible or a size request is out of range."""


class InputError(SketchbalError, ValueError):
    """Input values violate a precondition (non-finite, not orthonormal, ...)."""


class ParameterError(SketchbalError, ValueError):
    """A tuning parameter is outside its admissible range."""


class RankError(SketchbalError, ArithmeticError):
    """A matrix is numerically rank deficient where full rank is required."""


class DivergenceError(SketchbalError, ArithmeticError):
    """An iteration produced non-finite values."""


class AggregationError(SketchbalError, ValueError):
    """Summary statistics were requested over an empty group."""

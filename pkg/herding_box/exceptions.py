"""
Custom exceptions for herding-box.
"""


class HerdingError(Exception):
    """Base class of all herding-box errors."""


class DimensionMismatchError(HerdingError, ValueError):
    pass


class StateSpaceError(HerdingError, ValueError):
    pass


class NonEnumerableError(HerdingError):
    pass


class MomentFeasibilityError(HerdingError, ValueError):
    pass


class PctViolationError(HerdingError):
    """Raised when an update vector v fails w^T v <= 0 under strict verification."""

    def __init__(self, message: str, step: int | None = None, inner_product: float | None = None) -> None:
        super().__init__(message)
        self.step = step
        self.inner_product = inner_product


class NonFiniteWeightError(HerdingError, ArithmeticError):
    pass


class MonotonicityError(HerdingError):
    """Raised when a local maximizer returns a state scoring below its initial state."""


class SingularBasisError(HerdingError, ValueError):
    pass


class DatasetParseError(HerdingError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigError(HerdingError, ValueError):
    pass

"""
Exception hierarchy shared by every pricing component.
"""

from typing import Optional


class PricerError(Exception):
    """Base class for all errors raised by the pricing engine."""


class ValidationError(PricerError, ValueError):
    """An input violates a type invariant or a configuration field is malformed."""

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class UsageError(PricerError, ValueError):
    """A command or sweep was requested in a way that cannot be honoured."""


class DomainError(PricerError, ValueError):
    """The inputs are valid but outside the mathematical domain of the operation."""


class ConvergenceError(PricerError, RuntimeError):
    """An iterative or quadrature routine failed to reach its target tolerance."""

    def __init__(self, message: str, achieved: float = float("nan"), required: float = 0.0):
        self.achieved = achieved
        self.required = required
        super().__init__(f"{message} (achieved {achieved:.3e}, required {required:.3e})")


class ConsistencyError(PricerError, RuntimeError):
    """An internal postcondition does not hold."""


class GridRangeError(PricerError, RuntimeError):
    """A quantity falls outside the discretisation range of the PIDE grid."""

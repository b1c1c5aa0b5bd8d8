"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ZengaError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(ZengaError, ValueError):
    """An input or an integrand value lies outside the admissible domain."""


class ConvergenceError(ZengaError, ArithmeticError):
    """An adaptive procedure stopped before reaching its tolerance.

    The best available estimate is kept on ``estimate`` so callers can decide
    whether it is good enough.
    """

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class UnboundedSupportError(ZengaError, ArithmeticError):
    """A monotone inversion could not bracket its target."""


class CapabilityError(ZengaError, TypeError):
    """A model lacks a capability the requested computation needs."""


class DegenerateDenominatorError(ZengaError, ArithmeticError):
    """A ratio has a zero (or non-positive) denominator."""


class ConditioningError(ZengaError, ArithmeticError):
    """A conditioning event has zero probability mass."""


class ConditioningEmptyError(ConditioningError):
    """An empirical tail subsample is empty (level too high for the sample)."""


class EmptySampleError(ZengaError, ValueError):
    """An estimator received no observations."""


class InversionError(ZengaError, ArithmeticError):
    """Recovering a curve from its Zenga transform hit an invalid denominator."""


class ValidationError(ZengaError, ValueError):
    """Input data failed validation. ``row`` is 1-based when known."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class CostWarning(UserWarning):
    """A requested computation is expected to be very slow."""

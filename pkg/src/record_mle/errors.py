"""Exception hierarchy shared by the estimation, analytic and simulation layers."""


class RecordMLEError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RecordMLEError, ValueError):
    """An argument lies outside the open support or a probability is not in (0, 1)."""


class ParameterError(RecordMLEError, ValueError):
    """theta is outside the member's parameter domain."""


class InversionError(RecordMLEError, ArithmeticError):
    """A value left the range of B (or A) and could not be inverted."""


class MomentNonexistenceError(RecordMLEError, ArithmeticError):
    """A negative gamma moment was requested at or past the Gamma pole."""


class SeriesUndefinedError(RecordMLEError, ArithmeticError):
    """A truncated series has no finite terms for the requested size."""


class DivergenceError(RecordMLEError, ArithmeticError):
    """An expectation integral does not converge."""


class ValidationError(RecordMLEError, ValueError):
    """A custom family member failed its numerical validation."""


class McRunError(RecordMLEError, RuntimeError):
    """Too many Monte Carlo replications failed."""

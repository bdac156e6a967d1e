"""Exception hierarchy shared across the package."""


class UnitalCapError(Exception):
    """Base class for all package errors."""


class ShapeError(UnitalCapError, ValueError):
    """Operand dimensions do not fit together."""


class DimensionLimitError(UnitalCapError, ValueError):
    """A materialized object would exceed the configured dimension guard."""


class InvariantError(UnitalCapError, ValueError):
    """An input violates a type invariant (CPTP, Hermitian, unit norm, ...)."""


class SupportError(UnitalCapError, ValueError):
    """An operator leaks outside the support of a weight operator."""


class ParameterError(UnitalCapError, ValueError):
    """A scalar parameter is out of its admissible range."""


class PreconditionError(UnitalCapError, ValueError):
    """An operation was called on an input outside its domain (e.g. non-unital)."""


class ExponentUndefinedError(PreconditionError):
    """The multiplicativity exponent is undefined because the 1-copy norm is 1."""

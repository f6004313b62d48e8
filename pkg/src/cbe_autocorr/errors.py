"""Exception types shared by all modules.

The CLI maps each class to a distinct exit code.
"""


class CBEError(Exception):
    """Base class for errors raised by this package."""

    code = "error"


class DomainError(CBEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    code = "domain"


class RangeError(CBEError, ValueError):
    """An argument lies outside the range where the implementation is certified."""

    code = "range"


class NumericError(CBEError, ArithmeticError):
    """A computation produced a non-finite intermediate value."""

    code = "numeric"

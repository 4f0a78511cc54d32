"""Exception and warning types raised across the package."""


class SparseTFDError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SparseTFDError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(SparseTFDError, ValueError):
    """A value lies outside the domain where an operation is defined."""


class NumericError(SparseTFDError, ArithmeticError):
    """A computation produced non-finite or inconsistent numbers."""


class TrackingError(SparseTFDError, RuntimeError):
    """Instantaneous-frequency tracking could not be initialised."""


class FormatError(SparseTFDError, ValueError):
    """An input file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericWarning(UserWarning):
    """Non-fatal numerical trouble, e.g. dense branch-cut flags."""

"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError (and its
ParseError subclass) -> 2, NumericError -> 3.
"""


class ConvmatchError(Exception):
    """Base class for all package errors."""


class ConfigError(ConvmatchError, ValueError):
    """Invalid configuration value or precondition violation."""


class DataError(ConvmatchError, ValueError):
    """Malformed or inconsistent input data."""


class ParseError(DataError):
    """Line-level parse failure; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class NumericError(ConvmatchError, ArithmeticError):
    """Non-finite value or other numeric failure during computation."""

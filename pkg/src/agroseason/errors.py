"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`AgroseasonError`. The CLI maps :class:`UsageError` to exit status 1
and every other subclass to exit status 2.
"""


class AgroseasonError(Exception):
    """Base class for all package errors."""


class UsageError(AgroseasonError, ValueError):
    """Invalid argument: unknown variable, bad bin edges, index out of range."""


class DataError(AgroseasonError, ValueError):
    """Input data violates a documented invariant."""


class ParseError(DataError):
    """Malformed CSV input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingValueError(DataError):
    """A computation that needs complete data met a missing value."""


class InsufficientDataError(DataError):
    """Too few observations for the requested statistic."""


class DegenerateSampleError(DataError):
    """Sample has zero variance."""


class ImputationError(DataError):
    """A (variable, day-of-year) pool has no observation at all."""


class MissingInputError(DataError):
    """Required meteorological inputs are missing for a computation."""

    def __init__(self, fields):
        self.fields = tuple(fields)
        super().__init__("missing required input(s): " + ", ".join(self.fields))


class ScopeError(DataError):
    """Within-season analysis requested for a year without a defined season."""

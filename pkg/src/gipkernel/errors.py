"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Array shapes, dimensions or argument values are inconsistent."""


class ModelValidationError(ValueError):
    """A robot description violates a physical constraint."""


class NumericalFailureError(RuntimeError):
    """A factorization failed even after the full jitter ladder.

    Attributes
    ----------
    jitters : list of float
        The jitter values that were tried, in order.
    """

    def __init__(self, message, jitters=()):
        super().__init__(message)
        self.jitters = list(jitters)


class ParseError(ValueError):
    """A data file is malformed. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UndefinedMetricError(ValueError):
    """A metric is not defined for the given data (e.g. zero variance)."""

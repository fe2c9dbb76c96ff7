"""Exception hierarchy shared by every module of the package."""


class KdeSamplingError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KdeSamplingError):
    """Bad configuration: missing column, unknown key, malformed value."""


class ParseError(KdeSamplingError):
    """A data file could not be parsed."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DataError(KdeSamplingError):
    """Data violates a precondition (single class, too few rows, ...)."""


class ShapeError(KdeSamplingError, ValueError):
    """Array dimensions do not match what the fitted object expects."""


class ArgumentError(KdeSamplingError, ValueError):
    """An argument is out of its legal range."""


class FitError(KdeSamplingError):
    """A model could not be fitted, e.g. singular covariance."""


class SearchError(KdeSamplingError):
    """Bandwidth search found no usable candidate."""


class MetricError(KdeSamplingError):
    """A metric is undefined for the given input."""


class TrainingError(KdeSamplingError):
    """Iterative training diverged."""


class GeneratorError(KdeSamplingError):
    """A synthetic data generator could not satisfy its spec."""


class LeakageError(KdeSamplingError):
    """The held-out partition changed between split and scoring."""

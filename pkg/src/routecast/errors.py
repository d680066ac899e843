"""Exception taxonomy.

Every error raised on purpose by this package derives from
:class:`RoutecastError`, so callers (and the CLI) can separate user-facing
failures from bugs.
"""

from __future__ import annotations


class RoutecastError(Exception):
    """Base class. ``series_id`` is filled in when the failure is tied to one series."""

    def __init__(self, message: str = "", series_id: str | None = None):
        self.series_id = series_id
        if series_id is not None:
            message = f"[{series_id}] {message}"
        super().__init__(message)

    def with_series(self, series_id: str) -> "RoutecastError":
        """Return a copy of this error tagged with ``series_id``."""
        if self.series_id is not None:
            return self
        err = type(self)(str(self), series_id=series_id)
        err.__cause__ = self
        return err


# ingestion / data model
class MissingColumn(RoutecastError):
    pass


class NonUniformSpacing(RoutecastError):
    pass


class NonFiniteValue(RoutecastError):
    pass


class DuplicateTimestamp(RoutecastError):
    pass


class HorizonTooLong(RoutecastError):
    pass


class DegenerateSeries(RoutecastError):
    pass


class DomainError(RoutecastError):
    pass


class UnknownDataset(RoutecastError):
    pass


# features / routing
class TooShort(RoutecastError):
    pass


class InvalidPeriod(RoutecastError):
    pass


class MismatchedIds(RoutecastError):
    pass


class CorpusTooSmall(RoutecastError):
    pass


class InvalidConfig(RoutecastError):
    pass


# forecasters
class HistoryTooShort(RoutecastError):
    pass


class InsufficientTraining(RoutecastError):
    pass


class SingularSystem(RoutecastError):
    pass


class FeatureStarvation(RoutecastError):
    pass


class Timeout(RoutecastError):
    pass


class MalformedResponse(RoutecastError):
    pass


class LengthMismatch(RoutecastError):
    pass


class NotFound(RoutecastError):
    pass


# evaluation / cost
class MissingForecast(RoutecastError):
    pass


class AlphaOutOfRange(RoutecastError):
    pass


class MissingModelResult(RoutecastError):
    pass


class CurveTooShort(RoutecastError):
    pass


class MissingEndpoints(RoutecastError):
    pass

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch, MalformedResponse
from ..series import HOURLY, Frequency, Series

GENERALIST = "generalist"
SPECIALIST = "specialist"


@dataclass(frozen=True, eq=False)
class ForecastRequest:
    """Context window handed to a forecaster.

    ``last_timestamp`` (step index or ``datetime64``) lets calendar-aware
    backends place the horizon in time; it is optional for the others.
    """

    series_id: str
    history: np.ndarray
    horizon: int
    frequency: Frequency = HOURLY
    last_timestamp: object = None

    def __post_init__(self):
        h = np.asarray(self.history, dtype=float)
        if h.ndim != 1 or h.size == 0:
            raise ValueError("history must be a non-empty 1-D sequence")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        h = h.copy()
        h.flags.writeable = False
        object.__setattr__(self, "history", h)


@dataclass(frozen=True, eq=False)
class ForecastResult:
    series_id: str
    values: np.ndarray
    model_name: str
    latency_micros: int
    warnings: tuple[str, ...] = ()
    service_latency_micros: int | None = None

    @property
    def horizon(self) -> int:
        return len(self.values)


def make_result(
    req: ForecastRequest,
    values,
    model_name: str,
    started_ns: int,
    warnings: tuple[str, ...] | list[str] = (),
) -> ForecastResult:
    """Validate length/finiteness and stamp latency measured from ``started_ns``."""
    elapsed = (time.perf_counter_ns() - started_ns) // 1000
    return ForecastResult(
        req.series_id,
        check_forecast(req, values),
        model_name,
        int(elapsed),
        tuple(warnings),
    )


def check_forecast(req: ForecastRequest, values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) != req.horizon:
        raise LengthMismatch(
            f"expected {req.horizon} forecast values, got {v.size}", series_id=req.series_id
        )
    if not np.all(np.isfinite(v)):
        raise MalformedResponse("forecast contains non-finite values", series_id=req.series_id)
    v = v.copy()
    v.flags.writeable = False
    return v


def request_from(history: Series, horizon: int) -> ForecastRequest:
    return ForecastRequest(
        history.id, history.values, horizon, history.frequency, history.timestamps[-1]
    )


class Backend:
    """A named forecaster usable per series.

    ``forecast`` receives the training history (the only data a backend may
    see) and returns ``horizon`` values. Trained backends fit inside
    ``forecast``; the reported latency covers inference only.
    """

    name: str = "backend"
    forecaster_class: str = SPECIALIST

    def forecast(self, history: Series, horizon: int) -> ForecastResult:  # pragma: no cover
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"

from __future__ import annotations

import time

import numpy as np

from ..errors import HistoryTooShort
from ..series import Series
from .base import SPECIALIST, Backend, ForecastRequest, ForecastResult, make_result, request_from


def seasonal_naive_values(history, horizon: int, m: int) -> np.ndarray:
    """Tile the last ``m`` observations across ``horizon`` steps."""
    h = np.asarray(history, dtype=float)
    if m < 1:
        raise ValueError("seasonal lag must be >= 1")
    if len(h) < m:
        raise HistoryTooShort(f"seasonal naive needs {m} points, got {len(h)}")
    cycle = h[len(h) - m :]
    return np.resize(cycle, horizon)


def seasonal_naive(req: ForecastRequest, m: int) -> ForecastResult:
    t0 = time.perf_counter_ns()
    try:
        values = seasonal_naive_values(req.history, req.horizon, m)
    except HistoryTooShort as exc:
        raise exc.with_series(req.series_id) from exc
    return make_result(req, values, f"seasonal_naive_m{m}", t0)


class SeasonalNaive(Backend):
    """Seasonal naive; ``m=None`` uses each series' own ``mase_m``."""

    forecaster_class = SPECIALIST

    def __init__(self, m: int | None = None, name: str = "seasonal_naive"):
        self.m = m
        self.name = name

    def forecast(self, history: Series, horizon: int) -> ForecastResult:
        m = self.m if self.m is not None else history.mase_m
        res = seasonal_naive(request_from(history, horizon), m)
        return ForecastResult(res.series_id, res.values, self.name, res.latency_micros, res.warnings)

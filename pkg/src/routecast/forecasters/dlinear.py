"""Decomposition-linear specialist.

Each input window is split by a centred moving average into trend and
remainder; one linear map per component projects the window onto the
horizon, and the two projections are summed. Fitted per series by ridge
least squares over sliding windows, on raw values without covariates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientTraining, RoutecastError
from ..series import Series
from .base import SPECIALIST, Backend, ForecastRequest, ForecastResult, make_result, request_from
from .linalg import ridge_solve

RIDGE_LAMBDA = 1e-6


def moving_average_matrix(length: int, kernel: int) -> np.ndarray:
    """Matrix ``A`` with ``A @ x`` = centred moving average of ``x`` (edge-replicated)."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be a positive odd integer, got {kernel}")
    half = kernel // 2
    A = np.zeros((length, length))
    for i in range(length):
        for j in range(i - half, i + half + 1):
            A[i, min(max(j, 0), length - 1)] += 1.0 / kernel
    return A


def decompose(window, kernel: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(trend, remainder)`` with ``trend + remainder == window``."""
    x = np.asarray(window, dtype=float)
    half = kernel // 2
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be a positive odd integer, got {kernel}")
    padded = np.concatenate([np.full(half, x[0]), x, np.full(half, x[-1])])
    trend = np.convolve(padded, np.full(kernel, 1.0 / kernel), mode="valid")
    return trend, x - trend


def sliding_windows(values: np.ndarray, lookback: int, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(values) - lookback - horizon + 1
    idx = np.arange(lookback)[None, :] + np.arange(n)[:, None]
    out = np.arange(horizon)[None, :] + np.arange(n)[:, None] + lookback
    return values[idx], values[out]


@dataclass(frozen=True, eq=False)
class DLinearModel:
    lookback: int
    horizon: int
    kernel: int
    trend_weights: np.ndarray  # (lookback, horizon)
    remainder_weights: np.ndarray  # (lookback, horizon)
    bias: np.ndarray  # (horizon,)

    def project(self, window: np.ndarray) -> np.ndarray:
        trend, rem = decompose(window, self.kernel)
        return trend @ self.trend_weights + rem @ self.remainder_weights + self.bias


def dlinear_fit(train, lookback: int, horizon: int, kernel: int = 25) -> DLinearModel:
    y = np.asarray(train, dtype=float)
    if kernel % 2 == 0 or kernel < 1 or kernel > lookback:
        raise ValueError(f"kernel must be odd and <= lookback ({lookback}), got {kernel}")
    if len(y) < lookback + horizon:
        raise InsufficientTraining(
            f"need at least lookback+horizon={lookback + horizon} points, got {len(y)}"
        )
    X, Y = sliding_windows(y, lookback, horizon)
    A = moving_average_matrix(lookback, kernel)
    trend = X @ A.T
    design = np.hstack([trend, X - trend])
    W, b = ridge_solve(design, Y, RIDGE_LAMBDA)
    return DLinearModel(lookback, horizon, kernel, W[:lookback], W[lookback:], np.asarray(b))


def dlinear_predict(model: DLinearModel, req: ForecastRequest) -> ForecastResult:
    if req.horizon > model.horizon:
        raise ValueError(f"model horizon {model.horizon} < requested {req.horizon}")
    if len(req.history) < model.lookback:
        raise InsufficientTraining(
            f"context has {len(req.history)} points, model needs {model.lookback}",
            series_id=req.series_id,
        )
    t0 = time.perf_counter_ns()
    out = model.project(req.history[-model.lookback :])[: req.horizon]
    return make_result(req, out, "dlinear", t0)


class DLinear(Backend):
    forecaster_class = SPECIALIST

    def __init__(self, lookback: int = 48, kernel: int = 25, name: str = "dlinear"):
        self.lookback = lookback
        self.kernel = kernel
        self.name = name

    def forecast(self, history: Series, horizon: int) -> ForecastResult:
        try:
            model = dlinear_fit(history.values, self.lookback, horizon, self.kernel)
        except RoutecastError as exc:
            raise exc.with_series(history.id) from exc
        res = dlinear_predict(model, request_from(history, horizon))
        return ForecastResult(res.series_id, res.values, self.name, res.latency_micros, res.warnings)

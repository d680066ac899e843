"""Lag-feature ridge specialist.

Tabularises a series into autoregressive lags, trailing rolling mean/std and
one-hot calendar covariates, fits a ridge regression on the raw target, and
forecasts recursively (each prediction is fed back as the newest lag).

When the history is too short for some lags or windows the model either
refuses (``mode="strict"``) or drops the starved features and warns
(``mode="degrade"``).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from ..errors import FeatureStarvation, RoutecastError
from ..series import Frequency, Series, to_datetimes
from .base import SPECIALIST, Backend, ForecastRequest, ForecastResult, make_result, request_from
from .linalg import ridge_solve

logger = logging.getLogger(__name__)

RIDGE_LAMBDA = 1.0


@dataclass(frozen=True)
class FeatureProfile:
    lags: tuple[int, ...]
    windows: tuple[int, ...]
    calendar: tuple[str, ...]  # subset of {"hour", "dow", "month"}


HOURLY_PROFILE = FeatureProfile((1, 6, 12, 24, 168), (24, 168), ("hour", "dow"))
DAILY_PROFILE = FeatureProfile((1, 7, 14, 30, 96), (7, 30), ("dow", "month"))


def profile_for(freq: Frequency) -> FeatureProfile:
    return DAILY_PROFILE if freq.kind == "daily" else HOURLY_PROFILE


def _calendar_columns(dts: np.ndarray, parts: tuple[str, ...]) -> np.ndarray:
    cols = []
    days = dts.astype("datetime64[D]")
    for part in parts:
        if part == "hour":
            code, size = ((dts - days).astype("timedelta64[h]").astype(int)), 24
        elif part == "dow":
            # 1970-01-01 was a Thursday; shift so Monday == 0
            code, size = (days.astype(int) + 3) % 7, 7
        elif part == "month":
            code, size = dts.astype("datetime64[M]").astype(int) % 12, 12
        else:
            raise ValueError(f"unknown calendar feature {part!r}")
        cols.append(np.eye(size)[code])
    if not cols:
        return np.zeros((len(dts), 0))
    return np.hstack(cols)


def _row(buf: np.ndarray, t: int, lags, windows) -> list[float]:
    """Lag and rolling features for target position ``t`` using ``buf[:t]`` only."""
    row = [buf[t - k] for k in lags]
    for w in windows:
        seg = buf[t - w : t]
        row.append(seg.mean())
        row.append(seg.std())
    return row


@dataclass(frozen=True, eq=False)
class LagRidgeModel:
    lags: tuple[int, ...]
    windows: tuple[int, ...]
    calendar: tuple[str, ...]
    frequency: Frequency
    coef: np.ndarray
    intercept: float
    dropped: tuple[str, ...] = ()

    @property
    def warnings(self) -> tuple[str, ...]:
        if not self.dropped:
            return ()
        return ("dropped features: " + ", ".join(self.dropped),)

    @property
    def feature_names(self) -> list[str]:
        names = [f"lag{k}" for k in self.lags]
        for w in self.windows:
            names += [f"roll{w}_mean", f"roll{w}_std"]
        return names


def _starved(profile: FeatureProfile, n: int) -> tuple[tuple[int, ...], tuple[int, ...], list[str]]:
    lags = tuple(k for k in profile.lags if k < n)
    windows = tuple(w for w in profile.windows if w < n)
    dropped = [f"lag{k}" for k in profile.lags if k >= n] + [
        f"roll{w}" for w in profile.windows if w >= n
    ]
    return lags, windows, dropped


def lagridge_fit(
    train: Series,
    profile: FeatureProfile | None = None,
    mode: str = "degrade",
    lam: float = RIDGE_LAMBDA,
) -> LagRidgeModel:
    """Fit on the whole of ``train`` (the caller passes history only)."""
    if mode not in ("strict", "degrade"):
        raise ValueError(f"mode must be 'strict' or 'degrade', got {mode!r}")
    profile = profile or profile_for(train.frequency)
    y = train.values
    n = len(y)
    need = max(profile.lags, default=0) + max(profile.windows, default=0)
    if mode == "strict" and n < need:
        raise FeatureStarvation(
            f"history of {n} points is shorter than max lag + longest window = {need}",
            series_id=train.id,
        )
    lags, windows, dropped = _starved(profile, n)
    if dropped:
        logger.debug("%s: dropping starved features %s", train.id, dropped)
    if not lags:
        raise FeatureStarvation(f"history of {n} points supports no lag feature", series_id=train.id)
    start = max(lags + windows)
    rows = [_row(y, t, lags, windows) for t in range(start, n)]
    X = np.asarray(rows, dtype=float)
    cal = _calendar_columns(to_datetimes(train.timestamps[start:], train.frequency), profile.calendar)
    X = np.hstack([X, cal])
    coef, intercept = ridge_solve(X, y[start:], lam)
    return LagRidgeModel(
        lags, windows, profile.calendar, train.frequency, coef, intercept, tuple(dropped)
    )


def _future_datetimes(req: ForecastRequest, freq: Frequency) -> np.ndarray:
    last = req.last_timestamp
    if last is None:
        last = len(req.history) - 1
    if isinstance(last, np.datetime64):
        step = np.timedelta64(freq.seconds, "s")
        return last.astype("datetime64[s]") + step * np.arange(1, req.horizon + 1)
    return to_datetimes(int(last) + np.arange(1, req.horizon + 1), freq)


def lagridge_predict(model: LagRidgeModel, req: ForecastRequest) -> ForecastResult:
    need = max(model.lags + model.windows)
    if len(req.history) < need:
        raise FeatureStarvation(
            f"context of {len(req.history)} points, model needs {need}", series_id=req.series_id
        )
    t0 = time.perf_counter_ns()
    cal = _calendar_columns(_future_datetimes(req, model.frequency), model.calendar)
    buf = np.concatenate([req.history, np.zeros(req.horizon)])
    n0 = len(req.history)
    for h in range(req.horizon):
        t = n0 + h
        x = np.concatenate([_row(buf, t, model.lags, model.windows), cal[h]])
        buf[t] = x @ model.coef + model.intercept
    return make_result(req, buf[n0:], "lagridge", t0, model.warnings)


class LagRidge(Backend):
    forecaster_class = SPECIALIST

    def __init__(
        self,
        mode: str = "degrade",
        lam: float = RIDGE_LAMBDA,
        profile: FeatureProfile | None = None,
        name: str = "lagridge",
    ):
        self.mode = mode
        self.lam = lam
        self.profile = profile
        self.name = name

    def forecast(self, history: Series, horizon: int) -> ForecastResult:
        try:
            model = lagridge_fit(history, self.profile, self.mode, self.lam)
        except RoutecastError as exc:
            raise exc.with_series(history.id) from exc
        res = lagridge_predict(model, request_from(history, horizon))
        return ForecastResult(res.series_id, res.values, self.name, res.latency_micros, res.warnings)

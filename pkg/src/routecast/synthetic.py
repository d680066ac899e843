"""Seeded synthetic corpora for smoke runs and controlled experiments."""

from __future__ import annotations

import numpy as np

from .forecasters.replay import ForecastStore
from .series import DAILY, HOURLY, Series

# Two rush-hour peaks per day, normalised to [0, 1].
_HOURS = np.arange(24)
DAILY_SHAPE = np.exp(-0.5 * ((_HOURS - 8) / 1.5) ** 2) + 0.8 * np.exp(-0.5 * ((_HOURS - 17) / 2.0) ** 2)
DAILY_SHAPE = DAILY_SHAPE / DAILY_SHAPE.max()


def commuter_series(
    series_id: str,
    length: int,
    rng: np.random.Generator,
    level: float = 10.0,
    amplitude: float = 20.0,
    weekly_depth: float = 0.6,
    noise: float = 0.3,
    seasonal_period: int = 168,
    mase_m: int = 24,
) -> Series:
    """Hourly series: daily double peak whose amplitude is modulated over the week."""
    t = np.arange(length)
    phase = rng.uniform(0, 2 * np.pi)
    weekly = 1.0 + weekly_depth * np.sin(2 * np.pi * t / 168 + phase)
    y = level + amplitude * weekly * DAILY_SHAPE[t % 24] + rng.normal(0, noise, length)
    return Series(series_id, t, y, HOURLY, seasonal_period, mase_m)


def coldstart_corpus(n_series: int = 8, seed: int = 0, weeks: int = 6) -> list[Series]:
    rng = np.random.default_rng(seed)
    return [
        commuter_series(f"cs{i:03d}", 168 * weeks, rng, level=rng.uniform(5, 15))
        for i in range(n_series)
    ]


def mixed_corpus(n_series: int, seed: int = 0, length: int = 24 * 7 * 4) -> list[Series]:
    """Hourly corpus mixing periodic, noisy, trending and random-walk series."""
    rng = np.random.default_rng(seed)
    out = []
    t = np.arange(length)
    for i in range(n_series):
        kind = i % 4
        sid = f"s{i:03d}"
        if kind == 0:
            out.append(commuter_series(sid, length, rng, noise=rng.uniform(0.1, 1.0)))
            continue
        if kind == 1:
            y = 50 + rng.normal(0, rng.uniform(1, 10), length)
        elif kind == 2:
            y = 5 + 0.05 * t + 2 * np.sin(2 * np.pi * t / 24) + rng.normal(0, 0.5, length)
        else:
            y = 100 + np.cumsum(rng.normal(0, 1, length))
        out.append(Series(sid, t, y, HOURLY, 168, 24))
    return out


def generalist_store(
    corpus: list[Series], horizon: int, seed: int = 0, model_name: str = "fm"
) -> ForecastStore:
    """Simulated generalist forecasts: the true future plus series-dependent noise."""
    rng = np.random.default_rng(seed + 7919)
    store = ForecastStore()
    for s in corpus:
        actual = s.values[-horizon:]
        scale = np.std(np.diff(s.values[:-horizon])) * rng.uniform(0.3, 1.5)
        store.put(s.id, model_name, actual + rng.normal(0, scale, horizon))
    return store


def daily_corpus(n_series: int, seed: int = 0, length: int = 365) -> list[Series]:
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    out = []
    for i in range(n_series):
        y = 20 + 3 * np.sin(2 * np.pi * t / 7) + 0.01 * t + rng.normal(0, 0.5, length)
        out.append(Series(f"d{i:03d}", t, y, DAILY, 7, 7))
    return out

"""The four series-level routing features.

All features are computed on training history only and are invariant to
positive rescaling; entropy, seasonal autocorrelation and trend R^2 are also
shift invariant. Constant series map to 0 for every feature so they satisfy
no routing threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPeriod, RoutecastError, TooShort
from .series import Series

#: Returned by :func:`coeff_variation` when the mean is negligible next to the range.
CV_UNDEFINED = None

FEATURE_NAMES = ("entropy", "cv", "sacf", "trend")


@dataclass(frozen=True)
class SeriesFeatures:
    series_id: str
    spectral_entropy: float
    coeff_variation: float | None  # None = undefined (near-zero mean)
    seasonal_acf: float
    trend_r2: float
    n_points: int

    def __post_init__(self):
        for name in ("spectral_entropy", "seasonal_acf", "trend_r2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.spectral_entropy <= 1.0:
            raise ValueError("spectral_entropy outside [0, 1]")
        if self.coeff_variation is not None and not (
            math.isfinite(self.coeff_variation) and self.coeff_variation >= 0
        ):
            raise ValueError("coeff_variation must be finite and >= 0")
        if not -1.0 <= self.seasonal_acf <= 1.0:
            raise ValueError("seasonal_acf outside [-1, 1]")
        if not 0.0 <= self.trend_r2 <= 1.0:
            raise ValueError("trend_r2 outside [0, 1]")


def _as_array(values, min_len: int, what: str) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or len(x) < min_len:
        raise TooShort(f"{what} needs at least {min_len} points, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what}: non-finite input")
    return x


def _is_constant(x: np.ndarray) -> bool:
    return bool(np.ptp(x) == 0)


def spectral_entropy(values) -> float:
    """Normalised Shannon entropy of the raw periodogram.

    The series is mean-removed, the DC bin is dropped, and the entropy of
    the remaining power distribution is divided by ``log(n_bins)``.
    """
    x = _as_array(values, 8, "spectral_entropy")
    if _is_constant(x):
        return 0.0
    d = x - x.mean()
    power = np.abs(np.fft.rfft(d)[1:]) ** 2
    total = power.sum()
    if not total > 0:
        return 0.0
    p = power / total
    nz = p[p > 0]
    h = -float(np.sum(nz * np.log(nz))) / math.log(len(power))
    return min(max(h, 0.0), 1.0)


def coeff_variation(values) -> float | None:
    """Population std over |mean|; ``CV_UNDEFINED`` when the mean is ~0 relative to the range."""
    x = _as_array(values, 2, "coeff_variation")
    span = float(np.ptp(x))
    if span == 0:
        return 0.0
    mean = float(np.mean(x))
    if abs(mean) < 1e-12 * span:
        return CV_UNDEFINED
    return float(np.std(x)) / abs(mean)


def seasonal_acf(values, period: int) -> float:
    """Lag-``period`` autocorrelation, clamped to [-1, 1].

    The lagged covariance is averaged over the ``n - period`` overlapping
    pairs and divided by the variance of the whole series, so an exactly
    periodic series scores 1.
    """
    if period < 1:
        raise InvalidPeriod(f"seasonal period must be >= 1, got {period}")
    x = _as_array(values, 2 * period, "seasonal_acf")
    if _is_constant(x):
        return 0.0
    d = x - x.mean()
    var = float(np.mean(d * d))
    if not var > 0:
        return 0.0
    cov = float(np.mean(d[period:] * d[:-period]))
    return min(max(cov / var, -1.0), 1.0)


def trend_r2(values) -> float:
    """R^2 of an OLS line fitted against the time index."""
    x = _as_array(values, 3, "trend_r2")
    if _is_constant(x):
        return 0.0
    t = np.arange(len(x), dtype=float)
    dt = t - t.mean()
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if not sxx > 0:
        return 0.0
    r2 = float(np.dot(dt, dx)) ** 2 / (float(np.dot(dt, dt)) * sxx)
    return min(max(r2, 0.0), 1.0)


def extract_all(s: Series, train_fraction: float = 1.0) -> SeriesFeatures:
    """All four features on the first ``floor(train_fraction * T)`` points of ``s``.

    Pass a split's ``history`` with the default fraction to keep test
    actuals out of the computation.
    """
    if not 0 < train_fraction <= 1:
        raise ValueError("train_fraction must be in (0, 1]")
    n = int(math.floor(len(s) * train_fraction))
    x = s.values[:n]
    try:
        return SeriesFeatures(
            series_id=s.id,
            spectral_entropy=spectral_entropy(x),
            coeff_variation=coeff_variation(x),
            seasonal_acf=seasonal_acf(x, s.seasonal_period),
            trend_r2=trend_r2(x),
            n_points=n,
        )
    except RoutecastError as exc:
        raise exc.with_series(s.id) from exc

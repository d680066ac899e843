"""Threshold routing between generalist and specialist forecasters.

A series goes to the generalist when at least ``min_satisfied`` of four
feature tests pass:

* spectral entropy >= ``entropy_min``
* coefficient of variation >= ``cv_min`` (undefined CV passes)
* seasonal ACF >= ``sacf_high`` or < ``sacf_low``
* trend R^2 < ``trend_r2_max``

Thresholds can be re-derived from per-series win/loss labels with
:func:`decile_analysis` followed by :func:`calibrate`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CorpusTooSmall, InvalidConfig, MismatchedIds
from .features import FEATURE_NAMES, SeriesFeatures

GENERALIST = "generalist"
SPECIALIST = "specialist"

# Each threshold-relative margin is squashed by tanh(MARGIN_GAIN * margin) so one
# far-off feature cannot outvote the others; an undefined CV gets the upper bound.
MARGIN_GAIN = 2.0
UNDEFINED_CV_MARGIN = 1.0


@dataclass(frozen=True)
class RouterConfig:
    entropy_min: float = 0.24
    cv_min: float = 0.22
    sacf_high: float = 0.72
    sacf_low: float = 0.50
    trend_r2_max: float = 0.05
    min_satisfied: int = 2
    win_rate_target: float = 0.60

    def __post_init__(self):
        if not 0 <= self.sacf_low <= self.sacf_high <= 1:
            raise InvalidConfig("need 0 <= sacf_low <= sacf_high <= 1")
        if not 1 <= self.min_satisfied <= 4:
            raise InvalidConfig("min_satisfied must be in 1..4")
        if not 0 < self.win_rate_target < 1:
            raise InvalidConfig("win_rate_target must be in (0, 1)")

    @classmethod
    def from_dict(cls, d: Mapping) -> "RouterConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown router config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path | None) -> "RouterConfig":
        if path is None:
            return cls()
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RouteDecision:
    series_id: str
    target: str
    satisfied: frozenset[str]
    advantage_score: float

    def satisfied_label(self) -> str:
        """Satisfied tests joined by ``|`` in canonical order."""
        return "|".join(n for n in FEATURE_NAMES if n in self.satisfied)


def satisfied_tests(f: SeriesFeatures, cfg: RouterConfig) -> frozenset[str]:
    hits = set()
    if f.spectral_entropy >= cfg.entropy_min:
        hits.add("entropy")
    if f.coeff_variation is None or f.coeff_variation >= cfg.cv_min:
        hits.add("cv")
    if f.seasonal_acf >= cfg.sacf_high or f.seasonal_acf < cfg.sacf_low:
        hits.add("sacf")
    if f.trend_r2 < cfg.trend_r2_max:
        hits.add("trend")
    return frozenset(hits)


def _above(value: float, tau: float) -> float:
    return (value - tau) / tau if tau != 0 else value - tau


def _below(value: float, tau: float) -> float:
    return (tau - value) / tau if tau != 0 else tau - value


def _squash(margin: float) -> float:
    return math.tanh(MARGIN_GAIN * margin)


def advantage_score(f: SeriesFeatures, cfg: RouterConfig) -> float:
    """Sum of bounded, threshold-relative margins; positive means past the threshold.

    Margins are ``(v - t) / t`` for ``>=`` tests and ``(t - v) / t`` for ``<``
    tests (the larger of the two for seasonal ACF), each squashed into
    (-1, 1). The score is 0 when every feature sits on its threshold and
    strictly increases as any feature moves further into its FM-favouring side.
    """
    score = _squash(_above(f.spectral_entropy, cfg.entropy_min))
    if f.coeff_variation is None:
        score += UNDEFINED_CV_MARGIN
    else:
        score += _squash(_above(f.coeff_variation, cfg.cv_min))
    score += _squash(max(_above(f.seasonal_acf, cfg.sacf_high), _below(f.seasonal_acf, cfg.sacf_low)))
    score += _squash(_below(f.trend_r2, cfg.trend_r2_max))
    return float(score)


def route(f: SeriesFeatures, cfg: RouterConfig = RouterConfig()) -> RouteDecision:
    hits = satisfied_tests(f, cfg)
    target = GENERALIST if len(hits) >= cfg.min_satisfied else SPECIALIST
    return RouteDecision(f.series_id, target, hits, advantage_score(f, cfg))


# ------------------------------------------------------------------ calibration


@dataclass(frozen=True)
class WinLabel:
    series_id: str
    fm_best_mase: float
    spec_best_mase: float

    @property
    def fm_wins(self) -> bool:
        # ties go to the cheaper specialist
        return self.fm_best_mase < self.spec_best_mase


@dataclass(frozen=True)
class DecileBin:
    index: int
    lo: float  # smallest member value (nan when empty)
    hi: float  # largest member value (nan when empty)
    count: int
    fm_win_rate: float  # nan when empty


@dataclass(frozen=True)
class DecileTable:
    feature: str
    bins: tuple[DecileBin, ...]

    @property
    def win_rates(self) -> np.ndarray:
        return np.array([b.fm_win_rate for b in self.bins])

    def upper_boundary(self, k: int) -> float:
        """Smallest observed value above bin ``k`` (for strict ``<`` thresholds)."""
        for b in self.bins[k + 1 :]:
            if b.count:
                return b.lo
        return float(np.nextafter(self.bins[k].hi, np.inf))


def _feature_column(features: Sequence[SeriesFeatures], name: str) -> np.ndarray:
    if name == "entropy":
        return np.array([f.spectral_entropy for f in features])
    if name == "cv":
        # undefined CV is maximally volatile
        return np.array([math.inf if f.coeff_variation is None else f.coeff_variation for f in features])
    if name == "sacf":
        return np.array([f.seasonal_acf for f in features])
    if name == "trend":
        return np.array([f.trend_r2 for f in features])
    raise KeyError(name)


def decile_table(feature: str, values: np.ndarray, wins: np.ndarray, n_bins: int = 10) -> DecileTable:
    """Bucket ``values`` by empirical deciles and compute the win rate per bucket.

    Edges are order statistics; bin ``k`` holds values in
    ``(edge_k, edge_{k+1}]`` (bin 0 also holds the minimum), so tied values
    always share a bin.
    """
    values = np.asarray(values, dtype=float)
    wins = np.asarray(wins, dtype=bool)
    inner = np.quantile(values, np.arange(1, n_bins) / n_bins, method="lower")
    idx = np.searchsorted(inner, values, side="left")
    bins = []
    for k in range(n_bins):
        members = idx == k
        c = int(members.sum())
        if c:
            v = values[members]
            bins.append(DecileBin(k, float(v.min()), float(v.max()), c, float(wins[members].mean())))
        else:
            bins.append(DecileBin(k, math.nan, math.nan, 0, math.nan))
    return DecileTable(feature, tuple(bins))


def decile_analysis(
    features: Iterable[SeriesFeatures], labels: Iterable[WinLabel], min_size: int = 20
) -> dict[str, DecileTable]:
    """FM win rate by decile for each of the four features."""
    feats = sorted(features, key=lambda f: f.series_id)
    by_id = {lab.series_id: lab for lab in labels}
    ids = [f.series_id for f in feats]
    if len(set(ids)) != len(ids) or set(ids) != set(by_id):
        missing = sorted(set(ids) ^ set(by_id))[:5]
        raise MismatchedIds(f"features and labels disagree on series ids (e.g. {missing})")
    if len(feats) < min_size:
        raise CorpusTooSmall(f"need at least {min_size} series, got {len(feats)}")
    wins = np.array([by_id[i].fm_wins for i in ids])
    return {name: decile_table(name, _feature_column(feats, name), wins) for name in FEATURE_NAMES}


@dataclass(frozen=True)
class Calibration:
    config: RouterConfig
    flagged: frozenset[str] = field(default_factory=frozenset)


def _scan(rates: np.ndarray, order: Iterable[int], target: float) -> int | None:
    for k in order:
        r = rates[k]
        if not math.isnan(r) and r > target:
            return k
    return None


def calibrate(tables: Mapping[str, DecileTable], cfg: RouterConfig = RouterConfig()) -> Calibration:
    """Move each threshold to the first decile whose FM win rate exceeds the target.

    Entropy and CV scan upward and take the bin's smallest value. Trend R^2
    scans downward and takes the first value above the bin. Seasonal ACF is
    U-shaped, so both sides scan outward from the lowest-win-rate bin.
    Features with no qualifying bin keep their prior thresholds and are
    reported in ``flagged``.
    """
    target = cfg.win_rate_target
    updates: dict[str, float] = {}
    flagged = set()

    for name, key in (("entropy", "entropy_min"), ("cv", "cv_min")):
        t = tables[name]
        k = _scan(t.win_rates, range(len(t.bins)), target)
        if k is None or not math.isfinite(t.bins[k].lo):
            flagged.add(name)
        else:
            updates[key] = t.bins[k].lo

    t = tables["trend"]
    k = _scan(t.win_rates, reversed(range(len(t.bins))), target)
    if k is None:
        flagged.add("trend")
    else:
        updates["trend_r2_max"] = t.upper_boundary(k)

    t = tables["sacf"]
    rates = t.win_rates
    if np.all(np.isnan(rates)):
        flagged.add("sacf")
    else:
        trough = int(np.nanargmin(rates))
        k_hi = _scan(rates, range(trough, len(t.bins)), target)
        k_lo = _scan(rates, reversed(range(trough)), target)
        high = t.bins[k_hi].lo if k_hi is not None else cfg.sacf_high
        low = t.upper_boundary(k_lo) if k_lo is not None else cfg.sacf_low
        high = min(max(high, 0.0), 1.0)
        low = min(max(low, 0.0), 1.0)
        if k_hi is None or k_lo is None:
            flagged.add("sacf")
        if low <= high:
            updates["sacf_high"], updates["sacf_low"] = high, low
        else:
            flagged.add("sacf")

    return Calibration(replace(cfg, **updates), frozenset(flagged))

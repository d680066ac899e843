"""RMSE, sMAPE and MASE, plus corpus-level aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import HistoryTooShort, LengthMismatch, MissingForecast
from .forecasters.base import ForecastResult
from .series import SplitSeries

#: Returned by :func:`mase` when the in-sample naive error is zero.
MASE_UNDEFINED = None

_MASE_EPS = 1e-12


def _pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(actual, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1 or y.size == 0:
        raise LengthMismatch(f"actual has shape {y.shape}, predicted {yhat.shape}")
    return y, yhat


def rmse(actual, predicted) -> float:
    y, yhat = _pair(actual, predicted)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def smape(actual, predicted) -> float:
    """Symmetric MAPE in percent, bounded by [0, 200]. Steps where both values are 0 score 0."""
    y, yhat = _pair(actual, predicted)
    num = 2.0 * np.abs(y - yhat)
    # halving the denominator instead would underflow for subnormal inputs
    den = np.abs(y) + np.abs(yhat)
    ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(100.0 * ratio.mean())


def mase_scale(history, m: int) -> float:
    """Mean absolute lag-``m`` difference over the training history."""
    h = np.asarray(history, dtype=float)
    if m < 1:
        raise ValueError("m must be >= 1")
    if len(h) <= m:
        raise HistoryTooShort(f"MASE needs more than m={m} training points, got {len(h)}")
    return float(np.mean(np.abs(h[m:] - h[:-m])))


def mase(actual, predicted, history, m: int, scale: float | None = None) -> float | None:
    """Mean absolute error scaled by the in-sample seasonal-naive error.

    ``scale`` overrides the denominator (used when the forecaster saw a
    truncated context but the scale should still come from full history).
    """
    y, yhat = _pair(actual, predicted)
    denom = mase_scale(history, m) if scale is None else scale
    if denom < _MASE_EPS:
        return MASE_UNDEFINED
    return float(np.mean(np.abs(y - yhat)) / denom)


@dataclass(frozen=True)
class EvalRecord:
    series_id: str
    model_name: str
    mase: float | None
    smape: float
    rmse: float
    horizon: int
    mase_m: int


def evaluate_one(split: SplitSeries, result: ForecastResult, m: int | None = None) -> EvalRecord:
    m = split.history.mase_m if m is None else m
    try:
        return EvalRecord(
            split.id,
            result.model_name,
            mase(split.actuals, result.values, split.history.values, m),
            smape(split.actuals, result.values),
            rmse(split.actuals, result.values),
            split.horizon,
            m,
        )
    except (LengthMismatch, HistoryTooShort) as exc:
        raise exc.with_series(split.id) from exc


@dataclass(frozen=True)
class ModelSummary:
    mase: float | None
    smape: float
    rmse: float
    n: int
    mase_undefined: int


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    models: Mapping[str, ModelSummary]
    transform: str = "identity"
    extra: Mapping[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "dataset": self.dataset,
            "transform": self.transform,
            "models": {
                name: {
                    "MASE": s.mase,
                    "sMAPE": s.smape,
                    "RMSE": s.rmse,
                    "n": s.n,
                    "mase_undefined": s.mase_undefined,
                }
                for name, s in sorted(self.models.items())
            },
        }
        out.update(self.extra)
        return out


def summarize(records: Iterable[EvalRecord]) -> dict[str, ModelSummary]:
    """Unweighted per-model means; undefined MASE values are excluded and counted."""
    by_model: dict[str, list[EvalRecord]] = {}
    for r in records:
        by_model.setdefault(r.model_name, []).append(r)
    out = {}
    for name, rs in by_model.items():
        defined = [r.mase for r in rs if r.mase is not None]
        out[name] = ModelSummary(
            mase=math.fsum(defined) / len(defined) if defined else None,
            smape=math.fsum(r.smape for r in rs) / len(rs),
            rmse=math.fsum(r.rmse for r in rs) / len(rs),
            n=len(rs),
            mase_undefined=len(rs) - len(defined),
        )
    return out


def evaluate_corpus(
    forecasts: Iterable[ForecastResult],
    splits: Iterable[SplitSeries],
    dataset: str = "",
    m: int | None = None,
    transform: str = "identity",
) -> tuple[EvalReport, list[EvalRecord]]:
    """Score every split against each model's forecast for it.

    Every split must have a forecast from every model that appears in
    ``forecasts``; forecasts for unknown series are rejected.
    """
    split_by_id = {s.id: s for s in splits}
    per_model: dict[str, dict[str, ForecastResult]] = {}
    for f in forecasts:
        if f.series_id not in split_by_id:
            raise MissingForecast("forecast for unknown series", series_id=f.series_id)
        per_model.setdefault(f.model_name, {})[f.series_id] = f
    records = []
    for model in sorted(per_model):
        fs = per_model[model]
        for sid in sorted(split_by_id):
            if sid not in fs:
                raise MissingForecast(f"no forecast from model {model!r}", series_id=sid)
            records.append(evaluate_one(split_by_id[sid], fs[sid], m))
    if not records:
        raise MissingForecast("no forecasts to evaluate")
    return EvalReport(dataset, summarize(records), transform), records

"""CSV/JSON artifact readers and writers with canonical number formatting.

Floats are written with 9 significant digits and JSON keys are sorted so
that identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .errors import MissingColumn
from .features import SeriesFeatures
from .metrics import EvalRecord
from .pareto import ParetoCurve, ParetoPoint
from .router import DecileTable, RouteDecision, WinLabel

UNDEFINED = "undefined"

FEATURES_HEADER = ("series_id", "spectral_entropy", "coeff_variation", "seasonal_acf", "trend_r2", "n_points")
DECISIONS_HEADER = ("series_id", "target", "satisfied", "advantage_score")
EVAL_HEADER = ("series_id", "model", "mase", "smape", "rmse")
LABELS_HEADER = ("series_id", "fm_best_mase", "spec_best_mase")
CURVE_HEADER = ("alpha", "cost", "mase")
DECILES_HEADER = ("feature", "decile", "lo", "hi", "count", "fm_win_rate")


def fmt(x: float | None) -> str:
    if x is None:
        return UNDEFINED
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return format(x, ".9g")


def parse_num(text: str) -> float | None:
    text = text.strip()
    if text in (UNDEFINED, ""):
        return None
    return float(text)


def _canon(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def write_json(obj, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_canon(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_rows(path, required: Sequence[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {missing}")
        return list(reader)


def write_features(features: Iterable[SeriesFeatures], path) -> None:
    _write_rows(
        path,
        FEATURES_HEADER,
        (
            (f.series_id, fmt(f.spectral_entropy), fmt(f.coeff_variation), fmt(f.seasonal_acf), fmt(f.trend_r2), f.n_points)
            for f in features
        ),
    )


def read_features(path) -> list[SeriesFeatures]:
    return [
        SeriesFeatures(
            r["series_id"],
            float(r["spectral_entropy"]),
            parse_num(r["coeff_variation"]),
            float(r["seasonal_acf"]),
            float(r["trend_r2"]),
            int(r["n_points"]),
        )
        for r in _read_rows(path, FEATURES_HEADER)
    ]


def write_decisions(decisions: Iterable[RouteDecision], path) -> None:
    _write_rows(
        path,
        DECISIONS_HEADER,
        ((d.series_id, d.target, d.satisfied_label(), fmt(d.advantage_score)) for d in decisions),
    )


def read_scores(path) -> dict[str, float]:
    return {r["series_id"]: float(r["advantage_score"]) for r in _read_rows(path, ("series_id", "advantage_score"))}


def write_eval(records: Iterable[EvalRecord], path) -> None:
    _write_rows(
        path,
        EVAL_HEADER,
        ((r.series_id, r.model_name, fmt(r.mase), fmt(r.smape), fmt(r.rmse)) for r in records),
    )


def read_eval(path) -> list[dict]:
    """Per-series evaluation rows as dicts with parsed numbers."""
    return [
        {
            "series_id": r["series_id"],
            "model": r["model"],
            "mase": parse_num(r["mase"]),
            "smape": parse_num(r["smape"]),
            "rmse": parse_num(r["rmse"]),
        }
        for r in _read_rows(path, EVAL_HEADER)
    ]


def read_labels(path) -> list[WinLabel]:
    return [
        WinLabel(r["series_id"], float(r["fm_best_mase"]), float(r["spec_best_mase"]))
        for r in _read_rows(path, LABELS_HEADER)
    ]


def write_labels(labels: Iterable[WinLabel], path) -> None:
    _write_rows(path, LABELS_HEADER, ((l.series_id, fmt(l.fm_best_mase), fmt(l.spec_best_mase)) for l in labels))


def write_curve(curve: ParetoCurve, path) -> None:
    _write_rows(path, CURVE_HEADER, ((fmt(p.alpha), fmt(p.cost), fmt(p.mase)) for p in curve.points))


def point_dict(p: ParetoPoint) -> dict:
    return {"alpha": p.alpha, "cost": p.cost, "mase": p.mase, "n_fm": p.n_fm}


def write_deciles(tables: dict[str, DecileTable], path) -> None:
    rows = []
    for name, t in tables.items():
        for b in t.bins:
            rows.append((name, b.index, fmt(b.lo), fmt(b.hi), b.count, fmt(b.fm_win_rate)))
    _write_rows(path, DECILES_HEADER, rows)

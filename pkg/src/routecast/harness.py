"""End-to-end runs: pipeline, cold-start comparison and latency bench."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

from . import io
from .errors import HistoryTooShort, InvalidConfig, RoutecastError
from .features import SeriesFeatures, extract_all
from .forecasters import (
    GENERALIST,
    Backend,
    DLinear,
    EndpointConfig,
    ForecastResult,
    ForecastStore,
    LagRidge,
    Remote,
    Replay,
    SeasonalNaive,
    bench_latency,
    dlinear_fit,
    dlinear_predict,
    lagridge_fit,
    lagridge_predict,
    request_from,
    seasonal_naive,
)
from .metrics import EvalRecord, EvalReport, evaluate_one, mase, mase_scale, summarize
from .pareto import CostModel, ParetoCurve, SeriesOutcome, dominance_check, expected_cost, pareto_sweep
from .router import RouteDecision, RouterConfig, route
from .series import Series, SplitSeries, get_dataset, ingest_long_csv, load_dataset_configs, split_last_h
from .synthetic import commuter_series

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

ROUTED = "routed"


@dataclass(frozen=True)
class RunConfig:
    data: Path | None = None
    dataset: str = "Traffic"
    dataset_config: Path | None = None
    router_config: Path | None = None
    generalist: dict = field(default_factory=lambda: {"backend": "replay", "model": "fm"})
    specialist: dict = field(default_factory=lambda: {"backend": "seasonal_naive"})
    coldstart_backends: tuple = (
        {"backend": "seasonal_naive"},
        {"backend": "lagridge", "mode": "degrade"},
    )
    cold_start_context: int = 48
    bench_context: int = 168
    bench_iterations: int = 200
    cost: dict = field(default_factory=lambda: {"c_fm": 1000.0, "c_spec": 1.0})
    out: Path = Path("out")
    seed: int = 0
    strict: bool = False
    workers: int = 1

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw, base=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base: Path = Path(".")) -> "RunConfig":
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfig(f"unknown run config keys: {sorted(unknown)}")
        kw = dict(raw)
        for key in ("data", "dataset_config", "router_config", "out"):
            if kw.get(key) is not None:
                kw[key] = _resolve(base, kw[key])
        for key in ("generalist", "specialist"):
            if key in kw:
                kw[key] = _resolve_backend(base, kw[key])
        if "coldstart_backends" in kw:
            kw["coldstart_backends"] = tuple(_resolve_backend(base, b) for b in kw["coldstart_backends"])
        cfg = cls(**kw)
        if cfg.cold_start_context < 1 or cfg.workers < 1:
            raise InvalidConfig("cold_start_context and workers must be >= 1")
        return cfg


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def _resolve_backend(base: Path, spec: dict) -> dict:
    spec = dict(spec)
    if "store" in spec:
        spec["store"] = str(_resolve(base, spec["store"]))
    return spec


def build_backend(spec: dict) -> Backend:
    """Instantiate a backend from ``{"backend": kind, ...options}``."""
    spec = dict(spec)
    kind = spec.pop("backend", None)
    name = spec.pop("name", None)
    try:
        if kind == "seasonal_naive":
            b = SeasonalNaive(m=spec.pop("m", None))
        elif kind == "dlinear":
            b = DLinear(lookback=int(spec.pop("lookback", 48)), kernel=int(spec.pop("kernel", 25)))
        elif kind == "lagridge":
            b = LagRidge(mode=spec.pop("mode", "degrade"), lam=float(spec.pop("lam", 1.0)))
        elif kind == "replay":
            if "store" not in spec:
                raise InvalidConfig("replay backend needs a 'store' path")
            b = Replay(ForecastStore.load(spec.pop("store")), spec.pop("model", "fm"))
        elif kind == "remote":
            b = Remote(EndpointConfig.from_dict(spec))
            spec.clear()
        else:
            raise InvalidConfig(f"unknown backend kind {kind!r}")
    except TypeError as exc:
        raise InvalidConfig(f"bad options for backend {kind!r}: {exc}") from None
    if spec:
        raise InvalidConfig(f"unknown options for backend {kind!r}: {sorted(spec)}")
    if name:
        b.name = name
    return b


def _parallel(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R | RoutecastError]:
    """Apply ``fn`` in order; package errors are returned in place of results."""

    def safe(x):
        try:
            return fn(x)
        except RoutecastError as exc:
            return exc

    if workers <= 1:
        return [safe(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(safe, items))


class _Skips:
    def __init__(self, strict: bool):
        self.strict = strict
        self.skipped: dict[str, str] = {}

    def filter(self, ids: Sequence[str], results: Sequence) -> dict[str, object]:
        kept = {}
        for sid, r in zip(ids, results):
            if isinstance(r, RoutecastError):
                if self.strict:
                    raise r.with_series(sid)
                logger.warning("skipping %s: %s", sid, r)
                self.skipped[sid] = str(r)
            else:
                kept[sid] = r
        return kept


def load_corpus(cfg: RunConfig) -> tuple[list[Series], object]:
    if cfg.data is None:
        raise InvalidConfig("run config needs a 'data' path")
    ds = get_dataset(cfg.dataset, load_dataset_configs(cfg.dataset_config))
    return ingest_long_csv(cfg.data, ds), ds


@dataclass
class PipelineResult:
    features: list[SeriesFeatures]
    decisions: list[RouteDecision]
    records: list[EvalRecord]
    report: EvalReport
    artifacts: dict[str, Path]
    skipped: dict[str, str]


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """ingest -> split -> features -> route -> forecast -> evaluate -> sweep."""
    corpus, ds = load_corpus(cfg)
    router_cfg = RouterConfig.load(cfg.router_config)
    generalist = build_backend(cfg.generalist)
    specialist = build_backend(cfg.specialist)
    cm = CostModel(**cfg.cost)
    skips = _Skips(cfg.strict)

    ids = [s.id for s in corpus]
    splits = skips.filter(ids, _parallel(lambda s: split_last_h(s, ds.horizon), corpus, cfg.workers))
    ids = list(splits)
    feats = skips.filter(ids, _parallel(lambda i: extract_all(splits[i].history), ids, cfg.workers))
    ids = list(feats)
    decisions = {i: route(feats[i], router_cfg) for i in ids}

    def both(i: str) -> tuple[ForecastResult, ForecastResult]:
        sp = splits[i]
        return generalist.forecast(sp.history, sp.horizon), specialist.forecast(sp.history, sp.horizon)

    fcs = skips.filter(ids, _parallel(both, ids, cfg.workers))
    ids = list(fcs)

    def score(i: str) -> tuple[EvalRecord, EvalRecord, EvalRecord]:
        sp = splits[i]
        g, s = fcs[i]
        rg, rs = evaluate_one(sp, g), evaluate_one(sp, s)
        chosen = rg if decisions[i].target == GENERALIST else rs
        return rg, rs, replace(chosen, model_name=ROUTED)

    scored = skips.filter(ids, _parallel(score, ids, cfg.workers))
    ids = list(scored)
    records = [r for i in ids for r in scored[i]]
    records.sort(key=lambda r: (r.model_name, r.series_id))

    n_fm = sum(decisions[i].target == GENERALIST for i in ids)
    alpha_rule = n_fm / len(ids) if ids else 0.0
    report = EvalReport(
        ds.name,
        summarize(records),
        "identity",
        {
            "n": len(ids),
            "seed": cfg.seed,
            "generalist": generalist.name,
            "specialist": specialist.name,
            "routing": {
                "to_generalist": n_fm,
                "to_specialist": len(ids) - n_fm,
                "alpha": alpha_rule,
                "expected_cost": expected_cost(alpha_rule, cm),
            },
            "skipped": dict(sorted(skips.skipped.items())),
        },
    )

    outcomes = []
    for i in ids:
        rg, rs, _ = scored[i]
        if rg.mase is not None and rs.mase is not None:
            outcomes.append(SeriesOutcome(i, decisions[i].advantage_score, rg.mase, rs.mase))

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    art = {
        "features": out / "features.csv",
        "decisions": out / "decisions.csv",
        "eval": out / "eval.csv",
        "report": out / "report.json",
        "curve": out / "curve.csv",
        "knee": out / "knee.json",
    }
    io.write_features((feats[i] for i in ids), art["features"])
    io.write_decisions((decisions[i] for i in ids), art["decisions"])
    io.write_eval(records, art["eval"])
    io.write_json(report.to_dict(), art["report"])
    if outcomes:
        curve = pareto_sweep(outcomes, cm)
        io.write_curve(curve, art["curve"])
        io.write_json(knee_payload(curve, cm, len(ids) - len(outcomes)), art["knee"])
    else:
        io.write_curve(ParetoCurve(()), art["curve"])
        io.write_json({"knee": None, "excluded_undefined_mase": len(ids)}, art["knee"])
    return PipelineResult(
        [feats[i] for i in ids],
        [decisions[i] for i in ids],
        records,
        report,
        art,
        dict(skips.skipped),
    )


def knee_payload(curve, cm: CostModel, excluded: int = 0) -> dict:
    dom = dominance_check(curve)
    return {
        "knee": io.point_dict(dom.knee),
        "pure_specialist": io.point_dict(dom.pure_spec),
        "pure_generalist": io.point_dict(dom.pure_fm),
        "cost_model": {"c_fm": cm.c_fm, "c_spec": cm.c_spec},
        "dominance": dom.to_dict(),
        "excluded_undefined_mase": excluded,
    }


# ----------------------------------------------------------------- cold start


@dataclass(frozen=True)
class ColdStartRow:
    series_id: str
    backend: str
    full_mase: float | None
    cold_mase: float | None
    warnings: str = ""
    error: str = ""

    @property
    def ratio(self) -> float | None:
        if self.full_mase is None or self.cold_mase is None or self.full_mase == 0:
            return None
        return self.cold_mase / self.full_mase


def coldstart_series(
    split: SplitSeries, backends: Sequence[Backend], context: int, strict: bool = False
) -> list[ColdStartRow]:
    """Score each backend on full history and on the last ``context`` points.

    Both conditions share the MASE scale of the full history, so the ratio
    reflects forecast error only.
    """
    hist = split.history
    m = hist.mase_m
    if len(hist) < 2 * hist.seasonal_period or len(hist) <= m:
        raise HistoryTooShort(
            f"full condition needs >= 2 seasonal cycles ({2 * hist.seasonal_period} points), got {len(hist)}",
            series_id=hist.id,
        )
    scale = mase_scale(hist.values, m)
    cold = hist.tail(min(context, len(hist)))
    rows = []
    for b in backends:
        full = b.forecast(hist, split.horizon)
        full_m = mase(split.actuals, full.values, hist.values, m, scale=scale)
        try:
            c = b.forecast(cold, split.horizon)
        except RoutecastError as exc:
            if strict:
                raise exc.with_series(hist.id)
            rows.append(ColdStartRow(hist.id, b.name, full_m, None, error=str(exc)))
            continue
        cold_m = mase(split.actuals, c.values, hist.values, m, scale=scale)
        rows.append(ColdStartRow(hist.id, b.name, full_m, cold_m, "; ".join(c.warnings)))
    return rows


def summarize_coldstart(rows: Sequence[ColdStartRow]) -> dict:
    out = {}
    for name in sorted({r.backend for r in rows}):
        rs = [r for r in rows if r.backend == name]
        full = [r.full_mase for r in rs if r.full_mase is not None]
        cold = [r.cold_mase for r in rs if r.cold_mase is not None]
        fm = math.fsum(full) / len(full) if full else None
        cm_ = math.fsum(cold) / len(cold) if cold else None
        out[name] = {
            "full_mase": fm,
            "cold_mase": cm_,
            "degradation_ratio": cm_ / fm if fm and cm_ is not None else None,
            "n": len(rs),
            "cold_failures": sum(1 for r in rs if r.error),
        }
    return out


def run_coldstart(cfg: RunConfig) -> dict:
    corpus, ds = load_corpus(cfg)
    backends = [build_backend(b) for b in cfg.coldstart_backends]
    skips = _Skips(cfg.strict)
    ids = [s.id for s in corpus]

    def one(s: Series):
        return coldstart_series(split_last_h(s, ds.horizon), backends, cfg.cold_start_context, cfg.strict)

    res = skips.filter(ids, _parallel(one, corpus, cfg.workers))
    rows = [r for i in ids if i in res for r in res[i]]
    summary = {
        "dataset": ds.name,
        "context": cfg.cold_start_context,
        "backends": summarize_coldstart(rows),
        "skipped": dict(sorted(skips.skipped.items())),
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    io._write_rows(
        out / "coldstart.csv",
        ("series_id", "backend", "full_mase", "cold_mase", "ratio", "warnings", "error"),
        ((r.series_id, r.backend, io.fmt(r.full_mase), io.fmt(r.cold_mase), io.fmt(r.ratio), r.warnings, r.error) for r in rows),
    )
    io.write_json(summary, out / "coldstart.json")
    return summary


# ---------------------------------------------------------------------- bench


@dataclass(frozen=True)
class BenchRow:
    backend: str
    forecaster_class: str
    p50: float
    p95: float
    mean: float
    throughput: float
    note: str = ""


def run_bench(cfg: RunConfig) -> list[BenchRow]:
    """Single-series latency of each backend's inference step (fits happen outside the timer)."""
    ctx = cfg.bench_context
    horizon = 24
    rng = np.random.default_rng(cfg.seed)
    series = commuter_series("bench", ctx * 4 + horizon, rng)
    train = series.head(len(series) - horizon)
    req = request_from(train.tail(ctx), horizon)
    it = cfg.bench_iterations
    rows = []

    def add(name, cls_, stats, note=""):
        rows.append(BenchRow(name, cls_, stats.p50, stats.p95, stats.mean, stats.throughput, note))

    add("seasonal_naive", "specialist", bench_latency(lambda: seasonal_naive(req, 24), it))
    dl = dlinear_fit(train.values, ctx, horizon, 25)
    add("dlinear", "specialist", bench_latency(lambda: dlinear_predict(dl, req), it))
    lr = lagridge_fit(train)
    add("lagridge", "specialist", bench_latency(lambda: lagridge_predict(lr, req), it))
    store = ForecastStore()
    store.put("bench", "fm", series.values[-horizon:])
    rp = Replay(store, "fm")
    add("replay", "generalist", bench_latency(lambda: rp.forecast(train, horizon), it))
    if cfg.generalist.get("backend") == "remote":
        rb = build_backend(cfg.generalist)
        add(rb.name, "generalist", bench_latency(lambda: rb.forecast(train.tail(ctx), horizon), it), "round-trip")

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    io._write_rows(
        out / "bench.csv",
        ("backend", "class", "p50_us", "p95_us", "mean_us", "throughput_per_s", "note"),
        ((r.backend, r.forecaster_class, io.fmt(r.p50), io.fmt(r.p95), io.fmt(r.mean), io.fmt(r.throughput), r.note) for r in rows),
    )
    return rows

"""``routecast`` command-line entry point.

Exit status: 0 on success, 1 on user error (bad input, config, or data),
2 on an internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .errors import RoutecastError
from .features import extract_all
from .forecasters import ForecastResult, ForecastStore
from .harness import RunConfig, knee_payload, run_bench, run_coldstart, run_pipeline
from .metrics import evaluate_corpus
from .pareto import CostModel, SeriesOutcome, pareto_sweep
from .router import RouterConfig, calibrate, decile_analysis, route
from .series import (
    get_dataset,
    ingest_long_csv,
    load_dataset_configs,
    split_last_h,
    write_long_csv,
)

log = logging.getLogger("routecast")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", type=Path, default=d(None), help="run config JSON")
    p.add_argument("--out", type=Path, default=d(None), help="output directory")
    p.add_argument("--seed", type=int, default=d(None))
    p.add_argument("--strict", action="store_true", default=d(False), help="fail on the first per-series error")
    p.add_argument("--workers", type=int, default=d(None), help="per-series worker threads")


def _data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, help="long CSV: series_id,timestamp,value")
    p.add_argument("--dataset", help="dataset name in the dataset config (e.g. Traffic)")
    p.add_argument("--dataset-config", type=Path, help="dataset config JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="routecast", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("ingest", "validate a long CSV and write it back normalised")
    _data_flags(p)

    p = add("features", "compute routing features on each series' training history")
    _data_flags(p)
    p.add_argument("--no-holdout", action="store_true", help="use the full series, not history minus horizon")

    p = add("route", "apply the routing rule to a features CSV")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--router-config", type=Path)

    p = add("calibrate", "derive thresholds from per-series win/loss labels")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--labels", type=Path, required=True, help="CSV: series_id,fm_best_mase,spec_best_mase")
    p.add_argument("--router-config", type=Path)

    p = add("evaluate", "score stored forecasts against held-out actuals")
    _data_flags(p)
    p.add_argument("--forecasts", type=Path, required=True, help="CSV: series_id,model_name,step,value")

    p = add("pareto", "sweep the generalist fraction and locate the knee")
    p.add_argument("--scores", type=Path, required=True, help="CSV with series_id,advantage_score")
    p.add_argument("--fm-eval", type=Path, required=True)
    p.add_argument("--spec-eval", type=Path, required=True)
    p.add_argument("--fm-model")
    p.add_argument("--spec-model")
    p.add_argument("--c-fm", type=float)
    p.add_argument("--c-spec", type=float)

    add("pipeline", "run ingest through Pareto sweep from a run config")
    p = add("coldstart", "compare backends on full vs truncated history")
    p.add_argument("--context", type=int, help="truncated context length (default 48)")
    add("bench", "single-series inference latency per backend")

    p = add("synth", "write a seeded synthetic corpus, generalist store and run config")
    p.add_argument("--kind", choices=("smoke", "coldstart"), default="smoke")
    p.add_argument("--n", type=int, default=20)
    return parser


def _run_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    over = {}
    if args.out is not None:
        over["out"] = args.out
    if args.seed is not None:
        over["seed"] = args.seed
    if args.strict:
        over["strict"] = True
    if args.workers is not None:
        over["workers"] = args.workers
    for key in ("data", "dataset", "dataset_config"):
        v = getattr(args, key, None)
        if v is not None:
            over[key] = v
    if getattr(args, "router_config", None) is not None:
        over["router_config"] = args.router_config
    return replace(cfg, **over)


def _corpus(cfg: RunConfig):
    ds = get_dataset(cfg.dataset, load_dataset_configs(cfg.dataset_config))
    if cfg.data is None:
        raise RoutecastError("no --data given and no 'data' in the run config")
    return ingest_long_csv(cfg.data, ds), ds


def cmd_ingest(cfg: RunConfig, args) -> None:
    corpus, ds = _corpus(cfg)
    write_long_csv(corpus, cfg.out / "corpus.csv")
    io.write_json(
        {"dataset": ds.name, "n_series": len(corpus), "lengths": {s.id: len(s) for s in corpus}},
        cfg.out / "ingest.json",
    )
    print(f"{len(corpus)} series -> {cfg.out / 'corpus.csv'}")


def cmd_features(cfg: RunConfig, args) -> None:
    corpus, ds = _corpus(cfg)
    feats = []
    for s in corpus:
        hist = s if args.no_holdout else split_last_h(s, ds.horizon).history
        feats.append(extract_all(hist))
    io.write_features(feats, cfg.out / "features.csv")
    print(f"features for {len(feats)} series -> {cfg.out / 'features.csv'}")


def cmd_route(cfg: RunConfig, args) -> None:
    rc = RouterConfig.load(cfg.router_config)
    decisions = [route(f, rc) for f in io.read_features(args.features)]
    io.write_decisions(decisions, cfg.out / "decisions.csv")
    n_fm = sum(d.target == "generalist" for d in decisions)
    print(f"{n_fm}/{len(decisions)} series routed to generalist -> {cfg.out / 'decisions.csv'}")


def cmd_calibrate(cfg: RunConfig, args) -> None:
    rc = RouterConfig.load(cfg.router_config)
    tables = decile_analysis(io.read_features(args.features), io.read_labels(args.labels))
    cal = calibrate(tables, rc)
    io.write_json(cal.config.to_dict(), cfg.out / "calibrated_config.json")
    io.write_json({"flagged": sorted(cal.flagged)}, cfg.out / "calibration.json")
    io.write_deciles(tables, cfg.out / "deciles.csv")
    print(json.dumps(cal.config.to_dict(), sort_keys=True))
    if cal.flagged:
        print(f"no qualifying decile (prior kept): {', '.join(sorted(cal.flagged))}")


def cmd_evaluate(cfg: RunConfig, args) -> None:
    corpus, ds = _corpus(cfg)
    store = ForecastStore.load(args.forecasts)
    splits = [split_last_h(s, ds.horizon) for s in corpus]
    forecasts = [
        ForecastResult(sp.id, store.get(sp.id, model, sp.horizon), model, 0)
        for model in store.models()
        for sp in splits
    ]
    report, records = evaluate_corpus(forecasts, splits, ds.name)
    io.write_eval(records, cfg.out / "eval.csv")
    io.write_json(report.to_dict(), cfg.out / "report.json")
    for name, s in sorted(report.models.items()):
        print(f"{name:>20s}  MASE={io.fmt(s.mase)}  sMAPE={io.fmt(s.smape)}  RMSE={io.fmt(s.rmse)}  n={s.n}")


def _pick(rows: list[dict], model: str | None, path: Path) -> dict[str, float | None]:
    models = sorted({r["model"] for r in rows})
    if model is None:
        if len(models) != 1:
            raise RoutecastError(f"{path} holds models {models}; choose one with --fm-model/--spec-model")
        model = models[0]
    return {r["series_id"]: r["mase"] for r in rows if r["model"] == model}


def cmd_pareto(cfg: RunConfig, args) -> None:
    scores = io.read_scores(args.scores)
    fm = _pick(io.read_eval(args.fm_eval), args.fm_model, args.fm_eval)
    spec = _pick(io.read_eval(args.spec_eval), args.spec_model, args.spec_eval)
    cost = dict(cfg.cost)
    if args.c_fm is not None:
        cost["c_fm"] = args.c_fm
    if args.c_spec is not None:
        cost["c_spec"] = args.c_spec
    cm = CostModel(**cost)
    outcomes, excluded = [], 0
    for sid in sorted(scores):
        if sid not in fm or sid not in spec:
            raise RoutecastError(f"no evaluation row for series {sid!r} in both eval files")
        if fm[sid] is None or spec[sid] is None:
            excluded += 1
            continue
        outcomes.append(SeriesOutcome(sid, scores[sid], fm[sid], spec[sid]))
    curve = pareto_sweep(outcomes, cm)
    io.write_curve(curve, cfg.out / "curve.csv")
    payload = knee_payload(curve, cm, excluded)
    io.write_json(payload, cfg.out / "knee.json")
    k = payload["knee"]
    print(f"knee: alpha={io.fmt(k['alpha'])} cost={io.fmt(k['cost'])} MASE={io.fmt(k['mase'])}")


def cmd_pipeline(cfg: RunConfig, args) -> None:
    res = run_pipeline(cfg)
    for name, s in sorted(res.report.models.items()):
        print(f"{name:>20s}  MASE={io.fmt(s.mase)}  sMAPE={io.fmt(s.smape)}  RMSE={io.fmt(s.rmse)}  n={s.n}")
    if res.skipped:
        print(f"skipped {len(res.skipped)} series (see report.json)")
    print(f"artifacts in {cfg.out}")


def cmd_coldstart(cfg: RunConfig, args) -> None:
    if args.context is not None:
        cfg = replace(cfg, cold_start_context=args.context)
    summary = run_coldstart(cfg)
    for name, s in summary["backends"].items():
        print(
            f"{name:>16s}  full MASE={io.fmt(s['full_mase'])}  cold MASE={io.fmt(s['cold_mase'])}"
            f"  ratio={io.fmt(s['degradation_ratio'])}"
        )


def cmd_bench(cfg: RunConfig, args) -> None:
    rows = run_bench(cfg)
    print(f"{'backend':>16s} {'class':>11s} {'p50 us':>10s} {'p95 us':>10s} {'mean us':>10s} {'calls/s':>10s}")
    for r in rows:
        print(
            f"{r.backend:>16s} {r.forecaster_class:>11s} {r.p50:10.1f} {r.p95:10.1f} {r.mean:10.1f}"
            f" {r.throughput:10.0f} {r.note}"
        )


def cmd_synth(cfg: RunConfig, args) -> None:
    from .synthetic import coldstart_corpus, generalist_store, mixed_corpus

    out = cfg.out
    if args.kind == "smoke":
        corpus = mixed_corpus(args.n, cfg.seed)
        horizon = 24
        generalist_store(corpus, horizon, cfg.seed).save(out / "fm_store.csv")
        run = {
            "data": "corpus.csv",
            "dataset": "smoke",
            "dataset_config": "datasets.json",
            "generalist": {"backend": "replay", "store": "fm_store.csv", "model": "fm"},
            "specialist": {"backend": "seasonal_naive"},
            "seed": cfg.seed,
        }
    else:
        corpus = coldstart_corpus(args.n, cfg.seed)
        horizon = 24
        run = {"data": "corpus.csv", "dataset": "smoke", "dataset_config": "datasets.json", "seed": cfg.seed}
    write_long_csv(corpus, out / "corpus.csv")
    io.write_json(
        {"smoke": {"frequency": "hourly", "seasonal_period": 168, "mase_m": 24, "horizon": horizon}},
        out / "datasets.json",
    )
    io.write_json(run, out / "run.json")
    print(f"{len(corpus)} series -> {out}; run with: routecast {('pipeline' if args.kind == 'smoke' else 'coldstart')} --config {out / 'run.json'}")


COMMANDS = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "route": cmd_route,
    "calibrate": cmd_calibrate,
    "evaluate": cmd_evaluate,
    "pareto": cmd_pareto,
    "pipeline": cmd_pipeline,
    "coldstart": cmd_coldstart,
    "bench": cmd_bench,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _run_config(args)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, args)
    except (RoutecastError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

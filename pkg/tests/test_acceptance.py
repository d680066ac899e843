"""Release acceptance criteria, each run at its stated tolerance and time budget.

A summary line per criterion is printed at the end of the pytest run.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from routecast.cli import main
from routecast.features import SeriesFeatures, coeff_variation, seasonal_acf, spectral_entropy, trend_r2
from routecast.forecasters import (
    ForecastRequest,
    LagRidge,
    SeasonalNaive,
    bench_latency,
    decompose,
    dlinear_fit,
    dlinear_predict,
    seasonal_naive,
)
from routecast.harness import coldstart_series, summarize_coldstart
from routecast.metrics import mase, rmse, smape
from routecast.pareto import CostModel, dominance_check, expected_cost, pareto_sweep
from routecast.router import GENERALIST, SPECIALIST, RouterConfig, calibrate, decile_analysis, route
from routecast.series import split_last_h
from routecast.synthetic import coldstart_corpus

from .oracles import entropy_oracle, mase_oracle, rmse_oracle, route_oracle, smape_oracle
from .planted import informative_outcomes, planted_corpus


@pytest.fixture
def criterion(record_property):
    """Tag the test with its criterion number; returns a setter for measured values."""
    started = time.perf_counter()

    def tag(n, title):
        record_property("criterion", n)
        record_property("title", title)

        def measured(text):
            record_property("measured", f"{text}; {time.perf_counter() - started:.2f}s")

        return measured

    return tag


def _close(a, b, rel=1e-9):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300) or a == b


def test_1_cost_equation(criterion):
    note = criterion(1, "expected cost at alpha=0.30 is 300.7, within 0.5 of the reported 301")
    c = expected_cost(0.30, CostModel(c_fm=1000, c_spec=1))
    note(f"cost={c:.6g}")
    assert c == pytest.approx(300.7, abs=1e-9)
    assert abs(c - 301) <= 0.5


def test_2_metric_oracles(criterion):
    note = criterion(2, "rmse/smape/mase match a brute-force evaluator on 1000 triples (1e-9 rel)")
    t0 = time.perf_counter()
    rng = np.random.default_rng(20)
    worst = 0.0
    n_undef = 0
    for i in range(1000):
        T = int(rng.integers(8, 80))
        H = int(rng.integers(1, 30))
        m = int(rng.integers(1, min(T - 1, 24) + 1))
        level = rng.uniform(-50, 50)
        hist = level + rng.normal(0, rng.uniform(0.01, 10), T)
        if i % 50 == 0:
            hist = np.full(T, level)  # exercise the undefined branch
        y = level + rng.normal(0, 5, H)
        yhat = y + rng.normal(0, 2, H)
        hl, yl, pl = list(hist), list(y), list(yhat)
        for ours, ref in (
            (rmse(y, yhat), rmse_oracle(yl, pl)),
            (smape(y, yhat), smape_oracle(yl, pl)),
            (mase(y, yhat, hist, m), mase_oracle(yl, pl, hl, m)),
        ):
            assert _close(ours, ref), (i, ours, ref)
            if ours is None:
                n_undef += 1
            else:
                worst = max(worst, abs(ours - ref) / max(abs(ref), 1e-300))
    hand = mase([5, 6], [5, 8], [1, 2, 3, 4], 2)
    elapsed = time.perf_counter() - t0
    note(f"max rel err {worst:.2e}, {n_undef} undefined MASE agreed, hand case {hand}")
    assert hand == pytest.approx(0.5, rel=1e-12)
    assert elapsed < 10


def test_3_routing_equivalence(criterion):
    note = criterion(3, "route() equals threshold counting on 16 combinations and 10,000 vectors")
    t0 = time.perf_counter()
    cfg = RouterConfig()
    pass_fail = {"entropy": (0.5, 0.1), "cv": (0.5, 0.1), "sacf": (0.9, 0.6), "trend": (0.01, 0.5)}
    names = tuple(pass_fail)
    for combo in itertools.product([True, False], repeat=4):
        vals = [pass_fail[n][0 if on else 1] for n, on in zip(names, combo)]
        d = route(SeriesFeatures("c", *vals, 100), cfg)
        sat, target = route_oracle(*vals, cfg)
        assert d.satisfied == {n for n, on in zip(names, combo) if on} == sat
        assert d.target == target

    rng = np.random.default_rng(3)
    grid = [cfg.entropy_min, cfg.cv_min, cfg.sacf_low, cfg.sacf_high, cfg.trend_r2_max]
    mismatches = monotone_violations = 0
    for i in range(10_000):
        v = rng.uniform(0, 1, 4)
        if i % 10 == 0:
            v[rng.integers(4)] = grid[rng.integers(len(grid))]  # land exactly on a threshold
        cv = None if i % 97 == 0 else float(v[1] * 2)
        f = SeriesFeatures(f"r{i}", float(v[0]), cv, float(v[2]), float(v[3]), 100)
        d = route(f, cfg)
        sat, target = route_oracle(f.spectral_entropy, cv, f.seasonal_acf, f.trend_r2, cfg)
        mismatches += (set(d.satisfied) != sat) or (d.target != target)
        targets = [route(f, RouterConfig(min_satisfied=k)).target for k in (1, 2, 3, 4)]
        for a, b in zip(targets, targets[1:]):
            monotone_violations += a == SPECIALIST and b == GENERALIST
    elapsed = time.perf_counter() - t0
    note(f"{mismatches} mismatches, {monotone_violations} monotonicity violations")
    assert mismatches == 0 and monotone_violations == 0
    assert elapsed < 5


def _decile_width(values, cut):
    edges = np.quantile(values, np.linspace(0, 1, 11))
    k = min(max(int(np.searchsorted(edges, cut)) - 1, 0), 9)
    return edges[k + 1] - edges[k]


def test_4_calibration_recovery(criterion):
    note = criterion(4, "calibrate() recovers planted thresholds within one decile width; idempotent")
    t0 = time.perf_counter()
    cols = {"entropy_min": "spectral_entropy", "cv_min": "coeff_variation", "trend_r2_max": "trend_r2",
            "sacf_low": "seasonal_acf", "sacf_high": "seasonal_acf"}
    errors = {}
    for feature in ("entropy", "cv", "trend", "sacf"):
        feats, labels, truth = planted_corpus(feature, n=1000, seed=42, flip=0.05)
        tables = decile_analysis(feats, labels)
        cal = calibrate(tables, RouterConfig())
        assert feature not in cal.flagged
        assert calibrate(tables, RouterConfig()) == cal
        assert calibrate(tables, cal.config).config == cal.config
        for key, cut in truth.items():
            values = np.array([getattr(f, cols[key]) for f in feats])
            err = abs(getattr(cal.config, key) - cut) / _decile_width(values, cut)
            errors[key] = err
            assert err <= 1.0, (key, getattr(cal.config, key), cut)
    elapsed = time.perf_counter() - t0
    note("error in decile widths: " + ", ".join(f"{k}={v:.2f}" for k, v in errors.items()))
    assert elapsed < 30


def test_5_pareto_dominance(criterion):
    note = criterion(5, "knee beats both pure deployments on MASE and costs less than pure FM")
    t0 = time.perf_counter()
    records, advantage = informative_outcomes(400, seed=5)
    rho = spearmanr([r.advantage_score for r in records], advantage).statistic
    cm = CostModel()
    curve = pareto_sweep(records, cm)
    rep = dominance_check(curve)
    elapsed = time.perf_counter() - t0
    note(
        f"rho={rho:.3f}, knee alpha={rep.knee.alpha} MASE={rep.knee.mase:.4f} cost={rep.knee.cost:.1f}, "
        f"pure spec {rep.pure_spec.mase:.4f}, pure FM {rep.pure_fm.mase:.4f}"
    )
    assert rho >= 0.8
    assert rep.knee.mase < rep.pure_spec.mase and rep.knee.mase < rep.pure_fm.mase
    assert rep.knee.cost < cm.c_fm
    assert rep.hybrid_dominates_pure_fm and rep.hybrid_dominates_pure_spec
    assert elapsed < 60


def test_6_cold_start(criterion):
    note = criterion(6, "48-point context: lagridge MASE ratio >= 2, seasonal naive changes < 10%")
    t0 = time.perf_counter()
    rows = []
    backends = [SeasonalNaive(24), LagRidge(mode="degrade")]
    for s in coldstart_corpus(8, seed=0):
        rows += coldstart_series(split_last_h(s, 24), backends, context=48, strict=True)
    summary = summarize_coldstart(rows)
    lr, sn = summary["lagridge"], summary["seasonal_naive"]
    elapsed = time.perf_counter() - t0
    note(
        f"lagridge {lr['full_mase']:.3f} -> {lr['cold_mase']:.3f} (x{lr['degradation_ratio']:.2f}); "
        f"seasonal naive {sn['full_mase']:.3f} -> {sn['cold_mase']:.3f} (x{sn['degradation_ratio']:.3f})"
    )
    assert lr["degradation_ratio"] >= 2
    assert abs(sn["degradation_ratio"] - 1) < 0.10
    assert all(r.warnings == "dropped features: lag168, roll168" for r in rows if r.backend == "lagridge")
    assert elapsed < 60


def test_7_feature_invariants(criterion):
    note = criterion(7, "feature shift/scale invariance on 500 series (1e-9); entropy ordering on 20 seeds")
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(48, 400))
        t = np.arange(n)
        x = rng.uniform(-10, 10) + rng.uniform(0, 5) * np.sin(2 * np.pi * t / 24) + rng.normal(0, rng.uniform(0.1, 3), n)
        x += rng.uniform(-0.05, 0.05) * t
        c, k = rng.uniform(-100, 100), 10 ** rng.uniform(-3, 3)
        shift_inv = (spectral_entropy, trend_r2, lambda v: seasonal_acf(v, 24))
        for fn in shift_inv:
            base = fn(x)
            for other in (fn(x + c), fn(k * x)):
                worst = max(worst, abs(other - base))
        cv, cvk = coeff_variation(x), coeff_variation(k * x)
        assert (cv is None) == (cvk is None)
        if cv is not None:
            worst = max(worst, abs(cvk - cv) / max(cv, 1.0))

    orderings = 0
    for seed in range(20):
        r = np.random.default_rng(seed)
        sine = np.sin(2 * np.pi * np.arange(256) / 16 + r.uniform(0, 2 * np.pi))
        noisy = sine + r.normal(0, 0.5, 256)
        noise = r.normal(size=256)
        h = [spectral_entropy(v) for v in (sine, noisy, noise)]
        ref = [entropy_oracle(list(v)) for v in (sine, noisy, noise)]
        assert np.allclose(h, ref, atol=1e-9)
        orderings += h[0] < h[1] < h[2]
    elapsed = time.perf_counter() - t0
    note(f"max deviation {worst:.2e}; ordering held on {orderings}/20 seeds")
    assert worst <= 1e-9
    assert orderings == 20
    assert elapsed < 30


def test_8_latency(criterion):
    note = criterion(8, "168-point context: dlinear p95 < 10 ms, seasonal naive p95 < 1 ms")
    t0 = time.perf_counter()
    s = coldstart_corpus(1, seed=8)[0]
    y = s.values
    model = dlinear_fit(y[:-24], lookback=168, horizon=24, kernel=25)
    ctx = ForecastRequest(s.id, y[-24 - 168 : -24], 24)
    dl = bench_latency(lambda: dlinear_predict(model, ctx), iterations=500)
    sn = bench_latency(lambda: seasonal_naive(ctx, 24), iterations=500)
    elapsed = time.perf_counter() - t0
    note(f"dlinear p50={dl.p50:.1f}us p95={dl.p95:.1f}us; seasonal naive p50={sn.p50:.1f}us p95={sn.p95:.1f}us")
    assert dl.p95 < 10_000
    assert sn.p95 < 1_000
    assert elapsed < 60


def test_9_dlinear_fidelity(criterion):
    note = criterion(9, "DLinear: linear series error < 1e-6, sinusoid MASE < 0.1, decomposition identity")
    t0 = time.perf_counter()
    y = 2.0 * np.arange(300)
    model = dlinear_fit(y[:-8], lookback=24, horizon=8, kernel=5)
    lin_err = float(np.max(np.abs(dlinear_predict(model, ForecastRequest("l", y[:-8], 8)).values - y[-8:])))

    S = 24
    t = np.arange(S * 12)
    sine = 5 + np.sin(2 * np.pi * t / S)
    train, test = sine[:-S], sine[-S:]
    model = dlinear_fit(train, lookback=2 * S, horizon=S, kernel=25)
    pred = dlinear_predict(model, ForecastRequest("s", train, S)).values
    # a pure cycle has zero lag-S in-sample differences, so the scale uses lag 1
    sine_mase = mase_oracle(list(test), list(pred), list(train), 1)

    rng = np.random.default_rng(9)
    exact = total = 0
    worst_ulps = 0.0
    for _ in range(500):
        w = 100 + rng.normal(size=168) * rng.uniform(0.1, 10)
        trend, rem = decompose(w, 25)
        assert np.array_equal(rem, w - trend)
        exact += int(np.sum(trend + rem == w))
        total += w.size
        wild = rng.normal(size=168) * 10 ** rng.uniform(-3, 5) + rng.normal() * 10 ** rng.uniform(-3, 5)
        tr, re = decompose(wild, 25)
        ulps = np.abs(tr + re - wild) / np.spacing(np.maximum(np.abs(tr), np.abs(re)))
        worst_ulps = max(worst_ulps, float(ulps.max()))
    elapsed = time.perf_counter() - t0
    note(
        f"linear max err {lin_err:.1e}, sinusoid MASE {sine_mase:.2e}, "
        f"identity bitwise on {exact}/{total} positive-level points, worst {worst_ulps:.1f} ulp elsewhere"
    )
    assert lin_err < 1e-6
    assert sine_mase < 0.1
    assert exact == total
    assert worst_ulps <= 1.0
    assert elapsed < 30


def test_10_pipeline_determinism(criterion, tmp_path):
    note = criterion(10, "pipeline twice with the same seed gives byte-identical artifacts")
    t0 = time.perf_counter()
    smoke = tmp_path / "smoke"
    assert main(["synth", "--out", str(smoke), "--n", "20", "--seed", "0"]) == 0
    outs = [tmp_path / "a", tmp_path / "b"]
    for out, workers in zip(outs, ("1", "4")):
        assert main(["pipeline", "--config", str(smoke / "run.json"), "--out", str(out), "--workers", workers]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    same = [n for n in names if (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()]
    elapsed = time.perf_counter() - t0
    note(f"{len(same)}/{len(names)} artifacts identical")
    assert len(names) >= 6 and same == names
    assert elapsed < 60

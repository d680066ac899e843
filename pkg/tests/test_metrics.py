import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from routecast.errors import HistoryTooShort, LengthMismatch, MissingForecast
from routecast.forecasters import DLinear, ForecastResult, SeasonalNaive
from routecast.metrics import evaluate_corpus, mase, rmse, smape
from routecast.series import Series, split_last_h
from routecast.synthetic import mixed_corpus

from .oracles import mase_oracle, rmse_oracle, smape_oracle


def test_rmse_examples():
    assert rmse([1, 2], [1, 2]) == 0.0
    assert rmse([1, 2], [1, 4]) == pytest.approx(math.sqrt(2))
    with pytest.raises(LengthMismatch):
        rmse([1, 2], [1])


def test_smape_examples():
    assert smape([3, 4], [3, 4]) == 0.0
    assert smape([100], [50]) == pytest.approx(200 / 3)
    assert smape([1], [-1]) == pytest.approx(200.0)
    assert smape([0, 1], [0, 1]) == 0.0


def test_mase_examples():
    assert mase([5, 6], [5, 8], [1, 2, 3, 4], 2) == pytest.approx(0.5)
    assert mase([5, 6], [5, 6], [1, 2, 3, 4], 2) == 0.0
    assert mase([5, 6], [5, 8], [3, 3, 3, 3], 2) is None
    with pytest.raises(HistoryTooShort):
        mase([1], [1], [1, 2], 2)


vals = st.floats(-1e4, 1e4, allow_nan=False)


@settings(max_examples=200)
@given(st.lists(st.tuples(vals, vals), min_size=1, max_size=20), st.lists(vals, min_size=6, max_size=30),
       st.integers(1, 5), st.floats(0.01, 100))
def test_scale_behaviour(pairs, hist, m, k):
    y = np.array([p[0] for p in pairs])
    yhat = np.array([p[1] for p in pairs])
    h = np.array(hist)
    assert rmse(k * y, k * yhat) == pytest.approx(k * rmse(y, yhat), rel=1e-9, abs=1e-9)
    assert smape(k * y, k * yhat) == pytest.approx(smape(y, yhat), rel=1e-9, abs=1e-9)
    base = mase(y, yhat, h, m)
    if base is not None and mase(y, yhat, k * h, m) is not None:
        assert mase(k * y, k * yhat, k * h, m) == pytest.approx(base, rel=1e-9)


def test_seasonal_naive_mase_closed_form():
    rng = np.random.default_rng(0)
    y = rng.normal(size=60)
    hist, test = y[:48], y[48:]
    m = 12
    pred = np.resize(hist[-m:], 12)
    direct = np.mean(np.abs(test - pred)) / np.mean(np.abs(hist[m:] - hist[:-m]))
    assert mase(test, pred, hist, m) == pytest.approx(direct, rel=1e-12)


def _result(sid, values, model):
    return ForecastResult(sid, np.asarray(values, dtype=float), model, 0)


def test_evaluate_corpus_aggregate():
    splits = [split_last_h(Series(i, range(6), [0, 1, 0, 1, 0, 1]), 2) for i in ("a", "b")]
    # scale is 1 for lag-1; errors 0.4 and 0.6
    fc = [_result("a", [0.4, 1.0], "m"), _result("b", [0.6, 1.0], "m")]
    report, records = evaluate_corpus(fc, splits, m=1)
    assert [r.mase for r in records] == pytest.approx([0.2, 0.3])
    assert report.models["m"].mase == pytest.approx(0.25)
    assert report.models["m"].n == 2


def test_evaluate_corpus_undefined_counted():
    splits = [split_last_h(Series("c", range(5), [2, 2, 2, 2, 3]), 1),
              split_last_h(Series("d", range(5), [1, 2, 3, 4, 5]), 1)]
    fc = [_result("c", [3], "m"), _result("d", [4], "m")]
    report, _ = evaluate_corpus(fc, splits, m=1)
    assert report.models["m"].mase_undefined == 1
    assert report.models["m"].mase == pytest.approx(1.0)
    assert report.to_dict()["models"]["m"]["mase_undefined"] == 1


def test_evaluate_corpus_missing():
    splits = [split_last_h(Series(i, range(6), np.arange(6.0)), 2) for i in ("a", "b")]
    with pytest.raises(MissingForecast, match=r"\[b\]"):
        evaluate_corpus([_result("a", [1, 1], "m")], splits, m=1)
    with pytest.raises(MissingForecast):
        evaluate_corpus([_result("zz", [1, 1], "m")], splits, m=1)


def test_naive_against_itself_has_zero_rmse():
    t = np.arange(96)
    s = Series("p", t, np.tile(np.arange(24.0), 4), seasonal_period=24, mase_m=24)
    sp = split_last_h(s, 24)
    r = SeasonalNaive().forecast(sp.history, 24)
    report, _ = evaluate_corpus([r], [sp], m=24)
    assert report.models["seasonal_naive"].rmse == 0.0


def test_ranking_matches_oracle_on_50_series():
    corpus = mixed_corpus(50, seed=9, length=504)
    splits = [split_last_h(s, 24) for s in corpus]
    fcs = []
    for sp in splits:
        fcs.append(SeasonalNaive().forecast(sp.history, 24))
        fcs.append(DLinear().forecast(sp.history, 24))
    report, _ = evaluate_corpus(fcs, splits, m=24)

    def oracle_mean(model, metric):
        by_id = {f.series_id: f for f in fcs if f.model_name == model}
        vals = []
        for sp in splits:
            y, p = list(sp.actuals), list(by_id[sp.id].values)
            v = {"mase": lambda: mase_oracle(y, p, list(sp.history.values), 24),
                 "smape": lambda: smape_oracle(y, p),
                 "rmse": lambda: rmse_oracle(y, p)}[metric]()
            if v is not None:
                vals.append(v)
        return sum(vals) / len(vals)

    for metric in ("mase", "smape", "rmse"):
        ours = sorted(report.models, key=lambda n: getattr(report.models[n], metric))
        theirs = sorted(report.models, key=lambda n: oracle_mean(n, metric))
        assert ours == theirs
        for name in report.models:
            assert getattr(report.models[name], metric) == pytest.approx(oracle_mean(name, metric), rel=1e-9)

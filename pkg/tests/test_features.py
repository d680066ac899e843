import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from routecast.errors import InvalidPeriod, TooShort
from routecast.features import (
    CV_UNDEFINED,
    coeff_variation,
    extract_all,
    seasonal_acf,
    spectral_entropy,
    trend_r2,
)
from routecast.series import Series

from .oracles import entropy_oracle


def _sinusoid(n=256, period=16):
    return np.sin(2 * np.pi * np.arange(n) / period)


@pytest.mark.parametrize("n", [8, 9, 33, 64])
def test_entropy_matches_dft_oracle(n):
    x = np.random.default_rng(n).normal(size=n)
    assert spectral_entropy(x) == pytest.approx(entropy_oracle(list(x)), abs=1e-12)


def test_entropy_constant_is_zero():
    assert spectral_entropy([5.0] * 20) == 0.0


def test_entropy_ordering_example():
    rng = np.random.default_rng(0)
    sine = _sinusoid()
    noisy = sine + rng.normal(0, 0.5, 256)
    noise = rng.normal(size=256)
    oracle = [entropy_oracle(list(v)) for v in (sine, noisy, noise)]
    assert oracle[0] < oracle[1] < oracle[2]
    got = [spectral_entropy(v) for v in (sine, noisy, noise)]
    assert got[0] < got[1] < got[2]


def test_entropy_uniform_noise_near_one():
    x = np.random.default_rng(1).uniform(size=1024)
    assert spectral_entropy(x) > 0.9


def test_entropy_too_short():
    with pytest.raises(TooShort):
        spectral_entropy(np.ones(7))


def test_cv_examples():
    assert coeff_variation([3, 3, 3]) == 0.0
    assert coeff_variation([2, 4, 6, 8]) == pytest.approx(math.sqrt(5) / 5, abs=1e-12)
    assert coeff_variation([-1, 1, -1, 1]) is CV_UNDEFINED
    with pytest.raises(TooShort):
        coeff_variation([1.0])


def test_sacf_periodic_is_one():
    S = 6
    x = np.tile([1.0, 4.0, 2.0, 8.0, 5.0, 7.0], 4)
    # hand oracle: lagged pairs are identical, so the mean lagged product equals the variance
    d = x - x.mean()
    oracle = np.mean(d[S:] * d[:-S]) / np.mean(d * d)
    assert oracle == pytest.approx(1.0)
    assert seasonal_acf(x, S) == pytest.approx(oracle, abs=1e-6)


def test_sacf_noise_small():
    x = np.random.default_rng(2).normal(size=1000)
    assert abs(seasonal_acf(x, 24)) < 0.1


def test_sacf_errors_and_constant():
    assert seasonal_acf(np.ones(10), 2) == 0.0
    with pytest.raises(TooShort):
        seasonal_acf(np.arange(47.0), 24)
    with pytest.raises(InvalidPeriod):
        seasonal_acf(np.arange(10.0), 0)


def test_trend_examples():
    t = np.arange(50.0)
    assert trend_r2(2 * t + 3) == pytest.approx(1.0, abs=1e-9)
    assert trend_r2(np.full(5, 2.0)) == 0.0
    tri = np.concatenate([np.arange(0, 10), np.arange(10, -1, -1)]).astype(float)
    # closed-form OLS slope on the symmetric triangle
    tc = np.arange(len(tri)) - (len(tri) - 1) / 2
    slope = np.dot(tc, tri - tri.mean()) / np.dot(tc, tc)
    r2_oracle = slope**2 * np.dot(tc, tc) / np.dot(tri - tri.mean(), tri - tri.mean())
    assert r2_oracle < 0.05
    assert trend_r2(tri) == pytest.approx(r2_oracle, abs=1e-12)
    with pytest.raises(TooShort):
        trend_r2([1.0, 2.0])


def test_extract_all_composes_and_uses_history_only():
    rng = np.random.default_rng(4)
    y = 10 + _sinusoid(200, 24) + rng.normal(0, 0.2, 200)
    s = Series("x", np.arange(200), y, seasonal_period=24)
    f = extract_all(s, train_fraction=0.5)
    head = y[:100]
    assert f.n_points == 100
    assert f.spectral_entropy == spectral_entropy(head)
    assert f.coeff_variation == coeff_variation(head)
    assert f.seasonal_acf == seasonal_acf(head, 24)
    assert f.trend_r2 == trend_r2(head)


def test_extract_all_error_names_series():
    s = Series("tiny", np.arange(10), np.arange(10.0), seasonal_period=24)
    with pytest.raises(TooShort, match=r"\[tiny\]"):
        extract_all(s)


finite_series = arrays(
    np.float64,
    st.integers(48, 120),
    elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False),
).filter(lambda x: np.ptp(x) > 1e-3)


@settings(max_examples=150, deadline=None)
@given(finite_series)
def test_ranges(x):
    s = Series("r", np.arange(len(x)), x, seasonal_period=24)
    f = extract_all(s)  # SeriesFeatures validates ranges on construction
    assert 0 <= f.spectral_entropy <= 1 and 0 <= f.trend_r2 <= 1 and -1 <= f.seasonal_acf <= 1


@settings(max_examples=150, deadline=None)
@given(finite_series, st.floats(-1e3, 1e3), st.floats(0.01, 100))
def test_shift_and_scale_invariance(x, c, k):
    for fn in (spectral_entropy, trend_r2, lambda v: seasonal_acf(v, 24)):
        base = fn(x)
        assert fn(x + c) == pytest.approx(base, abs=1e-9)
        assert fn(k * x) == pytest.approx(base, abs=1e-9)
    cv = coeff_variation(x)
    if cv is None:
        assert coeff_variation(k * x) is None
    else:
        assert coeff_variation(k * x) == pytest.approx(cv, rel=1e-9, abs=1e-12)

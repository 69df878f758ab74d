import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ecorev.core import Prefix
from ecorev.features import FEATURE_NAMES, N_FEATURES, extract, extract_array, feature_index


def f(x, name):
    return extract_array(x)[feature_index(name)]


def test_feature_count():
    assert 18 <= N_FEATURES <= 24 and N_FEATURES == len(FEATURE_NAMES)
    assert len(extract_array([1.0, 2.0])) == N_FEATURES


def test_constant_series():
    x = [5.0, 5.0, 5.0, 5.0]
    assert f(x, "mean") == 5.0
    assert f(x, "std") == 0.0
    assert f(x, "slope") == 0.0
    assert f(x, "autocorr_lag1") == 0.0
    assert f(x, "autocorr_lag2") == 0.0
    assert f(x, "skewness") == 0.0 and f(x, "kurtosis") == 0.0


def test_ramp():
    x = [1.0, 2.0, 3.0, 4.0]
    assert f(x, "mean") == 2.5
    assert f(x, "slope") == pytest.approx(1.0)
    assert f(x, "intercept") == pytest.approx(1.0)
    assert f(x, "mean_abs_diff") == pytest.approx(1.0)
    assert f(x, "iqr") == pytest.approx(1.5)
    # lag-1 autocorrelation of a centred 4-ramp: (-1.5*-0.5 + -0.5*0.5 + 0.5*1.5) / 5
    assert f(x, "autocorr_lag1") == pytest.approx(0.25)


def test_single_point():
    out = extract_array([7.0])
    assert out[feature_index("mean")] == 7.0
    assert out[feature_index("std")] == 0.0
    for name in ("energy",):
        assert out[feature_index(name)] == 49.0
    for name in ("dominant_freq_index", "dominant_freq_magnitude", "spectral_centroid"):
        assert out[feature_index(name)] == 0.0
    assert np.all(np.isfinite(out))


def test_spectral_features_on_sinusoid():
    n = 32
    x = np.sin(2 * np.pi * 4 * np.arange(n) / n)
    assert f(x, "dominant_freq_index") == 4
    assert f(x, "dominant_freq_magnitude") == pytest.approx(n / 2)
    assert f(x, "spectral_centroid") == pytest.approx(4 / n)
    assert f(x, "zero_crossings") >= 7


def test_empty_prefix_rejected():
    with pytest.raises(ValueError):
        extract(Prefix(None, 1, []))


finite = st.floats(-1e3, 1e3, allow_nan=False)
series = arrays(float, st.integers(1, 40), elements=finite)


@given(series)
def test_always_finite_and_fixed_length(x):
    out = extract_array(x)
    assert out.shape == (N_FEATURES,)
    assert np.all(np.isfinite(out))
    assert np.array_equal(out, extract_array(x.copy()))


@given(series, st.floats(-100, 100))
def test_mean_shift_equivariance(x, c):
    assert f(x + c, "mean") == pytest.approx(f(x, "mean") + c, abs=1e-9)


@settings(max_examples=100)
@given(arrays(float, st.integers(2, 40), elements=st.floats(-100, 100)),
       st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_std_scale_equivariance(x, c):
    if np.ptp(x) < 1e-6:
        return
    assert f(c * x, "std") == pytest.approx(abs(c) * f(x, "std"), rel=1e-9)

"""Fixed-length feature extraction from a series prefix.

Twenty features covering the statistical, temporal and spectral domains.
Any feature whose denominator vanishes (zero variance, too few points for a
lag or a spectrum) falls back to 0, so the output is always finite.
"""
from __future__ import annotations

import numpy as np

from .core import Prefix

FEATURE_NAMES = (
    # statistical
    "mean",
    "std",
    "min",
    "max",
    "median",
    "skewness",
    "kurtosis",
    "iqr",
    # temporal
    "first",
    "last",
    "slope",
    "intercept",
    "mean_abs_diff",
    "zero_crossings",
    "autocorr_lag1",
    "autocorr_lag2",
    # spectral
    "energy",
    "dominant_freq_index",
    "dominant_freq_magnitude",
    "spectral_centroid",
)
N_FEATURES = len(FEATURE_NAMES)
_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}


def feature_index(name: str) -> int:
    return _INDEX[name]


def _autocorr(centered: np.ndarray, var_sum: float, lag: int) -> float:
    if centered.size < lag + 1 or var_sum <= 0.0:
        return 0.0
    return float(np.dot(centered[:-lag], centered[lag:]) / var_sum)


def extract_array(x) -> np.ndarray:
    """Feature vector for a 1-d array of measurements."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-d prefix")
    n = x.size
    if n == 0:
        raise ValueError("cannot extract features from an empty prefix")

    out = np.zeros(N_FEATURES)
    mean = float(np.mean(x))
    centered = x - mean
    m2 = float(np.mean(centered**2))
    std = float(np.sqrt(m2))
    # values that differ only by rounding noise are treated as constant
    degenerate = m2 <= (1e-12 * max(1.0, abs(mean))) ** 2

    out[0] = mean
    out[1] = 0.0 if degenerate else std
    out[2] = float(np.min(x))
    out[3] = float(np.max(x))
    out[4] = float(np.median(x))
    if not degenerate:
        out[5] = float(np.mean(centered**3) / m2**1.5)
        out[6] = float(np.mean(centered**4) / m2**2 - 3.0)
    q75, q25 = np.percentile(x, [75, 25])
    out[7] = float(q75 - q25)

    out[8] = float(x[0])
    out[9] = float(x[-1])
    if n >= 2:
        idx = np.arange(n, dtype=float)
        idx_c = idx - idx.mean()
        slope = float(np.dot(idx_c, centered) / np.dot(idx_c, idx_c))
        out[10] = slope
        out[11] = mean - slope * idx.mean()
        out[12] = float(np.mean(np.abs(np.diff(x))))
    else:
        out[11] = mean
    if not degenerate:
        signs = np.sign(centered)
        signs = signs[signs != 0]
        out[13] = float(np.count_nonzero(signs[1:] != signs[:-1]))
        var_sum = float(np.dot(centered, centered))
        out[14] = _autocorr(centered, var_sum, 1)
        out[15] = _autocorr(centered, var_sum, 2)

    out[16] = float(np.dot(x, x))
    if n >= 2 and not degenerate:
        mags = np.abs(np.fft.rfft(centered))[1:]
        freqs = np.arange(1, mags.size + 1, dtype=float) / n
        k = int(np.argmax(mags))
        out[17] = float(k + 1)
        out[18] = float(mags[k])
        total = float(mags.sum())
        out[19] = float(np.dot(freqs, mags) / total) if total > 0 else 0.0
    return out


def extract(prefix: Prefix) -> np.ndarray:
    """Feature vector for a :class:`Prefix`."""
    return extract_array(prefix.values)


def extract_matrix(X, length: int) -> np.ndarray:
    """Features of the first ``length`` points of every row of ``X``."""
    X = np.asarray(X, dtype=float)
    return np.vstack([extract_array(row[:length]) for row in X])

"""Per-checkpoint probabilistic binary classifiers.

A :class:`ClassifierChain` holds one fitted model per checkpoint; the model at
checkpoint ``j`` only ever sees the first ``checkpoints[j]`` measurements.
Any object with ``fit(X, y)`` and ``predict_proba(X) -> P(class 1)`` can be
plugged in through ``model_factory``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .core import Prefix
from .features import extract_array, extract_matrix


class ProbabilisticClassifier(Protocol):
    def fit(self, X: np.ndarray, y: np.ndarray) -> "ProbabilisticClassifier": ...

    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...


class TrainingError(ValueError):
    pass


@dataclass
class ClassifierConfig:
    learning_rate: float = 0.5
    n_iter: int = 500
    l2: float = 1e-2


def _sigmoid(z):
    # clipped to keep exp finite
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


class LogisticRegressionGD:
    """L2-regularised logistic regression fitted by full-batch gradient descent.

    Weights start at zero and the iteration budget is fixed, so a fit is a
    deterministic function of the data.
    """

    def __init__(self, learning_rate=0.5, n_iter=500, l2=1e-2):
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.l2 = l2
        self.coef_ = None
        self.intercept_ = 0.0

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        for _ in range(self.n_iter):
            p = _sigmoid(X @ w + b)
            err = p - y
            grad_w = X.T @ err / n + self.l2 * w
            grad_b = float(err.mean())
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.coef_ = w
        self.intercept_ = b
        return self

    def predict_proba(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return _sigmoid(X @ self.coef_ + self.intercept_)

    def get_params(self):
        return {"coef": self.coef_.tolist(), "intercept": float(self.intercept_)}

    @classmethod
    def from_params(cls, params, **hyper):
        obj = cls(**hyper)
        obj.coef_ = np.asarray(params["coef"], dtype=float)
        obj.intercept_ = float(params["intercept"])
        return obj


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, F):
        mean = F.mean(axis=0)
        scale = F.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, F):
        return (F - self.mean) / self.scale


def predicted_label(confidence):
    """Label 1 iff the class-1 confidence is at least 0.5 (ties go to 1)."""
    return (np.asarray(confidence) >= 0.5).astype(int)


@dataclass
class ClassifierChain:
    checkpoints: tuple
    models: list
    standardizers: list
    config: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __len__(self):
        return len(self.checkpoints)

    def _checkpoint_position(self, t: int) -> int:
        if not 1 <= t <= len(self.checkpoints):
            raise ValueError(f"unknown checkpoint {t}; chain has {len(self.checkpoints)}")
        return t - 1

    def confidence_at(self, j: int, values) -> float:
        """Class-1 confidence of the model at 0-based checkpoint ``j``."""
        f = self.standardizers[j].transform(extract_array(values)[None, :])
        return float(self.models[j].predict_proba(f)[0])

    def confidences(self, X) -> np.ndarray:
        """Confidence matrix of shape ``(n_series, n_checkpoints)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], len(self.checkpoints)))
        for j, n in enumerate(self.checkpoints):
            F = self.standardizers[j].transform(extract_matrix(X, n))
            out[:, j] = self.models[j].predict_proba(F)
        return np.clip(out, 0.0, 1.0)


def predict_confidence(chain: ClassifierChain, prefix: Prefix) -> float:
    j = chain._checkpoint_position(prefix.t)
    if len(prefix) != chain.checkpoints[j]:
        raise ValueError(
            f"prefix has {len(prefix)} points, checkpoint {prefix.t} expects {chain.checkpoints[j]}"
        )
    return chain.confidence_at(j, prefix.values)


def fit_chain(
    X,
    y,
    checkpoints: Sequence[int],
    config: ClassifierConfig | None = None,
    model_factory: Callable[[], ProbabilisticClassifier] | None = None,
) -> ClassifierChain:
    """Fit one classifier per checkpoint on prefixes of the training series."""
    config = config or ClassifierConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if X.shape[0] != y.size:
        raise TrainingError("X and y disagree on the number of series")
    counts = np.bincount(y, minlength=2)
    if counts.size > 2:
        raise TrainingError("labels must be 0/1")
    if counts.min() < 2:
        raise TrainingError(f"need at least 2 training series per class, got {counts.tolist()}")
    if max(checkpoints) > X.shape[1]:
        raise TrainingError("checkpoint grid exceeds the series length")
    if model_factory is None:
        def model_factory():
            return LogisticRegressionGD(config.learning_rate, config.n_iter, config.l2)

    models, standardizers = [], []
    for n in checkpoints:
        F = extract_matrix(X, n)
        std = Standardizer.fit(F)
        models.append(model_factory().fit(std.transform(F), y))
        standardizers.append(std)
    return ClassifierChain(tuple(int(c) for c in checkpoints), models, standardizers, config)

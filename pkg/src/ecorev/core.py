"""Domain types shared across the package: series, prefixes, costs and decisions.

Times are expressed in raw measurement counts (``1 <= t <= T``), so a decision
taken after observing the first ``t`` points of a length-``T`` series pays a
delay cost of ``alpha * t / T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CLASSES",
    "INFINITE_COST",
    "InfiniteCost",
    "TimeSeries",
    "Prefix",
    "CostModel",
    "DecisionSequence",
    "delay_cost",
    "total_cost",
    "is_infinite",
]

CLASSES = (0, 1)


class InfiniteCost:
    """Sentinel for the cost of holding no decision at all.

    It compares greater than any real number and refuses arithmetic, so it
    never leaks into sums as ``inf``/``nan``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE_COST"

    def __float__(self):
        return math.inf

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INFINITE_COST")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INFINITE_COST = InfiniteCost()


def is_infinite(cost) -> bool:
    return cost is INFINITE_COST


def _check_label(label) -> int:
    label = int(label)
    if label not in CLASSES:
        raise ValueError(f"label must be 0 or 1, got {label}")
    return label


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A full-length univariate series with an optional binary label."""

    values: np.ndarray
    label: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("a time series is a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise ValueError("time series values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.label is not None:
            object.__setattr__(self, "label", _check_label(self.label))

    @property
    def T(self) -> int:
        return int(self.values.size)

    def prefix(self, t: int, checkpoints: Sequence[int]) -> "Prefix":
        """Truncate to checkpoint ``t`` (1-based index into ``checkpoints``)."""
        if not 1 <= t <= len(checkpoints):
            raise ValueError(f"checkpoint index {t} outside 1..{len(checkpoints)}")
        n = int(checkpoints[t - 1])
        if n > self.T:
            raise ValueError("checkpoint grid exceeds the series length")
        return Prefix(parent=self, t=t, values=self.values[:n])


@dataclass(frozen=True, eq=False)
class Prefix:
    """The first ``checkpoints[t-1]`` measurements of ``parent``."""

    parent: TimeSeries | None
    t: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("prefix values must be 1-d")
        if self.t < 1:
            raise ValueError("checkpoint index is 1-based")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return int(self.values.size)


@dataclass(frozen=True)
class CostModel:
    """Misclassification matrix, linear delay slope and change-of-decision cost.

    ``misclassification[y_hat][y]`` is the cost of predicting ``y_hat`` when
    the truth is ``y``.
    """

    alpha: float = 0.0
    beta: float = 0.0
    misclassification: tuple = ((0.0, 1.0), (1.0, 0.0))

    def __post_init__(self):
        cm = np.asarray(self.misclassification, dtype=float)
        if cm.shape != (2, 2):
            raise ValueError("misclassification matrix must be 2x2")
        if np.any(cm < 0) or not np.all(np.isfinite(cm)):
            raise ValueError("misclassification costs must be finite and >= 0")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be a finite non-negative real")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be a finite non-negative real")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(
            self, "misclassification", tuple(tuple(float(v) for v in row) for row in cm)
        )

    @property
    def cm(self) -> np.ndarray:
        return np.array(self.misclassification)

    @property
    def max_misclassification(self) -> float:
        return max(max(row) for row in self.misclassification)

    def misclassification_cost(self, y_hat: int, y: int) -> float:
        return self.misclassification[y_hat][y]

    def change_cost(self, new: int, old: int) -> float:
        return self.beta if new != old else 0.0

    def delay(self, t, T: int):
        return delay_cost(self, t, T)

    def with_changes(self, **kwargs) -> "CostModel":
        params = dict(alpha=self.alpha, beta=self.beta,
                      misclassification=self.misclassification)
        params.update(kwargs)
        return CostModel(**params)


def delay_cost(model: CostModel, t: int, T: int) -> float:
    """Linear delay cost ``alpha * t / T`` for ``1 <= t <= T``."""
    if T < 1:
        raise ValueError("series length must be positive")
    if not 1 <= t <= T:
        raise ValueError(f"time {t} outside 1..{T}")
    return model.alpha * t / T


@dataclass(frozen=True)
class DecisionSequence:
    """Ordered ``(time, label)`` decisions; consecutive labels always differ."""

    decisions: tuple = ()

    def __post_init__(self):
        decisions = tuple((int(t), _check_label(y)) for t, y in self.decisions)
        for (t0, y0), (t1, y1) in zip(decisions, decisions[1:]):
            if t1 <= t0:
                raise ValueError("decision times must be strictly increasing")
            if y1 == y0:
                raise ValueError("consecutive decisions must change the label")
        if decisions and decisions[0][0] < 1:
            raise ValueError("decision times start at 1")
        object.__setattr__(self, "decisions", decisions)

    def __len__(self):
        return len(self.decisions)

    def __iter__(self):
        return iter(self.decisions)

    def __bool__(self):
        return bool(self.decisions)

    @property
    def last(self) -> tuple[int, int]:
        return self.decisions[-1]

    @property
    def labels(self) -> list[int]:
        return [y for _, y in self.decisions]

    @property
    def times(self) -> list[int]:
        return [t for t, _ in self.decisions]

    def append(self, t: int, label: int) -> "DecisionSequence":
        return DecisionSequence(self.decisions + ((t, label),))

    def paid_change_cost(self, model: CostModel) -> float:
        total = 0.0
        for (_, old), (_, new) in zip(self.decisions, self.decisions[1:]):
            total += model.change_cost(new, old)
        return total

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "DecisionSequence":
        return cls(tuple(pairs))


def total_cost(seq: DecisionSequence, truth: int, model: CostModel, T: int):
    """Misclassification of the last decision + its delay + every change paid.

    An empty sequence costs ``INFINITE_COST``.
    """
    if not seq:
        return INFINITE_COST
    t_last, y_last = seq.last
    if t_last > T:
        raise ValueError(f"decision time {t_last} beyond series length {T}")
    return (
        model.misclassification_cost(y_last, _check_label(truth))
        + delay_cost(model, t_last, T)
        + seq.paid_change_cost(model)
    )

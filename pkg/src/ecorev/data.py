"""Datasets: UCR-style text ingestion, splits, checkpoint grid, synthetic series."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import TimeSeries

N_CHECKPOINTS = 20


class DatasetError(ValueError):
    pass


class SplitError(ValueError):
    pass


def checkpoint_grid(T: int, n: int = N_CHECKPOINTS) -> tuple:
    """``floor(k*T/n)`` for ``k = 1..n``, deduplicated, zeros dropped, ``T`` included."""
    if T < 1:
        raise ValueError("series length must be positive")
    grid = sorted({(k * T) // n for k in range(1, n + 1)} - {0} | {T})
    return tuple(grid)


@dataclass
class Dataset:
    name: str
    X: np.ndarray
    y: np.ndarray
    class_names: tuple = ("0", "1")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=int)
        if self.X.shape[0] != self.y.size:
            raise DatasetError("X and y disagree on the number of series")
        if not np.all(np.isfinite(self.X)):
            raise DatasetError("non-finite measurements")
        if set(np.unique(self.y)) - {0, 1}:
            raise DatasetError("labels must be 0/1")

    @property
    def T(self) -> int:
        return int(self.X.shape[1])

    @property
    def checkpoints(self) -> tuple:
        return checkpoint_grid(self.T)

    @property
    def series(self) -> list:
        return [TimeSeries(x, int(c)) for x, c in zip(self.X, self.y)]

    def __len__(self):
        return int(self.X.shape[0])

    def subset(self, idx) -> "Dataset":
        return Dataset(self.name, self.X[idx], self.y[idx], self.class_names, dict(self.meta))


def _class_sort_key(name: str):
    try:
        return (0, float(name), name)
    except ValueError:
        return (1, 0.0, name)


def _canonical_label(token: str) -> str:
    try:
        v = float(token)
    except ValueError:
        return token
    return str(int(v)) if v.is_integer() else repr(v)


def load_ucr(path, name: str | None = None) -> Dataset:
    """Parse rows of ``label, x_1, ..., x_T`` (comma, tab or whitespace separated)."""
    path = Path(path)
    labels, rows = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f for f in line.replace(",", " ").split()]
            if len(fields) < 2:
                raise DatasetError(f"{path}:{lineno}: row has no measurements")
            try:
                values = [float(v) for v in fields[1:]]
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: non-numeric value ({exc})") from None
            if rows and len(values) != len(rows[0]):
                raise DatasetError(
                    f"{path}:{lineno}: ragged row of length {len(values)}, expected {len(rows[0])}")
            if not all(math.isfinite(v) for v in values):
                raise DatasetError(f"{path}:{lineno}: non-finite value")
            labels.append(_canonical_label(fields[0]))
            rows.append(values)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    classes = sorted(set(labels), key=_class_sort_key)
    if len(classes) > 2:
        raise DatasetError(f"{path}: more than two classes ({len(classes)} found)")
    if len(classes) < 2:
        raise DatasetError(f"{path}: only one class present")
    mapping = {c: i for i, c in enumerate(classes)}
    y = np.array([mapping[c] for c in labels], dtype=int)
    meta = {}
    sidecar = path.with_suffix(path.suffix + ".json")
    if sidecar.exists():
        generator = json.loads(sidecar.read_text()).get("generator")
        if generator:
            meta["generator"] = generator
    return Dataset(name or path.stem, np.array(rows), y, tuple(classes), meta)


def save_ucr(dataset: Dataset, path, delimiter: str = ",") -> Path:
    """Write the canonical dump plus a ``<path>.json`` metadata sidecar."""
    path = Path(path)
    with open(path, "w") as fh:
        for x, c in zip(dataset.X, dataset.y):
            fh.write(delimiter.join([dataset.class_names[c]] + [repr(float(v)) for v in x]))
            fh.write("\n")
    sidecar = {
        "name": dataset.name,
        "T": dataset.T,
        "n_series": len(dataset),
        "checkpoints": list(dataset.checkpoints),
        "class_mapping": {name: i for i, name in enumerate(dataset.class_names)},
        "generator": dataset.meta.get("generator"),
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def default_data_dir() -> Path:
    return Path(os.environ.get("ECOREV_DATA_DIR", "."))


# Splits ---------------------------------------------------------------------

@dataclass(frozen=True)
class SplitPlan:
    train: np.ndarray
    test: np.ndarray
    classifier: np.ndarray
    estimation: np.ndarray
    validation: np.ndarray
    seed: int

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d) -> "SplitPlan":
        return cls(**{k: (np.asarray(v, dtype=int) if k != "seed" else int(v))
                      for k, v in d.items()})


def _split_counts(n: int, fractions) -> list:
    counts = [int(math.floor(n * f + 0.5 + 1e-9)) for f in fractions[:-1]]
    counts.append(n - sum(counts))
    return counts


def make_splits(y, seed: int, test_fraction: float = 0.3,
                within=(0.4, 0.4, 0.2)) -> SplitPlan:
    """Stratified 70/30 train/test, then 40/40/20 classifier/estimation/validation."""
    y = np.asarray(y, dtype=int)
    rng = np.random.default_rng(seed)
    parts = {k: [] for k in ("train", "test", "classifier", "estimation", "validation")}
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.size)]
        n_train, _ = _split_counts(idx.size, (1 - test_fraction, test_fraction))
        train, test = idx[:n_train], idx[n_train:]
        n_clf, n_est, _ = _split_counts(train.size, within)
        pieces = (train, test, train[:n_clf], train[n_clf:n_clf + n_est], train[n_clf + n_est:])
        for key, piece in zip(parts, pieces):
            if piece.size == 0:
                raise SplitError(f"class {c} has too few examples ({idx.size}) for a {key} split")
            parts[key].append(piece)
    return SplitPlan(**{k: np.sort(np.concatenate(v)) for k, v in parts.items()}, seed=int(seed))


# Synthetic data -------------------------------------------------------------

@dataclass
class SyntheticSpec:
    """Two AR(1) processes whose mean separation grows linearly after ``onset``.

    Class 1 has mean ``+m(t)/2`` and class 0 ``-m(t)/2`` with ``m`` rising
    from ``gap_start`` at ``onset * T`` to ``gap`` at ``T`` (0 before onset).
    A ``flip_fraction`` of the series show the opposite class's mean before
    ``flip_at * T``, which misleads early classifiers and creates series where
    revising a decision pays off.
    """

    name: str = "synthetic"
    n_series: int = 200
    length: int = 60
    gap: float = 2.0
    gap_start: float = 0.0
    onset: float = 0.0
    ar_coef: float = 0.5
    noise: float = 1.0
    flip_at: float | None = None
    flip_fraction: float = 0.0
    class_balance: float = 0.5


def _mean_profile(spec: SyntheticSpec) -> np.ndarray:
    T = spec.length
    t = np.arange(1, T + 1, dtype=float)
    start = spec.onset * T
    ramp = np.clip((t - start) / max(T - start, 1e-12), 0.0, 1.0)
    m = spec.gap_start + (spec.gap - spec.gap_start) * ramp
    return np.where(t > start, m, 0.0) if spec.onset > 0 else m


def generate_synthetic(spec: SyntheticSpec, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    n, T = spec.n_series, spec.length
    y = (rng.random(n) < spec.class_balance).astype(int)
    # both classes present whenever n >= 2
    if n >= 2 and y.min() == y.max():
        y[: n // 2] = 1 - y[0]
    sign = np.where(y == 1, 1.0, -1.0)
    signal = np.outer(sign, _mean_profile(spec)) / 2.0
    if spec.flip_at is not None and spec.flip_fraction > 0:
        flipped = rng.random(n) < spec.flip_fraction
        cut = int(round(spec.flip_at * T))
        signal[flipped, :cut] *= -1.0
    else:
        flipped = np.zeros(n, dtype=bool)
    eps = rng.normal(0.0, spec.noise, size=(n, T))
    noise = np.empty((n, T))
    noise[:, 0] = eps[:, 0]
    for k in range(1, T):
        noise[:, k] = spec.ar_coef * noise[:, k - 1] + eps[:, k]
    meta = {"generator": {**asdict(spec), "seed": int(seed)},
            "flipped": flipped.tolist()}
    return Dataset(spec.name, signal + noise, y, ("0", "1"), meta)

"""Confidence-group estimator of expected future costs.

At every checkpoint the class-1 confidences of the estimation split are cut
into ``K`` equal-frequency intervals (groups). Group-to-group transitions
between consecutive checkpoints are counted into row-stochastic matrices, and
per-group class priors, confusion rates and decision-change rates are counted
with additive smoothing. An incoming prefix sits in exactly one group; its
future group distribution is obtained by pushing that one-hot vector through
the transition matrices.

Internally checkpoints are 0-based positions ``j``; the public functions that
take a :class:`~ecorev.core.Prefix` use its 1-based ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierChain, predicted_label
from .core import CostModel, DecisionSequence, Prefix


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ExpectedCostCurve:
    """Expected cost of deciding ``tau`` checkpoints from now, ``tau = 0, 1, ...``."""

    values: np.ndarray

    @property
    def argmin(self) -> int:
        # np.argmin returns the first minimum: earliest tau wins ties
        return int(np.argmin(self.values))

    def __len__(self):
        return int(self.values.size)


def equal_frequency_edges(confidences, K: int) -> np.ndarray:
    """Interior boundaries splitting ``confidences`` into ``K`` equal-frequency bins.

    Quantiles use midpoint interpolation. Repeated boundaries collapse and a
    boundary at 0 is dropped, so fewer than ``K`` groups may remain.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if K == 1:
        return np.empty(0)
    s = np.sort(np.asarray(confidences, dtype=float))
    n = s.size
    # integer index arithmetic: position k*(n-1)/K, midpoint of floor and ceil
    lo = np.array([k * (n - 1) // K for k in range(1, K)])
    hi = np.array([-(-k * (n - 1) // K) for k in range(1, K)])
    qs = (s[lo] + s[hi]) / 2.0
    return np.unique(qs[qs > 0.0])


def assign_groups(edges: np.ndarray, confidences) -> np.ndarray:
    """Group index of each confidence; group ``k`` is ``[edges[k-1], edges[k])``."""
    return np.searchsorted(edges, confidences, side="right")


@dataclass
class GammaModel:
    chain: ClassifierChain
    K: int
    smoothing: float
    T: int
    edges: list
    transitions: list
    prior: list
    confusion: list
    change: list
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def checkpoints(self) -> tuple:
        return self.chain.checkpoints

    @property
    def n_checkpoints(self) -> int:
        return len(self.chain.checkpoints)

    def n_groups(self, j: int) -> int:
        return len(self.edges[j]) + 1

    def group_of(self, j: int, confidence: float) -> int:
        return int(assign_groups(self.edges[j], confidence))

    def project(self, j: int, g: int, tau: int) -> np.ndarray:
        """Distribution over groups at checkpoint ``j + tau`` starting from group ``g`` at ``j``."""
        dist = np.zeros(self.n_groups(j))
        dist[g] = 1.0
        for step in range(tau):
            dist = dist @ self.transitions[j + step]
        return dist

    def group_misclassification(self, j: int, cm: np.ndarray) -> np.ndarray:
        """Expected misclassification cost of each group at checkpoint ``j``."""
        # sum_y P(y|g) sum_yhat P(yhat|y,g) C(yhat|y)
        return np.einsum("gy,gyh,hy->g", self.prior[j], self.confusion[j], cm)

    def posterior(self, j: int, g: int, y_hat: int) -> np.ndarray:
        """``P(y | g, y_hat)`` from the group prior and confusion tables.

        Without smoothing a prediction may never have been seen in the group;
        the group prior stands in for the posterior then.
        """
        joint = self.prior[j][g] * self.confusion[j][g, :, y_hat]
        total = joint.sum()
        return joint / total if total > 0 else self.prior[j][g].copy()

    def future_misclassification(self, cm: np.ndarray) -> list:
        """Per checkpoint ``j``: array ``(n_groups(j), n - j)`` of projected costs.

        Column 0 is the group-average cost at ``j`` itself; curves replace it
        with the cost of the prediction actually made.
        """
        key = tuple(map(float, cm.ravel()))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        n = self.n_checkpoints
        per_ckpt = [self.group_misclassification(j, cm) for j in range(n)]
        out = []
        for j in range(n):
            D = np.eye(self.n_groups(j))
            cols = [D @ per_ckpt[j]]
            for k in range(j + 1, n):
                D = D @ self.transitions[k - 1]
                cols.append(D @ per_ckpt[k])
            out.append(np.column_stack(cols))
        self._cache[key] = out
        return out

    def delays(self, j: int, cost: CostModel) -> np.ndarray:
        return cost.alpha * np.asarray(self.checkpoints[j:], dtype=float) / self.T

    def current_misclassification(self, j: int, g: int, label: int, y_hat: int,
                                  cost: CostModel) -> float:
        """Expected cost of standing on ``label`` given the evidence at ``j``."""
        post = self.posterior(j, g, y_hat)
        return float(post[0] * cost.misclassification[label][0]
                     + post[1] * cost.misclassification[label][1])

    def change_probabilities(self, j: int, g: int, last_label: int) -> np.ndarray:
        """``P_{j+tau}(yhat | last_label, g)`` for ``tau = 1..n-1-j``, shape ``(n-1-j, 2)``."""
        return self.change[j][g, last_label]


def _check_prefix(model: GammaModel, prefix: Prefix) -> int:
    if not 1 <= prefix.t <= model.n_checkpoints:
        raise ValueError(f"checkpoint {prefix.t} not on the grid")
    j = prefix.t - 1
    if len(prefix) != model.checkpoints[j]:
        raise ValueError(f"prefix length {len(prefix)} does not match checkpoint {prefix.t}")
    return j


def fit_gamma(chain: ClassifierChain, X_est, y_est, K: int,
              smoothing: float = 1.0) -> GammaModel:
    """Build groups, transitions and frequency tables from the estimation split."""
    if K < 1:
        raise FitError("K must be >= 1")
    X_est = np.atleast_2d(np.asarray(X_est, dtype=float))
    y_est = np.asarray(y_est, dtype=int)
    if X_est.shape[0] < K:
        raise FitError(f"estimation split has {X_est.shape[0]} series, fewer than K={K}")
    conf = chain.confidences(X_est)
    return fit_gamma_from_confidences(chain, conf, y_est, K, smoothing, T=X_est.shape[1])


def _ratio(counts, totals, s, n_outcomes):
    """Smoothed frequencies; a cell with no observations at all is uniform."""
    denom = totals + n_outcomes * s
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (counts + s) / denom
    return np.where(denom > 0, out, 1.0 / n_outcomes)


def fit_gamma_from_confidences(chain, conf, y, K, smoothing=1.0, T=None) -> GammaModel:
    conf = np.asarray(conf, dtype=float)
    y = np.asarray(y, dtype=int)
    m, n = conf.shape
    if m < K:
        raise FitError(f"estimation split has {m} series, fewer than K={K}")
    if T is None:
        T = int(chain.checkpoints[-1])
    s = float(smoothing)
    preds = predicted_label(conf)
    edges = [equal_frequency_edges(conf[:, j], K) for j in range(n)]
    groups = np.column_stack([assign_groups(edges[j], conf[:, j]) for j in range(n)])
    sizes = [len(e) + 1 for e in edges]

    prior, confusion, change, transitions = [], [], [], []
    for j in range(n):
        G = sizes[j]
        g = groups[:, j]
        n_gy = np.zeros((G, 2))
        np.add.at(n_gy, (g, y), 1.0)
        n_gyh = np.zeros((G, 2, 2))
        np.add.at(n_gyh, (g, y, preds[:, j]), 1.0)
        prior.append(_ratio(n_gy, n_gy.sum(axis=1, keepdims=True), s, 2))
        confusion.append(_ratio(n_gyh, n_gy[:, :, None], s, 2))

        horizon = n - 1 - j
        n_gah = np.zeros((G, 2, horizon, 2))
        if horizon:
            taus = np.broadcast_to(np.arange(horizon), (m, horizon))
            rows = np.repeat(np.arange(m), horizon)
            np.add.at(n_gah, (g[rows], preds[rows, j], taus.ravel(),
                              preds[:, j + 1:].ravel()), 1.0)
        n_ga = np.zeros((G, 2))
        np.add.at(n_ga, (g, preds[:, j]), 1.0)
        change.append(_ratio(n_gah, n_ga[:, :, None, None], s, 2))

        if j + 1 < n:
            G2 = sizes[j + 1]
            n_tr = np.zeros((G, G2))
            np.add.at(n_tr, (g, groups[:, j + 1]), 1.0)
            transitions.append(_ratio(n_tr, n_tr.sum(axis=1, keepdims=True), s, G2))

    return GammaModel(chain=chain, K=int(K), smoothing=s, T=int(T), edges=edges,
                      transitions=transitions, prior=prior, confusion=confusion,
                      change=change)


# Curves on a known (checkpoint, group, prediction) state. The trigger module
# replays series through these directly.

def cost_curve_at(model: GammaModel, j: int, g: int, y_hat: int,
                  cost: CostModel) -> np.ndarray:
    values = model.future_misclassification(cost.cm)[j][g].copy()
    values[0] = model.current_misclassification(j, g, y_hat, y_hat, cost)
    return values + model.delays(j, cost)


def change_cost_curve_at(model: GammaModel, j: int, g: int, last_label: int,
                         cost: CostModel) -> np.ndarray:
    """Expected change cost for ``tau = 0..n-1-j``; ``tau = 0`` is 0 by convention."""
    probs = model.change_probabilities(j, g, last_label)
    cd = np.array([cost.change_cost(h, last_label) for h in (0, 1)])
    return np.concatenate([[0.0], probs @ cd])


def revocable_curve_at(model: GammaModel, j: int, g: int, y_hat: int,
                       seq: DecisionSequence, cost: CostModel) -> np.ndarray:
    if not seq:
        raise ValueError("the revocable curve needs a standing first decision")
    misc = model.future_misclassification(cost.cm)[j][g].copy()
    misc[0] = model.current_misclassification(j, g, y_hat, y_hat, cost)
    paid = seq.paid_change_cost(cost)
    change = change_cost_curve_at(model, j, g, seq.last[1], cost)
    return misc + paid + change + model.delays(j, cost)


def standing_cost_at(model: GammaModel, j: int, g: int, y_hat: int,
                     seq: DecisionSequence, t_anchor: int, cost: CostModel) -> float:
    """Expected cost of ``seq`` as it stands, given the evidence at ``j``.

    The last decision's label is scored against the current class posterior
    and the delay is paid at ``t_anchor``.
    """
    label = seq.last[1]
    misc = model.current_misclassification(j, g, label, y_hat, cost)
    return misc + seq.paid_change_cost(cost) + cost.alpha * t_anchor / model.T


def _state(model: GammaModel, prefix: Prefix):
    j = _check_prefix(model, prefix)
    conf = model.chain.confidence_at(j, prefix.values)
    return j, model.group_of(j, conf), int(conf >= 0.5)


def expected_cost_curve(model: GammaModel, prefix: Prefix,
                        cost: CostModel) -> ExpectedCostCurve:
    j, g, y_hat = _state(model, prefix)
    return ExpectedCostCurve(cost_curve_at(model, j, g, y_hat, cost))


def expected_change_cost(model: GammaModel, prefix: Prefix, last_label: int,
                         tau: int, cost: CostModel) -> float:
    j, g, _ = _state(model, prefix)
    if tau < 0 or tau > model.n_checkpoints - 1 - j:
        raise ValueError(f"tau={tau} outside the remaining horizon")
    return float(change_cost_curve_at(model, j, g, int(last_label), cost)[tau])


def revocable_cost_curve(model: GammaModel, prefix: Prefix, seq: DecisionSequence,
                         cost: CostModel) -> ExpectedCostCurve:
    j, g, y_hat = _state(model, prefix)
    return ExpectedCostCurve(revocable_curve_at(model, j, g, y_hat, seq, cost))

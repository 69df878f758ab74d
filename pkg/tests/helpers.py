import itertools
from fractions import Fraction

import numpy as np
from scipy import stats

from ecorev.classifiers import ClassifierChain
from ecorev.core import DecisionSequence
from ecorev.gamma import fit_gamma_from_confidences


class FixedChain(ClassifierChain):
    """Chain whose confidence at checkpoint ``j`` is simply ``values[j]``.

    Series values double as the confidence path, with one checkpoint per
    raw time step, which makes hand-built fixtures easy to reason about.
    """

    def __init__(self, n):
        super().__init__(tuple(range(1, n + 1)), [], [])

    def confidence_at(self, j, values):
        return float(np.clip(values[j], 0.0, 1.0))

    def confidences(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.clip(X[:, : len(self.checkpoints)], 0.0, 1.0)


def fixed_model(conf, y, K=2, smoothing=1.0):
    conf = np.asarray(conf, dtype=float)
    chain = FixedChain(conf.shape[1])
    return fit_gamma_from_confidences(chain, conf, y, K, smoothing, T=conf.shape[1])


# Brute-force frequency oracle -----------------------------------------------

def oracle_edges(values, K):
    s = sorted(float(v) for v in values)
    n = len(s)
    out = set()
    for k in range(1, K):
        pos = Fraction(k, K) * (n - 1)
        lo, hi = int(pos), -int(-pos // 1)
        q = (s[lo] + s[hi]) / 2
        if q > 0:
            out.add(q)
    return sorted(out)


def oracle_group(edges, c):
    return sum(1 for e in edges if e <= c)


def oracle_tables(conf, y, K, s):
    m, n = len(conf), len(conf[0])
    pred = [[1 if c >= 0.5 else 0 for c in row] for row in conf]
    edges = [oracle_edges([conf[i][j] for i in range(m)], K) for j in range(n)]
    grp = [[oracle_group(edges[j], conf[i][j]) for j in range(n)] for i in range(m)]
    G = [len(e) + 1 for e in edges]
    prior, confusion, change, trans = [], [], [], []
    for j in range(n):
        prior.append([[(sum(1 for i in range(m) if grp[i][j] == g and y[i] == c) + s)
                       / (sum(1 for i in range(m) if grp[i][j] == g) + 2 * s)
                       for c in (0, 1)] for g in range(G[j])])
        confusion.append([[[(sum(1 for i in range(m) if grp[i][j] == g and y[i] == c
                                 and pred[i][j] == h) + s)
                            / (sum(1 for i in range(m) if grp[i][j] == g and y[i] == c) + 2 * s)
                            for h in (0, 1)] for c in (0, 1)] for g in range(G[j])])
        change.append([[[[(sum(1 for i in range(m) if grp[i][j] == g and pred[i][j] == a
                               and pred[i][j + tau] == h) + s)
                          / (sum(1 for i in range(m) if grp[i][j] == g and pred[i][j] == a) + 2 * s)
                          for h in (0, 1)] for tau in range(1, n - j)] for a in (0, 1)]
                       for g in range(G[j])])
        if j + 1 < n:
            trans.append([[(sum(1 for i in range(m) if grp[i][j] == g and grp[i][j + 1] == g2) + s)
                           / (sum(1 for i in range(m) if grp[i][j] == g) + G[j + 1] * s)
                           for g2 in range(G[j + 1])] for g in range(G[j])])
    return edges, prior, confusion, change, trans


def assert_tables_equal(model, conf, y, K, s):
    edges, prior, confusion, change, trans = oracle_tables(conf.tolist(), list(y), K, s)
    n = conf.shape[1]
    for j in range(n):
        assert model.edges[j].tolist() == edges[j]
        assert model.prior[j].tolist() == prior[j]
        assert model.confusion[j].tolist() == confusion[j]
        if n - 1 - j:
            assert model.change[j].tolist() == change[j]
        if j + 1 < n:
            assert model.transitions[j].tolist() == trans[j]


# Decision sequences ---------------------------------------------------------

def enumerate_sequences(checkpoints, preds):
    """Every non-empty decision sequence built from the chain's predictions."""
    n = len(checkpoints)
    for r in range(1, n + 1):
        for idx in itertools.combinations(range(n), r):
            labels = [int(preds[i]) for i in idx]
            if all(a != b for a, b in zip(labels, labels[1:])):
                yield DecisionSequence(tuple((checkpoints[i], labels[k]) for k, i in enumerate(idx)))


def assert_valid(trace, T):
    seq = trace.sequence
    assert len(seq) >= 1
    times, labels = seq.times, seq.labels
    assert all(a < b for a, b in zip(times, times[1:]))
    assert all(a != b for a, b in zip(labels, labels[1:]))
    assert 1 <= times[0] and times[-1] <= T


# Statistical oracles --------------------------------------------------------

def enumeration_p_value(diffs):
    """Two-sided p-value by listing every sign pattern of the mid-ranked |d|."""
    d = np.asarray(diffs, dtype=float)
    d = d[d != 0]
    ranks = stats.rankdata(np.abs(d))
    w_plus = ranks[d > 0].sum()
    stat = min(w_plus, ranks.sum() - w_plus)
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(ranks)):
        hits += float(np.dot(signs, ranks)) <= stat + 1e-9
    return stat, min(1.0, 2.0 * hits / 2 ** len(ranks))


def kappa_from_table(tp, fn, fp, tn):
    n = tp + fn + fp + tn
    p_o = (tp + tn) / n
    p_e = ((tp + fn) * (tp + fp) + (fp + tn) * (fn + tn)) / n**2
    return (p_o - p_e) / (1 - p_e)


def table_to_labels(tp, fn, fp, tn):
    truth = [1] * (tp + fn) + [0] * (fp + tn)
    pred = [1] * tp + [0] * fn + [1] * fp + [0] * tn
    return np.array(pred), np.array(truth)

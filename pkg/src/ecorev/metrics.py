"""Evaluation criteria and paired significance tests."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import CostModel, total_cost


class Verdict(str, enum.Enum):
    PLUS = "+"
    CIRCLE = "o"
    MINUS = "-"


@dataclass(frozen=True)
class TestVerdict:
    statistic: float
    p_value: float
    verdict: Verdict
    n: int = 0
    note: str = ""

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class EvalSummary:
    avg_cost: float
    earliness: float
    kappa: float
    n_revocations_mean: float


def avg_cost(traces, truths, cost: CostModel, T: int) -> float:
    """Mean total cost of the traces' decision sequences."""
    if len(traces) != len(truths):
        raise ValueError("traces and truths are not aligned")
    if not traces:
        raise ValueError("no traces to average")
    return float(np.mean([total_cost(tr.sequence, y, cost, T) for tr, y in zip(traces, truths)]))


def earliness(traces, T: int) -> float:
    return float(np.mean([tr.sequence.last[0] / T for tr in traces]))


def cohen_kappa(predictions, truths) -> float:
    """Cohen's kappa; 0 when chance agreement is already perfect."""
    a = np.asarray(predictions)
    b = np.asarray(truths)
    if a.size == 0 or a.shape != b.shape:
        raise ValueError("need at least one aligned (prediction, truth) pair")
    labels = np.union1d(a, b)
    n = a.size
    p_o = float(np.mean(a == b))
    p_e = float(sum(np.count_nonzero(a == c) * np.count_nonzero(b == c) for c in labels)) / (n * n)
    if p_e == 1.0:
        return 0.0
    return (p_o - p_e) / (1.0 - p_e)


def summarize(traces, truths, cost: CostModel, T: int) -> EvalSummary:
    return EvalSummary(
        avg_cost=avg_cost(traces, truths, cost, T),
        earliness=earliness(traces, T),
        kappa=cohen_kappa([tr.sequence.last[1] for tr in traces], truths),
        n_revocations_mean=float(np.mean([len(tr.sequence) - 1 for tr in traces])),
    )


# Wilcoxon signed-rank -------------------------------------------------------

EXACT_MAX_N = 25
MIN_PAIRS = 6


def signed_ranks(diffs):
    """Mid-ranks of ``|d|`` over the non-zero differences, and their signs."""
    d = np.asarray(diffs, dtype=float)
    d = d[d != 0]
    return stats.rankdata(np.abs(d)), np.sign(d)


def exact_null_distribution(ranks) -> tuple[np.ndarray, np.ndarray]:
    """Null distribution of the positive-rank sum for the given (mid-)ranks.

    Every sign pattern is equally likely; the count of patterns for each
    attainable sum is built by a subset-sum recursion on doubled ranks, which
    are integers even with mid-ranks. Returns ``(support, probabilities)``.
    """
    r2 = np.rint(2 * np.asarray(ranks, dtype=float)).astype(int)
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in r2:
        counts[r:] = counts[r:] + counts[:total + 1 - r].copy()
    nz = np.nonzero(counts)[0]
    probs = np.array([counts[k] for k in nz], dtype=float) / float(2 ** len(r2))
    return nz / 2.0, probs


def wilcoxon_signed_rank(paired_a, paired_b, alpha_level: float = 0.05,
                         greater_is_better: bool = False) -> TestVerdict:
    """Two-sided signed-rank test on ``a - b``.

    ``PLUS`` means ``a`` is significantly better: lower by default, higher
    when ``greater_is_better``. The statistic is ``min(W+, W-)``.
    """
    a = np.asarray(paired_a, dtype=float)
    b = np.asarray(paired_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples must have the same shape")
    diffs = a - b
    nz = diffs[diffs != 0]
    n = nz.size
    if n < MIN_PAIRS:
        return TestVerdict(float("nan"), 1.0, Verdict.CIRCLE, n,
                           f"only {n} non-zero differences (< {MIN_PAIRS})")
    ranks, signs = signed_ranks(nz)
    w_plus = float(ranks[signs > 0].sum())
    w_minus = float(ranks[signs < 0].sum())
    stat = min(w_plus, w_minus)
    if n <= EXACT_MAX_N:
        support, probs = exact_null_distribution(ranks)
        # support is symmetric about n(n+1)/4, so P(W+ <= stat) is the lower tail
        p = min(1.0, 2.0 * float(probs[support <= stat + 1e-9].sum()))
        mode = "exact"
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
        z = (abs(w_plus - mean) - 0.5) / math.sqrt(var) if var > 0 else 0.0
        p = min(1.0, 2.0 * float(stats.norm.sf(max(z, 0.0))))
        mode = "normal"
    verdict = Verdict.CIRCLE
    if p < alpha_level:
        direction = float(np.median(diffs))
        if direction == 0.0:
            direction = w_plus - w_minus
        a_better = direction > 0 if greater_is_better else direction < 0
        verdict = Verdict.PLUS if a_better else Verdict.MINUS
    return TestVerdict(stat, p, verdict, n, mode)


# Friedman ranking -----------------------------------------------------------

@dataclass(frozen=True)
class FriedmanResult:
    ranks: np.ndarray
    mean_ranks: np.ndarray
    statistic: float
    p_value: float


def friedman_ranks(scores) -> FriedmanResult:
    """Rank strategies (rows) within each dataset (column); lowest score is rank 1."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 2:
        raise ValueError("need a strategies x datasets matrix with at least 2 of each")
    k, N = scores.shape
    ranks = np.column_stack([stats.rankdata(scores[:, i]) for i in range(N)])
    mean_ranks = ranks.mean(axis=1)
    chi2 = 12.0 * N / (k * (k + 1)) * float(np.sum(mean_ranks**2)) - 3.0 * N * (k + 1)
    p = float(stats.chi2.sf(chi2, k - 1))
    return FriedmanResult(ranks, mean_ranks, chi2, p)

"""Full experimental protocol over datasets and an (alpha, beta) cost grid.

Models are fitted once per dataset (fitting does not depend on costs); every
grid cell then replays each strategy over the test split and the results are
aggregated into summaries, signed-rank verdicts, Friedman ranks and Pareto
rows.
"""
from __future__ import annotations

import csv
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .classifiers import ClassifierConfig, fit_chain
from .core import CostModel
from .data import Dataset, SplitPlan, make_splits
from .gamma import FitError, GammaModel, fit_gamma
from .metrics import (EvalSummary, TestVerdict, Verdict, friedman_ranks, summarize,
                      wilcoxon_signed_rank)
from .trigger import (Strategy, StrategyKind, batch_states, run_irrevocable,
                      useful_revocation_stats)

log = logging.getLogger(__name__)

PAPER_COSTS = (0.0001, 0.00025, 0.0005, 0.00075, 0.001, 0.0025, 0.005, 0.0075,
               0.01, 0.025, 0.05, 0.075, 0.1, 0.25, 0.5, 0.75, 1.0)
DEFAULT_STRATEGIES = (StrategyKind.IRREVOCABLE, StrategyKind.REV_COST_UNAWARE,
                      StrategyKind.REV_COST_AWARE)
REFERENCE_CELL = (0.01, 0.05)


@dataclass(frozen=True)
class CostGrid:
    alphas: tuple = PAPER_COSTS
    betas: tuple = PAPER_COSTS

    @classmethod
    def quick(cls) -> "CostGrid":
        return cls(alphas=(0.001, 0.05, 0.5), betas=(0.001, 0.05, 0.5))

    def cells(self):
        return itertools.product(self.alphas, self.betas)


@dataclass
class FittedDataset:
    name: str
    model: GammaModel
    plan: SplitPlan
    k_scores: dict


def select_k(chain, est: Dataset, val: Dataset, k_values, smoothing=1.0,
             reference=REFERENCE_CELL) -> tuple[int, dict]:
    """Pick the group count with the lowest irrevocable AvgCost on ``val``.

    Ties go to the smallest K; values of K the estimation split cannot
    support are skipped.
    """
    cost = CostModel(alpha=reference[0], beta=reference[1])
    scores = {}
    for K in sorted(k_values):
        try:
            model = fit_gamma(chain, est.X, est.y, K, smoothing)
        except FitError:
            continue
        traces = [run_irrevocable(model, cost, x, state=st, log=False)
                  for x, st in zip(val.X, batch_states(model, val.X))]
        scores[K] = summarize(traces, val.y, cost, val.T).avg_cost
    if not scores:
        raise FitError("no K value could be fitted")
    best = min(scores, key=lambda k: (scores[k], k))
    return best, scores


def fit_dataset(dataset: Dataset, seed: int, k_values=range(1, 6), smoothing=1.0,
                classifier_config: ClassifierConfig | None = None) -> FittedDataset:
    plan = make_splits(dataset.y, seed)
    clf, est, val = (dataset.subset(plan.classifier), dataset.subset(plan.estimation),
                     dataset.subset(plan.validation))
    chain = fit_chain(clf.X, clf.y, dataset.checkpoints, classifier_config)
    K, scores = select_k(chain, est, val, k_values, smoothing)
    model = fit_gamma(chain, est.X, est.y, K, smoothing)
    return FittedDataset(dataset.name, model, plan, scores)


@dataclass
class SweepResult:
    grid: CostGrid
    strategies: tuple
    summaries: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    useful_revocations: dict = field(default_factory=dict)
    k_selected: dict = field(default_factory=dict)
    k_scores: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def datasets(self) -> list:
        seen = dict.fromkeys(k[0] for k in self.summaries)
        seen.update(dict.fromkeys(k[0] for k in self.failures))
        return list(seen)

    @classmethod
    def merge(cls, results) -> "SweepResult":
        results = list(results)
        out = cls(results[0].grid, results[0].strategies)
        for r in results:
            for name in ("summaries", "failures", "useful_revocations", "k_selected",
                         "k_scores", "timings"):
                getattr(out, name).update(getattr(r, name))
        return out

    def scores(self, alpha, beta, metric="avg_cost") -> np.ndarray:
        """Matrix ``strategies x datasets`` of one metric; NaN for failed cells."""
        names = self.datasets
        out = np.full((len(self.strategies), len(names)), np.nan)
        for i, s in enumerate(self.strategies):
            for k, d in enumerate(names):
                summary = self.summaries.get((d, alpha, beta, s))
                if summary is not None:
                    out[i, k] = getattr(summary, metric)
        return out

    def strategy_pairs(self):
        """``(first, second)`` pairs, each later strategy against every earlier one."""
        order = list(self.strategies)
        return [(order[j], order[i]) for j in range(len(order)) for i in range(j)]

    def verdict(self, first, second, alpha, beta, alpha_level=0.05) -> TestVerdict:
        S = self.scores(alpha, beta)
        a = S[self.strategies.index(first)]
        b = S[self.strategies.index(second)]
        ok = ~(np.isnan(a) | np.isnan(b))
        return wilcoxon_signed_rank(a[ok], b[ok], alpha_level)

    def friedman(self, alpha, beta):
        """Mean rank per strategy (lower cost ranks first) and the chi-square statistic."""
        S = self.scores(alpha, beta)
        S = S[:, ~np.isnan(S).any(axis=0)]
        if S.shape[1] == 0:
            return np.full(len(self.strategies), np.nan), float("nan")
        if S.shape[1] == 1:
            from scipy.stats import rankdata
            return rankdata(S[:, 0]), float("nan")
        res = friedman_ranks(S)
        return res.mean_ranks, res.statistic

    def pareto_table(self, beta) -> list:
        """Rows ``(strategy, alpha, mean earliness, mean kappa)`` averaged over datasets."""
        if beta not in self.grid.betas:
            raise ValueError(f"beta={beta} is not in the grid")
        rows = []
        for s in self.strategies:
            for alpha in sorted(self.grid.alphas):
                e = self.scores(alpha, beta, "earliness")[self.strategies.index(s)]
                k = self.scores(alpha, beta, "kappa")[self.strategies.index(s)]
                rows.append((s, alpha, float(np.nanmean(e)) if np.any(~np.isnan(e)) else math.nan,
                             float(np.nanmean(k)) if np.any(~np.isnan(k)) else math.nan))
        return rows


def _replay_row(model: GammaModel, X, y, T, name, alpha, betas, strategies, states):
    summaries, failures = {}, {}
    for beta in betas:
        cost = CostModel(alpha=alpha, beta=beta)
        for kind in strategies:
            try:
                strat = Strategy(kind, model, cost)
                traces = [strat.run(x, truth=int(c), state=st, log=False)
                          for x, c, st in zip(X, y, states)]
                summaries[(name, alpha, beta, kind)] = summarize(traces, y, cost, T)
            except Exception as exc:  # a failed cell never aborts the sweep
                failures[(name, alpha, beta, kind)] = f"{type(exc).__name__}: {exc}"
    useful = useful_revocation_stats(model, CostModel(alpha=alpha), X, y, states=states)
    return summaries, failures, (name, alpha), useful


def run_pipeline(dataset: Dataset, grid: CostGrid = CostGrid(),
                 strategies=DEFAULT_STRATEGIES, seed: int = 0, k_values=range(1, 6),
                 smoothing=1.0, classifier_config=None, n_jobs: int = 1,
                 fitted: FittedDataset | None = None) -> SweepResult:
    """Fit once, then replay every strategy over every grid cell of one dataset."""
    strategies = tuple(StrategyKind(s) for s in strategies)
    result = SweepResult(grid, strategies)
    t0 = time.perf_counter()
    if fitted is None:
        fitted = fit_dataset(dataset, seed, k_values, smoothing, classifier_config)
    t1 = time.perf_counter()
    model = fitted.model
    test = dataset.subset(fitted.plan.test)
    states = batch_states(model, test.X)
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_replay_row)(model, test.X, test.y, test.T, dataset.name, alpha,
                             grid.betas, strategies, states)
        for alpha in grid.alphas)
    for summaries, failures, key, useful in rows:
        result.summaries.update(summaries)
        result.failures.update(failures)
        result.useful_revocations[key] = useful
    result.k_selected[dataset.name] = model.K
    result.k_scores[dataset.name] = dict(fitted.k_scores)
    result.timings[dataset.name] = {"fit_s": t1 - t0, "replay_s": time.perf_counter() - t1}
    return result


def run_sweep(datasets, grid: CostGrid = CostGrid(), strategies=DEFAULT_STRATEGIES,
              seed: int = 0, **kwargs) -> SweepResult:
    results = []
    for ds in datasets:
        log.info("dataset %s: %d series, T=%d", ds.name, len(ds), ds.T)
        results.append(run_pipeline(ds, grid, strategies, seed, **kwargs))
    return SweepResult.merge(results)


# Exports --------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, StrategyKind):
        return v.value
    return str(v)


def _write(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def export_result(result: SweepResult, out_dir, pareto_betas=None) -> list:
    """Write all CSV artifacts; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    grid = result.grid

    rows = []
    for d in result.datasets:
        for alpha, beta in grid.cells():
            for s in result.strategies:
                key = (d, alpha, beta, s)
                if key in result.summaries:
                    m = result.summaries[key]
                    rows.append((d, alpha, beta, s, m.avg_cost, m.earliness, m.kappa,
                                 m.n_revocations_mean, "ok"))
                else:
                    rows.append((d, alpha, beta, s, "", "", "", "", "failed"))
    _write(out / "summaries.csv", ("dataset", "alpha", "beta", "strategy", "avg_cost",
                                   "earliness", "kappa", "n_revocations_mean", "status"), rows)
    written.append(out / "summaries.csv")

    for first, second in result.strategy_pairs():
        path = out / f"verdicts_{first.value}_vs_{second.value}.csv"
        rows = []
        for alpha in grid.alphas:
            rows.append([alpha] + [result.verdict(first, second, alpha, beta).verdict.value
                                   for beta in grid.betas])
        _write(path, ["alpha\\beta"] + list(grid.betas), rows)
        written.append(path)

    rows = []
    for alpha, beta in grid.cells():
        ranks, stat = result.friedman(alpha, beta)
        for s, r in zip(result.strategies, ranks):
            rows.append((alpha, beta, s, float(r), stat))
    _write(out / "friedman.csv", ("alpha", "beta", "strategy", "mean_rank", "chi2"), rows)
    written.append(out / "friedman.csv")

    rows = []
    for beta in (pareto_betas if pareto_betas is not None else grid.betas):
        for s, alpha, e, k in result.pareto_table(beta):
            rows.append((beta, s, alpha, e, k))
    _write(out / "pareto.csv", ("beta", "strategy", "alpha", "earliness", "kappa"), rows)
    written.append(out / "pareto.csv")

    rows = [(d, a, f) for (d, a), f in result.useful_revocations.items()]
    _write(out / "useful_revocations.csv", ("dataset", "alpha", "fraction"), rows)
    written.append(out / "useful_revocations.csv")

    rows = [(d, K, result.k_scores.get(d, {}).get(K, "")) for d in result.k_selected
            for K in sorted(result.k_scores.get(d, {}) or [result.k_selected[d]])]
    _write(out / "k_selection.csv", ("dataset", "K", "validation_avg_cost", "selected"),
           [(d, K, s) + (("selected",) if K == result.k_selected[d] else ("",))
            for d, K, s in rows])
    written.append(out / "k_selection.csv")

    rows = [(d, a, b, s, msg) for (d, a, b, s), msg in result.failures.items()]
    _write(out / "failures.csv", ("dataset", "alpha", "beta", "strategy", "error"), rows)
    written.append(out / "failures.csv")
    return written

"""Decision strategies replayed over one series at a time.

* ``IRREVOCABLE``: decide once, at the first checkpoint whose expected cost
  curve is minimal now.
* ``REV_COST_UNAWARE`` / ``REV_COST_AWARE``: make the first decision the same
  way, then append a new decision whenever the prediction changed, now looks
  like the best time to change, and the extended sequence is expected to be
  cheaper than the standing one. The cost-unaware variant evaluates all of
  this as if changing were free.
* ``ORACLE``: knows the truth and picks the cheapest single decision.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierChain, predicted_label
from .core import CostModel, DecisionSequence, TimeSeries
from .gamma import (GammaModel, cost_curve_at, revocable_curve_at,
                    standing_cost_at)


class StrategyKind(str, enum.Enum):
    IRREVOCABLE = "irrevocable"
    REV_COST_UNAWARE = "eco-rev-cu"
    REV_COST_AWARE = "eco-rev-ca"
    ORACLE = "oracle"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    model: GammaModel
    cost: CostModel

    def run(self, series, truth=None, state=None, log=True) -> "RunTrace":
        if self.kind is StrategyKind.IRREVOCABLE:
            return run_irrevocable(self.model, self.cost, series, state=state, log=log)
        if self.kind is StrategyKind.ORACLE:
            if truth is None:
                truth = getattr(series, "label", None)
            if truth is None:
                raise ValueError("the oracle strategy needs the true label")
            return run_oracle(self.model.chain, self.cost, series, truth, state=state)
        return run_revocable(self.model, self.cost, series,
                             cost_aware=self.kind is StrategyKind.REV_COST_AWARE,
                             state=state, log=log)


@dataclass(frozen=True)
class CheckpointLog:
    checkpoint: int
    t: int
    confidence: float
    group: int
    prediction: int
    tau_star: int | None = None
    f_values: tuple = ()
    clauses: tuple | None = None
    cost_new: float | None = None
    cost_prev: float | None = None
    event: str = ""


@dataclass
class RunTrace:
    sequence: DecisionSequence
    log: list = field(default_factory=list)

    @property
    def final_label(self) -> int:
        return self.sequence.last[1]

    @property
    def final_time(self) -> int:
        return self.sequence.last[0]

    @property
    def n_revocations(self) -> int:
        return len(self.sequence) - 1


@dataclass(frozen=True)
class SeriesState:
    """Cost-independent per-checkpoint view of one series under a fitted model."""

    confidence: np.ndarray
    group: np.ndarray
    prediction: np.ndarray


def series_state(model: GammaModel, series) -> SeriesState:
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    conf = model.chain.confidences(values[None, :])[0]
    return state_from_confidences(model, conf)


def state_from_confidences(model: GammaModel, conf) -> SeriesState:
    conf = np.asarray(conf, dtype=float)
    groups = np.array([model.group_of(j, c) for j, c in enumerate(conf)], dtype=int)
    return SeriesState(conf, groups, predicted_label(conf))


def batch_states(model: GammaModel, X) -> list[SeriesState]:
    conf = model.chain.confidences(X)
    return [state_from_confidences(model, row) for row in conf]


def _check_length(model, series):
    n = series.T if isinstance(series, TimeSeries) else np.asarray(series).shape[-1]
    if n != model.T:
        raise ValueError(f"series length {n} differs from the model's T={model.T}")


def _first_decision(model, cost, st, log_rows):
    n = model.n_checkpoints
    for j in range(n):
        g, y_hat = int(st.group[j]), int(st.prediction[j])
        curve = cost_curve_at(model, j, g, y_hat, cost)
        tau_star = int(np.argmin(curve))
        fire = tau_star == 0
        if log_rows is not None:
            log_rows.append(CheckpointLog(
                checkpoint=j + 1, t=model.checkpoints[j], confidence=float(st.confidence[j]),
                group=g, prediction=y_hat, tau_star=tau_star,
                f_values=tuple(curve.tolist()),
                event=("decide" if j < n - 1 else "forced") if fire else ""))
        if fire:
            return j, DecisionSequence(((model.checkpoints[j], y_hat),))
    raise AssertionError("the last checkpoint always triggers")


def run_irrevocable(model: GammaModel, cost: CostModel, series, state=None,
                    log=True) -> RunTrace:
    _check_length(model, series)
    st = state or series_state(model, series)
    rows = [] if log else None
    _, seq = _first_decision(model, cost, st, rows)
    return RunTrace(seq, rows or [])


def run_revocable(model: GammaModel, cost: CostModel, series, cost_aware: bool,
                  state=None, log=True) -> RunTrace:
    _check_length(model, series)
    st = state or series_state(model, series)
    rows = [] if log else None
    # costless changes turn the revocable criterion into the plain curve
    eff = cost if cost_aware else cost.with_changes(beta=0.0)
    j1, seq = _first_decision(model, eff, st, rows)
    for j in range(j1 + 1, model.n_checkpoints):
        t = model.checkpoints[j]
        g, y_hat = int(st.group[j]), int(st.prediction[j])
        t_prev, last = seq.last
        curve = revocable_curve_at(model, j, g, y_hat, seq, eff)
        tau_star = int(np.argmin(curve))
        changed = y_hat != last
        cost_new = cost_prev = None
        cheaper = False
        if changed:
            cost_new = standing_cost_at(model, j, g, y_hat, seq.append(t, y_hat), t, eff)
            cost_prev = standing_cost_at(model, j, g, y_hat, seq, t_prev, eff)
            cheaper = cost_new < cost_prev
        fire = changed and tau_star == 0 and cheaper
        if fire:
            seq = seq.append(t, y_hat)
        if rows is not None:
            rows.append(CheckpointLog(
                checkpoint=j + 1, t=t, confidence=float(st.confidence[j]), group=g,
                prediction=y_hat, tau_star=tau_star, f_values=tuple(curve.tolist()),
                clauses=(changed, tau_star == 0, cheaper), cost_new=cost_new,
                cost_prev=cost_prev, event="revoke" if fire else ""))
    return RunTrace(seq, rows or [])


def oracle_decision(checkpoints, predictions, truth: int, cost: CostModel, T: int):
    """``(t*, label)`` minimising misclassification + delay over a prediction path."""
    costs = [cost.misclassification_cost(int(p), truth) + cost.alpha * t / T
             for t, p in zip(checkpoints, predictions)]
    j = int(np.argmin(costs))
    return checkpoints[j], int(predictions[j])


def run_oracle(chain: ClassifierChain, cost: CostModel, series, truth: int,
               state=None) -> RunTrace:
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    T = values.shape[-1]
    preds = state.prediction if state is not None else predicted_label(
        chain.confidences(values[None, :])[0])
    t_star, label = oracle_decision(chain.checkpoints, preds, int(truth), cost, T)
    return RunTrace(DecisionSequence(((t_star, label),)))


def useful_revocation_stats(model: GammaModel, cost: CostModel, X, y, states=None) -> float:
    """Fraction of series whose irrevocable decision label differs from the oracle's.

    On those series a later change of decision could have lowered the cost.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if X.shape[0] == 0:
        return 0.0
    states = states or batch_states(model, X)
    useful = 0
    for st, truth in zip(states, y):
        _, first = _first_decision(model, cost, st, None)
        _, oracle_label = oracle_decision(model.checkpoints, st.prediction, int(truth),
                                          cost, model.T)
        useful += first.last[1] != oracle_label
    return useful / X.shape[0]


TRACE_FIELDS = ("series", "checkpoint", "t", "confidence", "group", "prediction",
                "tau_star", "f_values", "clause_changed", "clause_now", "clause_cheaper",
                "cost_new", "cost_prev", "event")


def write_traces(path, entries):
    """Write ``(strategy, series_id, RunTrace)`` entries, one row per checkpoint."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("strategy",) + TRACE_FIELDS)
        for strategy, series_id, trace in entries:
            for row in trace.log:
                clauses = ("", "", "") if row.clauses is None else tuple(int(c) for c in row.clauses)
                writer.writerow((
                    strategy, series_id, row.checkpoint, row.t, repr(row.confidence),
                    row.group, row.prediction, "" if row.tau_star is None else row.tau_star,
                    " ".join(repr(v) for v in row.f_values), *clauses,
                    "" if row.cost_new is None else repr(row.cost_new),
                    "" if row.cost_prev is None else repr(row.cost_prev),
                    row.event,
                ))

"""
Replaying a misleading series with and without revocation
=========================================================

Series whose early signal points to the wrong class are where revising a
decision pays. This walkthrough replays one such series under the
irrevocable strategy and both revocable strategies, printing the per
checkpoint criterion.
"""

import numpy as np

from ecorev import CostModel, StrategyKind, SyntheticSpec, fit_dataset, generate_synthetic
from ecorev.core import total_cost
from ecorev.trigger import Strategy

spec = SyntheticSpec(name="flip", n_series=200, length=60, gap=2.0, gap_start=1.0,
                     flip_at=0.4, flip_fraction=0.3)
data = generate_synthetic(spec, seed=0)
fitted = fit_dataset(data, seed=0)
model = fitted.model
test = data.subset(fitted.plan.test)
flipped = np.asarray(data.meta["flipped"])[fitted.plan.test]
cost = CostModel(alpha=0.025, beta=0.05)

# pick the first flipped test series on which the cost-aware strategy revises
for i in np.flatnonzero(flipped):
    ca = Strategy(StrategyKind.REV_COST_AWARE, model, cost).run(test.X[i])
    if ca.n_revocations:
        break
x, y = test.X[i], int(test.y[i])
print(f"series {i}, true class {y}")

# %%
for kind in (StrategyKind.IRREVOCABLE, StrategyKind.REV_COST_UNAWARE,
             StrategyKind.REV_COST_AWARE, StrategyKind.ORACLE):
    trace = Strategy(kind, model, cost).run(x, truth=y)
    print(f"{kind.value:12s} decisions {trace.sequence.decisions}  "
          f"cost {total_cost(trace.sequence, y, cost, model.T):.3f}")

# %%
# Checkpoint log of the cost-aware replay. A revision needs the prediction
# to change, the revocable curve to be minimal now, and the extended
# sequence to look cheaper than the standing one.
for row in ca.log:
    clauses = "" if row.clauses is None else "".join("x" if c else "." for c in row.clauses)
    print(f"t={row.t:2d} conf={row.confidence:.2f} group={row.group} yhat={row.prediction} "
          f"tau*={row.tau_star:2d} clauses={clauses:3s} {row.event}")

"""
Expected cost curves on a synthetic series
==========================================

Fit the classifier chain and the confidence-group model on a synthetic
dataset whose class signal is inverted for part of the series early on,
then look at how the expected cost of deciding later evolves along one
test series.
"""

import numpy as np

from ecorev import CostModel, SyntheticSpec, TimeSeries, fit_dataset, generate_synthetic
from ecorev.gamma import expected_cost_curve

spec = SyntheticSpec(name="flip", n_series=200, length=60, gap=2.0, gap_start=1.0,
                     flip_at=0.4, flip_fraction=0.3)
data = generate_synthetic(spec, seed=0)
fitted = fit_dataset(data, seed=0)
model = fitted.model
print("checkpoints:", model.checkpoints)
print("selected number of groups K =", model.K, "validation AvgCost per K:", fitted.k_scores)

# %%
# Group boundaries shrink toward the extremes as classifiers get sharper.
for j in (0, 9, 19):
    print(f"checkpoint t={model.checkpoints[j]:2d}: edges {np.round(model.edges[j], 3)}")

# %%
# A curve gives the expected cost of deciding tau checkpoints from now.
# The first decision is taken when its minimum sits at tau = 0.
cost = CostModel(alpha=0.025)
test = data.subset(fitted.plan.test)
series = TimeSeries(test.X[0], int(test.y[0]))
np.set_printoptions(precision=3, suppress=True)
for t in (1, 4, 8, 12):
    curve = expected_cost_curve(model, series.prefix(t, model.checkpoints), cost)
    print(f"t={model.checkpoints[t - 1]:2d}  tau*={curve.argmin:2d}  f={curve.values[:6]} ...")

# %%
# A very large delay weight makes every curve increasing: decide now.
steep = CostModel(alpha=1.01 * model.T / min(np.diff((0,) + model.checkpoints)))
print("tau* under a steep delay:",
      expected_cost_curve(model, series.prefix(1, model.checkpoints), steep).argmin)

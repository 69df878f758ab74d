"""
The hindsight oracle needs a single decision
============================================

With the true label known, no sequence of revisions built from the
classifier chain's predictions beats the best single decision. Check it by
enumerating every sequence on a short path of predictions.
"""

import itertools

from ecorev import CostModel, DecisionSequence
from ecorev.core import total_cost
from ecorev.trigger import oracle_decision

checkpoints = (1, 2, 3, 4, 5, 6)
predictions = (0, 0, 1, 0, 1, 1)
truth = 1
cost = CostModel(alpha=0.2, beta=0.05)

t_star, label = oracle_decision(checkpoints, predictions, truth, cost, T=6)
best = total_cost(DecisionSequence(((t_star, label),)), truth, cost, 6)
print(f"oracle: decide {label} at t={t_star}, cost {best:.4f}")

# %%
# every non-empty subset of checkpoints whose predictions alternate
costs = []
for r in range(1, len(checkpoints) + 1):
    for idx in itertools.combinations(range(len(checkpoints)), r):
        labels = [predictions[i] for i in idx]
        if all(a != b for a, b in zip(labels, labels[1:])):
            seq = DecisionSequence(tuple((checkpoints[i], predictions[i]) for i in idx))
            costs.append((total_cost(seq, truth, cost, 6), seq.decisions))
costs.sort()
print(f"{len(costs)} sequences; cheapest three:")
for c, d in costs[:3]:
    print(f"  {c:.4f}  {d}")

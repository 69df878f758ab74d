"""Early and revocable classification of time series as cost minimisation."""
from .classifiers import (ClassifierChain, ClassifierConfig, LogisticRegressionGD,
                          fit_chain, predict_confidence)
from .core import (INFINITE_COST, CostModel, DecisionSequence, Prefix, TimeSeries,
                   delay_cost, total_cost)
from .data import (Dataset, SplitPlan, SyntheticSpec, checkpoint_grid, generate_synthetic,
                   load_ucr, make_splits, save_ucr)
from .features import FEATURE_NAMES, extract
from .gamma import (ExpectedCostCurve, GammaModel, expected_change_cost, expected_cost_curve,
                    fit_gamma, revocable_cost_curve)
from .metrics import (EvalSummary, TestVerdict, Verdict, avg_cost, cohen_kappa,
                      friedman_ranks, wilcoxon_signed_rank)
from .sweep import (CostGrid, FittedDataset, SweepResult, export_result, fit_dataset,
                    run_pipeline, run_sweep)
from .trigger import (RunTrace, Strategy, StrategyKind, run_irrevocable, run_oracle,
                      run_revocable, useful_revocation_stats)

__version__ = "0.1.0"

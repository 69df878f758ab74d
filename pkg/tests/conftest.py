import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ecorev.classifiers import fit_chain
from ecorev.data import SyntheticSpec, generate_synthetic, make_splits
from ecorev.gamma import fit_gamma
from ecorev.sweep import fit_dataset

FLIP = SyntheticSpec(name="flip", n_series=120, length=40, gap=2.0, gap_start=1.0,
                     flip_at=0.4, flip_fraction=0.3)
SEPARATED = SyntheticSpec(name="separated", n_series=60, length=20, gap=4.0, gap_start=4.0,
                          noise=0.3, ar_coef=0.0)


@pytest.fixture(scope="session")
def flip_data():
    return generate_synthetic(FLIP, seed=7)


@pytest.fixture(scope="session")
def flip_fitted(flip_data):
    return fit_dataset(flip_data, seed=7, k_values=range(1, 4))


@pytest.fixture(scope="session")
def flip_test(flip_data, flip_fitted):
    return flip_data.subset(flip_fitted.plan.test)


@pytest.fixture(scope="session")
def constant_classes():
    """Series of constant -1 (class 0) and +1 (class 1) with a little noise."""
    rng = np.random.default_rng(0)
    y = np.repeat([0, 1], 20)
    X = np.where(y[:, None] == 1, 1.0, -1.0) + 0.05 * rng.standard_normal((40, 20))
    return X, y


@pytest.fixture(scope="session")
def separated_chain(constant_classes):
    X, y = constant_classes
    return fit_chain(X, y, (5, 10, 15, 20))

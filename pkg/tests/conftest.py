import numpy as np
import pytest

from dflsim.models import TrainedModel, fit_linear
from dflsim.pipeline import SplitSpec, apply_preprocess, fit_preprocess
from dflsim.scoring import score_dataset
from dflsim.synthesis import PACIFIC_BASELINE, synthesize_dataset
from dflsim.workflow import TrainingConfig, train


@pytest.fixture(scope="session")
def small_dataset():
    # ~500 records across all seven countries; fast enough for most suites.
    return synthesize_dataset(PACIFIC_BASELINE.with_counts(0.05), seed=3)


@pytest.fixture(scope="session")
def small_outcome(small_dataset):
    config = TrainingConfig(split=SplitSpec(seed=3, folds=5), families=("Linear",))
    return train(small_dataset, config)


@pytest.fixture(scope="session")
def full_dataset():
    # Full-scale calibrated population: 10,108 records.
    return synthesize_dataset(PACIFIC_BASELINE, seed=0)


@pytest.fixture(scope="session")
def full_linear(full_dataset):
    """A transparent model fitted on the whole population, no holdout."""
    scores = score_dataset(full_dataset)
    y = np.array([s.dfl_points for s in scores])
    plan = fit_preprocess(full_dataset.records, full_dataset.codebook, fitted_on="all")
    X = apply_preprocess(plan, full_dataset.records)
    model = fit_linear(X, y)
    return TrainedModel(
        family="Linear",
        model=model,
        plan=plan,
        feature_stds=X.std(axis=0, ddof=1),
        target_std=float(y.std(ddof=1)),
    )

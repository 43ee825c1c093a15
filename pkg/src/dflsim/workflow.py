"""End-to-end training: split, cross-validate families, select, extract levers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset
from .levers import LeverRow, lever_table
from .models import (
    BoostingConfig,
    EvaluationReport,
    ForestConfig,
    SelectionResult,
    TrainedModel,
    evaluate,
    fit_boosting,
    fit_forest,
    fit_linear,
    select_model,
)
from .pipeline import (
    SplitSpec,
    apply_preprocess,
    cross_validate,
    fit_preprocess,
    prepare_folds,
    stratified_split,
)
from .scoring import score_dataset


@dataclass(frozen=True)
class TrainingConfig:
    split: SplitSpec = SplitSpec()
    families: tuple = ("Linear", "RandomForest", "GradientBoosting")
    ridge: float = 1e-8
    forest: ForestConfig = ForestConfig()
    boosting: BoostingConfig = BoostingConfig()
    selection_epsilon: float = 0.01


@dataclass(frozen=True)
class TrainingOutcome:
    reports: list
    selection: SelectionResult
    selected: TrainedModel
    levers: list
    split_counts: dict
    dataset_fingerprint: str
    seed: int

    def model_fingerprint(self) -> str:
        doc = json.dumps(self.selected.to_dict(), sort_keys=True)
        return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dataset_fingerprint": self.dataset_fingerprint,
            "model_fingerprint": self.model_fingerprint(),
            "split_counts": self.split_counts,
            "evaluation": [r.to_dict() for r in self.reports],
            "selection": self.selection.to_dict(),
            "model": self.selected.to_dict(),
            "levers": [l.to_dict() for l in self.levers],
        }


def _fitter(family: str, config: TrainingConfig):
    if family == "Linear":
        return lambda X, y: fit_linear(X, y, ridge=config.ridge)
    if family == "RandomForest":
        cfg = replace(config.forest, seed=config.split.seed)
        return lambda X, y: fit_forest(X, y, cfg)
    if family == "GradientBoosting":
        cfg = replace(config.boosting, seed=config.split.seed)
        return lambda X, y: fit_boosting(X, y, cfg)
    raise ValueError(f"unknown model family {family!r}")


def train(dataset: Dataset, config: TrainingConfig = TrainingConfig()) -> TrainingOutcome:
    records = dataset.records
    scores = score_dataset(dataset)
    y = np.array([s.dfl_points for s in scores])

    train_idx, test_idx = stratified_split(records, config.split)
    train_records = [records[i] for i in train_idx]
    test_records = [records[i] for i in test_idx]
    y_train, y_test = y[train_idx], y[test_idx]

    plan = fit_preprocess(train_records, dataset.codebook, fitted_on="train-80pct")
    X_train = apply_preprocess(plan, train_records)
    X_test = apply_preprocess(plan, test_records)

    prepared = prepare_folds(train_records, y_train, dataset.codebook, config.split)
    reports: list[EvaluationReport] = []
    fitted: dict[str, object] = {}
    for family in config.families:
        fitter = _fitter(family, config)
        cv = cross_validate(
            train_records, y_train, dataset.codebook, fitter, config.split, prepared=prepared
        )
        model = fitter(X_train, y_train)
        fitted[family] = model
        rep = evaluate(model, X_test, y_test, family=family)
        reports.append(
            replace(rep, cv_r2_mean=cv.mean, cv_r2_std=cv.std, cv_fold_r2=cv.fold_r2)
        )

    selection = select_model(reports, epsilon=config.selection_epsilon)
    chosen = fitted[selection.chosen]
    trained = TrainedModel(
        family=selection.chosen,
        model=chosen,
        plan=plan,
        feature_stds=X_train.std(axis=0, ddof=1),
        target_std=float(y_train.std(ddof=1)),
    )
    levers: list[LeverRow] = []
    if trained.family == "Linear":
        levers = lever_table(trained, dataset.codebook)

    per_country = {}
    for i in test_idx:
        per_country[records[i].country] = per_country.get(records[i].country, 0) + 1
    return TrainingOutcome(
        reports=reports,
        selection=selection,
        selected=trained,
        levers=levers,
        split_counts={
            "train": len(train_idx),
            "test": len(test_idx),
            "test_by_stratum": per_country,
        },
        dataset_fingerprint=dataset.fingerprint(),
        seed=config.split.seed,
    )

"""Model families, evaluation metrics, and the multi-criteria selection rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pipeline import PreprocessPlan, plan_from_dict
from .trees import RegressionTree, bin_features, fit_tree

TRANSPARENCY_RANK = {"Linear": 1, "GradientBoosting": 2, "RandomForest": 3}

FAMILIES = ("Linear", "RandomForest", "GradientBoosting")


class LinearModel:
    """Ridge-stabilized least squares; intercept carried separately."""

    def __init__(self, intercept: float, coefficients: np.ndarray):
        self.intercept = float(intercept)
        self.coefficients = np.asarray(coefficients, dtype=float)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coefficients + self.intercept

    def to_jsonable(self) -> dict:
        return {"intercept": self.intercept, "coefficients": self.coefficients.tolist()}

    @classmethod
    def from_jsonable(cls, doc: dict) -> "LinearModel":
        return cls(doc["intercept"], np.array(doc["coefficients"]))


class ForestModel:
    def __init__(self, trees: list[RegressionTree]):
        if not trees:
            raise ValueError("a forest needs at least one tree")
        self.trees = trees

    def predict(self, X: np.ndarray) -> np.ndarray:
        acc = np.zeros(X.shape[0])
        for t in self.trees:
            acc += t.predict(X)
        return acc / len(self.trees)

    def to_jsonable(self) -> dict:
        return {"trees": [t.to_jsonable() for t in self.trees]}

    @classmethod
    def from_jsonable(cls, doc: dict) -> "ForestModel":
        return cls([RegressionTree.from_jsonable(t) for t in doc["trees"]])


class BoostingModel:
    def __init__(self, base: float, learning_rate: float, trees: list[RegressionTree]):
        if not trees:
            raise ValueError("a boosted ensemble needs at least one tree")
        self.base = float(base)
        self.learning_rate = float(learning_rate)
        self.trees = trees

    def predict(self, X: np.ndarray) -> np.ndarray:
        acc = np.full(X.shape[0], self.base)
        for t in self.trees:
            acc += self.learning_rate * t.predict(X)
        return acc

    def to_jsonable(self) -> dict:
        return {
            "base": self.base,
            "learning_rate": self.learning_rate,
            "trees": [t.to_jsonable() for t in self.trees],
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "BoostingModel":
        return cls(doc["base"], doc["learning_rate"],
                   [RegressionTree.from_jsonable(t) for t in doc["trees"]])


@dataclass(frozen=True)
class ForestConfig:
    trees: int = 100
    max_depth: int = 8
    min_leaf: int = 5
    feature_subsample: str = "sqrt"  # "sqrt" or "all"
    bootstrap: bool = True
    seed: int = 0


@dataclass(frozen=True)
class BoostingConfig:
    trees: int = 200
    max_depth: int = 3
    min_leaf: int = 5
    learning_rate: float = 0.1
    seed: int = 0


def _check_finite(X, y):
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("non-finite values in model inputs")


def fit_linear(X: np.ndarray, y: np.ndarray, ridge: float = 1e-8) -> LinearModel:
    """Minimize ||Xw + b - y||^2 + ridge * ||(w, b)||^2 via normal equations.

    The ridge term resolves the rank deficiency that full one-hot encoding
    introduces by construction; as ridge -> 0 on full-rank inputs the solution
    matches exact least squares.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_finite(X, y)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    gram = A.T @ A + ridge * np.eye(A.shape[1])
    theta = np.linalg.solve(gram, A.T @ y)
    return LinearModel(intercept=theta[-1], coefficients=theta[:-1])


def fit_forest(X, y, config: ForestConfig = ForestConfig()) -> ForestModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_finite(X, y)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    binned = bin_features(X)
    n, p = X.shape
    if config.feature_subsample == "sqrt":
        n_cand = max(1, int(math.sqrt(p)))
    elif config.feature_subsample == "all":
        n_cand = None
    else:
        raise ValueError(f"unknown feature_subsample {config.feature_subsample!r}")
    seeds = np.random.SeedSequence(config.seed).spawn(config.trees)
    trees = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        if config.bootstrap:
            rows = rng.integers(0, n, size=n)
            t = fit_tree(
                X[rows], y[rows], config.max_depth, config.min_leaf, rng=rng,
                n_candidate_features=n_cand,
                binned=_rebind(binned, rows),
            )
        else:
            t = fit_tree(
                X, y, config.max_depth, config.min_leaf, rng=rng,
                n_candidate_features=n_cand, binned=binned,
            )
        trees.append(t)
    return ForestModel(trees)


def _rebind(binned, rows):
    from .trees import BinnedMatrix

    return BinnedMatrix(codes=binned.codes[rows], cuts=binned.cuts, n_bins=binned.n_bins)


def fit_boosting(X, y, config: BoostingConfig = BoostingConfig()) -> BoostingModel:
    """Stage-wise least-squares boosting on residuals.

    Each stage fits a tree to the current residuals and adds learning_rate times
    its prediction, so training MSE on the fit set never increases per stage.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_finite(X, y)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    binned = bin_features(X)
    base = float(y.mean())
    residual = y - base
    rng = np.random.default_rng(config.seed)
    trees = []
    for _ in range(config.trees):
        t = fit_tree(X, residual, config.max_depth, config.min_leaf, rng=rng,
                     binned=binned)
        residual = residual - config.learning_rate * t.predict(X)
        trees.append(t)
    return BoostingModel(base=base, learning_rate=config.learning_rate, trees=trees)


@dataclass(frozen=True)
class EvaluationReport:
    family: str
    mse: float
    rmse: float
    mae: float
    test_r2: float | None
    cv_r2_mean: float | None = None
    cv_r2_std: float | None = None
    cv_fold_r2: tuple = ()

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mse": self.mse,
            "rmse": self.rmse,
            "mae": self.mae,
            "test_r2": self.test_r2,
            "cv_r2_mean": self.cv_r2_mean,
            "cv_r2_std": self.cv_r2_std,
            "cv_fold_r2": list(self.cv_fold_r2),
        }


def evaluate(model, X, y, family: str = "") -> EvaluationReport:
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("empty evaluation set")
    pred = model.predict(np.asarray(X, dtype=float))
    resid = y - pred
    mse = float((resid**2).mean())
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = None if sst == 0.0 else 1.0 - float((resid**2).sum()) / sst
    return EvaluationReport(
        family=family,
        mse=mse,
        rmse=math.sqrt(mse),
        mae=float(np.abs(resid).mean()),
        test_r2=r2,
    )


@dataclass(frozen=True)
class SelectionResult:
    chosen: str
    accuracy_survivors: tuple
    stability_survivors: tuple
    transparency_order: tuple
    epsilon: float

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen,
            "accuracy_survivors": list(self.accuracy_survivors),
            "stability_survivors": list(self.stability_survivors),
            "transparency_order": list(self.transparency_order),
            "epsilon": self.epsilon,
        }


def select_model(
    reports: list[EvaluationReport],
    epsilon: float = 0.01,
    stability_slack: float = 0.10,
    transparency_rank: dict | None = None,
) -> SelectionResult:
    """Lexicographic selection: accuracy, then stability, then transparency.

    Candidates within epsilon of the best test R^2 advance; among those, the
    lowest CV std plus candidates within `stability_slack` relative advance;
    the most transparent survivor wins.
    """
    if not reports:
        raise ValueError("select_model needs at least one candidate")
    ranks = transparency_rank or TRANSPARENCY_RANK
    ordered = sorted(reports, key=lambda r: r.family)  # order-invariant
    best_r2 = max(r.test_r2 for r in ordered if r.test_r2 is not None)
    acc = [r for r in ordered if r.test_r2 is not None and r.test_r2 >= best_r2 - epsilon]
    stds = [r.cv_r2_std for r in acc if r.cv_r2_std is not None]
    if stds:
        best_std = min(stds)
        stab = [
            r for r in acc
            if r.cv_r2_std is not None and r.cv_r2_std <= best_std * (1.0 + stability_slack)
        ]
        if not stab:
            stab = acc
    else:
        stab = acc
    winner = min(stab, key=lambda r: ranks.get(r.family, 99))
    return SelectionResult(
        chosen=winner.family,
        accuracy_survivors=tuple(r.family for r in acc),
        stability_survivors=tuple(r.family for r in stab),
        transparency_order=tuple(
            r.family for r in sorted(stab, key=lambda r: ranks.get(r.family, 99))
        ),
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class TrainedModel:
    """A fitted predictor plus the preprocessing plan it was fitted with."""

    family: str
    model: object
    plan: PreprocessPlan
    feature_stds: np.ndarray = field(default_factory=lambda: np.empty(0))
    target_std: float = 0.0

    @property
    def transparency_rank(self) -> int:
        return TRANSPARENCY_RANK[self.family]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(X)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "parameters": self.model.to_jsonable(),
            "plan": self.plan.to_dict(),
            "feature_stds": np.asarray(self.feature_stds).tolist(),
            "target_std": self.target_std,
            "transparency_rank": self.transparency_rank,
        }


_MODEL_CLASSES = {
    "Linear": LinearModel,
    "RandomForest": ForestModel,
    "GradientBoosting": BoostingModel,
}


def trained_model_from_dict(doc: dict) -> TrainedModel:
    cls = _MODEL_CLASSES[doc["family"]]
    return TrainedModel(
        family=doc["family"],
        model=cls.from_jsonable(doc["parameters"]),
        plan=plan_from_dict(doc["plan"]),
        feature_stds=np.array(doc.get("feature_stds", [])),
        target_std=float(doc.get("target_std", 0.0)),
    )

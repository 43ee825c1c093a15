"""Leakage-safe preprocessing and the nested validation protocol.

Imputation values and one-hot encoding maps are fitted on training partitions
only and applied unchanged to held-out records, so evaluation metrics reflect
genuine generalization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.20
    strata_field: str = "country"
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")


def _strata(records, field_name: str) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        v = r.get(field_name)
        if v is None:
            raise ValueError(f"record {r.record_id} has no stratum value for {field_name!r}")
        groups.setdefault(str(v), []).append(i)
    return groups


def stratified_split(records, spec: SplitSpec) -> tuple[list[int], list[int]]:
    """Deterministic stratified holdout split; returns (train, test) index lists."""
    rng = np.random.default_rng(spec.seed)
    train: list[int] = []
    test: list[int] = []
    for stratum in sorted(_strata(records, spec.strata_field)):
        idx = _strata(records, spec.strata_field)[stratum]
        if len(idx) < spec.folds:
            raise ValueError(
                f"stratum {stratum!r} has {len(idx)} records, fewer than {spec.folds} folds"
            )
        order = rng.permutation(len(idx))
        n_test = round(spec.test_fraction * len(idx))
        for pos, j in enumerate(order):
            (test if pos < n_test else train).append(idx[j])
    return sorted(train), sorted(test)


def fold_assignments(records, indices: list[int], spec: SplitSpec) -> np.ndarray:
    """Fold id per position in `indices`; strata shuffled then dealt round-robin."""
    rng = np.random.default_rng([spec.seed, 1])
    pos = {idx: p for p, idx in enumerate(indices)}
    folds = np.empty(len(indices), dtype=int)
    subset = [records[i] for i in indices]
    groups = _strata(subset, spec.strata_field)
    for stratum in sorted(groups):
        local = groups[stratum]
        order = rng.permutation(len(local))
        for deal, j in enumerate(order):
            folds[pos[indices[local[j]]]] = deal % spec.folds
    return folds


@dataclass(frozen=True)
class PreprocessPlan:
    """Frozen imputation and encoding parameters fitted on one partition."""

    numeric_impute: dict = field(default_factory=dict)   # field -> fit-set mean
    categorical_impute: dict = field(default_factory=dict)  # field -> fit-set mode
    encoding: dict = field(default_factory=dict)  # field -> {category: column offset}
    columns: tuple[str, ...] = ()
    field_order: tuple[str, ...] = ()
    fitted_on: str = "unspecified"

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    def to_dict(self) -> dict:
        return {
            "numeric_impute": dict(self.numeric_impute),
            "categorical_impute": dict(self.categorical_impute),
            "encoding": {k: dict(v) for k, v in self.encoding.items()},
            "columns": list(self.columns),
            "field_order": list(self.field_order),
            "fitted_on": self.fitted_on,
        }


def plan_from_dict(doc: dict) -> PreprocessPlan:
    return PreprocessPlan(
        numeric_impute=doc["numeric_impute"],
        categorical_impute=doc["categorical_impute"],
        encoding={k: dict(v) for k, v in doc["encoding"].items()},
        columns=tuple(doc["columns"]),
        field_order=tuple(doc["field_order"]),
        fitted_on=doc.get("fitted_on", "unspecified"),
    )


def fit_preprocess(records, codebook: Codebook, fitted_on: str = "train") -> PreprocessPlan:
    """Fit imputation values and one-hot maps on the given records only."""
    if not records:
        raise ValueError("fit_preprocess requires a non-empty fit set")
    numeric_impute: dict[str, float] = {}
    categorical_impute: dict[str, str] = {}
    encoding: dict[str, dict[str, int]] = {}
    columns: list[str] = []
    order: list[str] = []
    for f in codebook.feature_fields():
        order.append(f.name)
        values = [r.get(f.name) for r in records]
        observed = [v for v in values if v is not None]
        if f.kind == "Numeric":
            if observed:
                numeric_impute[f.name] = float(np.mean([float(v) for v in observed]))
            else:
                warnings.warn(f"field {f.name!r} entirely missing in fit set; imputing 0")
                numeric_impute[f.name] = 0.0
            columns.append(f.name)
        else:
            if observed:
                counts: dict[str, int] = {}
                for v in observed:
                    counts[str(v)] = counts.get(str(v), 0) + 1
                best = max(counts.values())
                mode = min(c for c, k in counts.items() if k == best)  # lexicographic tie
            else:
                warnings.warn(
                    f"field {f.name!r} entirely missing in fit set; imputing first category"
                )
                mode = f.categories[0]
            categorical_impute[f.name] = mode
            seen = sorted({str(v) for v in observed} | {mode})
            encoding[f.name] = {c: j for j, c in enumerate(seen)}
            columns.extend(f"{f.name}={c}" for c in seen)
    return PreprocessPlan(
        numeric_impute=numeric_impute,
        categorical_impute=categorical_impute,
        encoding=encoding,
        columns=tuple(columns),
        field_order=tuple(order),
        fitted_on=fitted_on,
    )


def apply_preprocess(plan: PreprocessPlan, records) -> np.ndarray:
    """Materialize the fully imputed feature matrix under a fitted plan.

    Unseen categories map to an all-zeros indicator block for their field.
    """
    n = len(records)
    X = np.zeros((n, plan.n_columns))
    col = 0
    for name in plan.field_order:
        if name in plan.numeric_impute:
            fill = plan.numeric_impute[name]
            for i, r in enumerate(records):
                v = r.get(name)
                X[i, col] = fill if v is None else float(v)
            col += 1
        else:
            enc = plan.encoding[name]
            mode = plan.categorical_impute[name]
            for i, r in enumerate(records):
                v = r.get(name)
                v = mode if v is None else str(v)
                j = enc.get(v)
                if j is not None:
                    X[i, col + j] = 1.0
            col += len(enc)
    return X


@dataclass(frozen=True)
class CVResult:
    fold_r2: tuple  # one entry per fold; None where the fold was degenerate
    mean: float
    std: float
    fold_sizes: tuple

    @property
    def valid_folds(self) -> list[float]:
        return [r for r in self.fold_r2 if r is not None]


@dataclass(frozen=True)
class FoldData:
    """Per-fold materialization: plan fitted on the complement, both matrices."""

    plan: PreprocessPlan
    X_fit: np.ndarray
    y_fit: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray


def prepare_folds(records, y, codebook: Codebook, spec: SplitSpec) -> list[FoldData]:
    """Materialize fold matrices once; model families can share them because
    the preprocessing plans depend only on the fold assignment."""
    y = np.asarray(y, dtype=float)
    indices = list(range(len(records)))
    folds = fold_assignments(records, indices, spec)
    prepared = []
    for k in range(spec.folds):
        hold = folds == k
        fit_records = [records[i] for i in indices if not hold[i]]
        val_records = [records[i] for i in indices if hold[i]]
        plan = fit_preprocess(fit_records, codebook, fitted_on=f"cv-fold-{k}-complement")
        prepared.append(
            FoldData(
                plan=plan,
                X_fit=apply_preprocess(plan, fit_records),
                y_fit=y[~hold],
                X_val=apply_preprocess(plan, val_records),
                y_val=y[hold],
            )
        )
    return prepared


def cross_validate(
    records, y, codebook: Codebook, fitter, spec: SplitSpec,
    prepared: list[FoldData] | None = None,
) -> CVResult:
    """K-fold evaluation with per-fold preprocessing fit on the complement folds.

    `fitter(X, y)` must return an object with a `predict(X)` method.
    """
    if prepared is None:
        prepared = prepare_folds(records, y, codebook, spec)
    r2s: list[float | None] = []
    sizes = []
    for k, fold in enumerate(prepared):
        y_val = fold.y_val
        sizes.append(int(y_val.size))
        model = fitter(fold.X_fit, fold.y_fit)
        pred = model.predict(fold.X_val)
        sst = float(((y_val - y_val.mean()) ** 2).sum())
        if sst == 0.0:
            warnings.warn(f"fold {k} has zero target variance; R^2 undefined")
            r2s.append(None)
            continue
        sse = float(((y_val - pred) ** 2).sum())
        r2s.append(1.0 - sse / sst)
    valid = [r for r in r2s if r is not None]
    if not valid:
        raise ValueError("every fold was degenerate; cross-validation impossible")
    mean = float(np.mean(valid))
    std = float(np.std(valid, ddof=1)) if len(valid) > 1 else 0.0
    return CVResult(fold_r2=tuple(r2s), mean=mean, std=std, fold_sizes=tuple(sizes))

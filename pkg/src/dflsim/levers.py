"""Policy lever extraction: standardized coefficients and relative predictive weights."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, SCORED_DOMAINS
from .models import TrainedModel

DOMAIN_ORDER = ("Digital", "Financial", "DigitalFinancial", "SocioEconomic", "Demographic")


class LeverExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class LeverRow:
    field: str
    domain: str
    modifiable: bool
    raw_coefficient: float       # summed over the field's indicator columns
    standardized_coefficient: float  # sum of |standardized| over those columns
    relative_weight: float       # percent of the model's total |standardized| mass

    @property
    def role(self) -> str:
        return "policy lever" if self.modifiable else "segmentation variable"

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "domain": self.domain,
            "modifiable": self.modifiable,
            "role": self.role,
            "raw_coefficient": self.raw_coefficient,
            "standardized_coefficient": self.standardized_coefficient,
            "relative_weight": self.relative_weight,
        }


def standardize(raw: np.ndarray, feature_stds: np.ndarray, target_std: float) -> np.ndarray:
    """Scale raw coefficients to standardized units: raw * std(x) / std(y).

    Zero-variance features standardize to exactly 0.
    """
    if target_std <= 0:
        raise ValueError("target std must be positive")
    return np.asarray(raw) * np.asarray(feature_stds) / target_std


def classify_features(codebook: Codebook) -> tuple[list[str], list[str]]:
    """Split the codebook into (modifiable lever ids, segmentation variable ids)."""
    levers = [f.name for f in codebook.fields if f.modifiable and f.domain in SCORED_DOMAINS]
    segmentation = [f.name for f in codebook.fields if f.name not in levers]
    if not levers:
        warnings.warn("codebook defines no modifiable fields; lever set is empty")
    return levers, segmentation


def lever_table(
    model: TrainedModel,
    codebook: Codebook,
    normalize_over: str = "all",  # "all" or "modifiable"
) -> list[LeverRow]:
    """Per-field predictive weights from the transparent model's coefficients.

    Indicator columns of one categorical field aggregate into a single row by
    summing absolute standardized coefficients.  Weights are normalized over
    all features by default so each weight reads as a share of the model's
    total predictive mass.
    """
    if model.family != "Linear":
        raise LeverExtractionError("lever extraction requires the transparent model")
    if normalize_over not in ("all", "modifiable"):
        raise ValueError(f"unknown normalization base {normalize_over!r}")
    std_coefs = standardize(model.model.coefficients, model.feature_stds, model.target_std)
    plan = model.plan

    per_field_abs: dict[str, float] = {}
    per_field_raw: dict[str, float] = {}
    col = 0
    for name in plan.field_order:
        width = 1 if name in plan.numeric_impute else len(plan.encoding[name])
        block = slice(col, col + width)
        per_field_abs[name] = float(np.abs(std_coefs[block]).sum())
        per_field_raw[name] = float(model.model.coefficients[block].sum())
        col += width

    levers, _ = classify_features(codebook)
    if normalize_over == "all":
        total = sum(per_field_abs.values())
    else:
        total = sum(v for k, v in per_field_abs.items() if k in levers)
    if total == 0:
        raise LeverExtractionError("model has no standardized coefficient mass")

    rows = [
        LeverRow(
            field=name,
            domain=codebook[name].domain,
            modifiable=name in levers,
            raw_coefficient=per_field_raw[name],
            standardized_coefficient=per_field_abs[name],
            relative_weight=per_field_abs[name] / total * 100.0,
        )
        for name in plan.field_order
    ]
    rows.sort(key=lambda r: (DOMAIN_ORDER.index(r.domain), -r.relative_weight, r.field))
    return rows

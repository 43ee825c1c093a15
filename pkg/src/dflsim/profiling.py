"""Descriptive analytics: country baselines, CV discriminance, gap tables, correlation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .scoring import CompetencyScores

DEFAULT_MIN_CELL = 30


@dataclass(frozen=True)
class MeasureStats:
    mean: float
    median: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class CountryStats:
    country: str
    count: int
    dfc: MeasureStats
    dfl: MeasureStats


@dataclass(frozen=True)
class DiscriminanceRow:
    country: str
    cv_dfc: float
    cv_dfl: float
    dfc_more_discriminant: bool


@dataclass(frozen=True)
class GapRow:
    category: str
    lowest_group: str
    lowest_mean: float
    highest_group: str
    highest_mean: float
    gap: float


def _measure_stats(values: np.ndarray) -> MeasureStats:
    # Sample (n-1) standard deviation throughout; survey convention.
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return MeasureStats(
        mean=float(values.mean()),
        median=float(np.median(values)),
        std=std,
        min=float(values.min()),
        max=float(values.max()),
    )


def _by_country(scores: list[CompetencyScores]) -> dict[str, list[CompetencyScores]]:
    out: dict[str, list[CompetencyScores]] = {}
    for s in scores:
        out.setdefault(s.country, []).append(s)
    return out


def country_stats(scores: list[CompetencyScores]) -> list[CountryStats]:
    if not scores:
        raise ValueError("country_stats requires a non-empty scored dataset")
    rows = []
    for country, group in sorted(_by_country(scores).items()):
        dfc = np.array([s.dfc_pct for s in group])
        dfl = np.array([s.dfl_pct for s in group])
        rows.append(
            CountryStats(
                country=country,
                count=len(group),
                dfc=_measure_stats(dfc),
                dfl=_measure_stats(dfl),
            )
        )
    return rows


def coefficient_of_variation(mean: float, std: float) -> float:
    if mean <= 0:
        raise ValueError(f"coefficient of variation undefined for mean {mean}")
    return std / mean


def discriminance_report(scores: list[CompetencyScores]) -> list[DiscriminanceRow]:
    """Per-country CV comparison flagging where DFC spreads more than DFL."""
    rows = []
    for cs in country_stats(scores):
        cv_dfc = coefficient_of_variation(cs.dfc.mean, cs.dfc.std)
        cv_dfl = coefficient_of_variation(cs.dfl.mean, cs.dfl.std)
        rows.append(
            DiscriminanceRow(
                country=cs.country,
                cv_dfc=cv_dfc,
                cv_dfl=cv_dfl,
                dfc_more_discriminant=cv_dfc > cv_dfl,
            )
        )
    return rows


def gap_table(
    dataset: Dataset,
    scores: list[CompetencyScores],
    category_fields: list[str],
    measure: str = "DFC",
    min_cell: int = DEFAULT_MIN_CELL,
) -> list[GapRow]:
    """Lowest/highest group means per category field, sorted by gap descending.

    Groups smaller than min_cell are excluded; fields left with fewer than two
    eligible groups are skipped with a warning.
    """
    if measure not in ("DFC", "DFL"):
        raise ValueError(f"unknown measure {measure!r}")
    value = {
        s.record_id: (s.dfc_pct if measure == "DFC" else s.dfl_pct) for s in scores
    }
    rows = []
    for name in category_fields:
        f = dataset.codebook[name]
        if f.kind not in ("Categorical", "Ordinal", "Binary"):
            raise ValueError(f"gap_table needs a categorical field, got {name!r} ({f.kind})")
        groups: dict[str, list[float]] = {}
        for r in dataset.records:
            v = r.get(name)
            if v is None:
                continue
            groups.setdefault(str(v), []).append(value[r.record_id])
        eligible = {g: vs for g, vs in groups.items() if len(vs) >= min_cell}
        if len(eligible) < 2:
            warnings.warn(
                f"gap_table: field {name!r} has fewer than two groups of size >= {min_cell}; skipped"
            )
            continue
        means = {g: float(np.mean(vs)) for g, vs in eligible.items()}
        # Ties broken lexicographically on group label (min/max keep the first
        # extremum seen, and the labels are iterated in sorted order).
        labels = sorted(means)
        lowest = min(labels, key=means.get)
        highest = max(labels, key=means.get)
        rows.append(
            GapRow(
                category=name,
                lowest_group=lowest,
                lowest_mean=means[lowest],
                highest_group=highest,
                highest_mean=means[highest],
                gap=means[highest] - means[lowest],
            )
        )
    rows.sort(key=lambda r: -r.gap)
    return rows


def dfc_dfl_correlation(stats: list[CountryStats]) -> float:
    """Pearson correlation between per-country DFC and DFL means."""
    if len(stats) < 3:
        raise ValueError("correlation needs at least 3 countries")
    x = np.array([c.dfc.mean for c in stats])
    y = np.array([c.dfl.mean for c in stats])
    sx, sy = x.std(ddof=1), y.std(ddof=1)
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for zero-variance means")
    r = float(((x - x.mean()) * (y - y.mean())).sum() / ((len(x) - 1) * sx * sy))
    return max(-1.0, min(1.0, r))

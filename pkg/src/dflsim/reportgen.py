"""Report rendering: delimited tables and matplotlib figures for each phase."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .profiling import CountryStats, DiscriminanceRow, GapRow
from .scenario import SimulationResult, SubgroupRow

DEMOGRAPHIC_GAP_FIELDS = [
    "spoken_language", "settlement_size", "area", "household_composition",
    "age_group", "gender",
]
SOCIOECONOMIC_GAP_FIELDS = ["education", "occupation", "income_band"]
BEHAVIORAL_GAP_FIELDS = [
    "digital_spending_tracking", "digital_autonomy", "cybersecurity_resilience",
    "mobile_money_use", "password_memory", "digital_wallet_ownership",
]


def _write_csv(path: Path, header: list[str], rows: list[list], provenance: list[str]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for line in provenance:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _pct(x: float) -> str:
    return f"{x:.1f}"


def write_country_stats(stats: list[CountryStats], path: Path, provenance: list[str]):
    header = [
        "country", "count",
        "dfc_mean", "dfc_median", "dfc_std", "dfc_min", "dfc_max",
        "dfl_mean", "dfl_median", "dfl_std", "dfl_min", "dfl_max",
    ]
    rows = [
        [c.country, c.count,
         _pct(c.dfc.mean), _pct(c.dfc.median), _pct(c.dfc.std), _pct(c.dfc.min), _pct(c.dfc.max),
         _pct(c.dfl.mean), _pct(c.dfl.median), _pct(c.dfl.std), _pct(c.dfl.min), _pct(c.dfl.max)]
        for c in stats
    ]
    _write_csv(path, header, rows, provenance)


def write_discriminance(rows: list[DiscriminanceRow], path: Path, provenance: list[str]):
    _write_csv(
        path,
        ["country", "cv_dfc", "cv_dfl", "dfc_more_discriminant"],
        [[r.country, f"{r.cv_dfc:.3f}", f"{r.cv_dfl:.3f}", str(r.dfc_more_discriminant).lower()]
         for r in rows],
        provenance,
    )


def write_gap_table(rows: list[GapRow], path: Path, provenance: list[str]):
    _write_csv(
        path,
        ["category", "lowest_group", "lowest_mean", "highest_group", "highest_mean", "gap"],
        [[r.category, r.lowest_group, _pct(r.lowest_mean),
          r.highest_group, _pct(r.highest_mean), _pct(r.gap)] for r in rows],
        provenance,
    )


def write_model_comparison(reports, path: Path, provenance: list[str]):
    _write_csv(
        path,
        ["family", "mse", "rmse", "mae", "test_r2", "cv_r2_mean", "cv_r2_std"],
        [[r.family, f"{r.mse:.2f}", f"{r.rmse:.2f}", f"{r.mae:.2f}",
          "" if r.test_r2 is None else f"{r.test_r2:.4f}",
          "" if r.cv_r2_mean is None else f"{r.cv_r2_mean:.4f}",
          "" if r.cv_r2_std is None else f"{r.cv_r2_std:.4f}"] for r in reports],
        provenance,
    )


def write_lever_table(levers, path: Path, provenance: list[str]):
    _write_csv(
        path,
        ["field", "domain", "role", "raw_coefficient", "standardized_coefficient",
         "relative_weight"],
        [[l.field, l.domain, l.role, f"{l.raw_coefficient:.4f}",
          f"{l.standardized_coefficient:.4f}", f"{l.relative_weight:.2f}"] for l in levers],
        provenance,
    )


def write_scenario_outcomes(results: list[SimulationResult], path: Path, provenance: list[str]):
    _write_csv(
        path,
        ["scenario", "levers", "reach_pct", "population_gain_pct", "reached_gain_pct",
         "population_gain_points"],
        [[r.scenario.name, "+".join(sorted(r.scenario.assignments)),
          _pct(100.0 * r.reach), _pct(r.population_gain_pct), _pct(r.reached_gain_pct),
          f"{r.population_gain_points:.2f}"] for r in results],
        provenance,
    )


def write_subgroups(rows: list[SubgroupRow], path: Path, provenance: list[str]):
    _write_csv(
        path,
        ["field", "group", "count", "reach_pct", "mean_gain_pct"],
        [[r.field, r.group, r.count, _pct(100.0 * r.reach), _pct(r.mean_gain_pct)]
         for r in rows],
        provenance,
    )


def _save(fig, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def figure_country_scores(stats: list[CountryStats], path: Path):
    countries = [c.country for c in stats]
    x = np.arange(len(countries))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(x - 0.2, [c.dfc.mean for c in stats], width=0.4, label="DFC mean")
    ax.bar(x + 0.2, [c.dfl.mean for c in stats], width=0.4, label="DFL mean")
    ax.set_xticks(x)
    ax.set_xticklabels(countries, rotation=30, ha="right")
    ax.set_ylabel("score (%)")
    ax.set_title("Competency baselines by country")
    ax.legend()
    _save(fig, path)


def figure_dfc_dfl_scatter(stats: list[CountryStats], correlation: float, path: Path):
    fig, ax = plt.subplots(figsize=(6, 5))
    xs = [c.dfc.mean for c in stats]
    ys = [c.dfl.mean for c in stats]
    ax.scatter(xs, ys)
    for c in stats:
        ax.annotate(c.country, (c.dfc.mean, c.dfl.mean), fontsize=8,
                    xytext=(4, 4), textcoords="offset points")
    ax.set_xlabel("DFC mean (%)")
    ax.set_ylabel("DFL mean (%)")
    ax.set_title(f"Country means, Pearson r = {correlation:.3f}")
    _save(fig, path)


def figure_gap_table(rows: list[GapRow], title: str, path: Path):
    fig, ax = plt.subplots(figsize=(8, 0.6 * max(4, len(rows))))
    names = [r.category for r in rows][::-1]
    gaps = [r.gap for r in rows][::-1]
    ax.barh(names, gaps)
    ax.set_xlabel("gap (percentage points)")
    ax.set_title(title)
    _save(fig, path)


def figure_model_comparison(reports, path: Path):
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    families = [r.family for r in reports]
    axes[0].bar(families, [r.test_r2 or 0.0 for r in reports])
    axes[0].set_title("Test R^2")
    axes[0].set_ylim(0, 1.05)
    axes[1].bar(families, [r.cv_r2_std or 0.0 for r in reports])
    axes[1].set_title("CV R^2 std (stability)")
    for ax in axes:
        ax.tick_params(axis="x", rotation=20)
    _save(fig, path)


def figure_lever_weights(levers, path: Path):
    mod = [l for l in levers if l.modifiable]
    fig, ax = plt.subplots(figsize=(8, 0.45 * max(6, len(mod))))
    names = [l.field for l in mod][::-1]
    ax.barh(names, [l.relative_weight for l in mod][::-1])
    ax.set_xlabel("relative predictive weight (%)")
    ax.set_title("Modifiable policy levers")
    _save(fig, path)


def figure_scenario_outcomes(results: list[SimulationResult], path: Path):
    fig, ax = plt.subplots(figsize=(8, 0.5 * max(5, len(results))))
    names = [r.scenario.name for r in results][::-1]
    gains = [r.population_gain_pct for r in results][::-1]
    reach = [100.0 * r.reach for r in results][::-1]
    y = np.arange(len(names))
    ax.barh(y + 0.18, gains, height=0.36, label="population gain (pp)")
    ax.barh(y - 0.18, [x / 10 for x in reach], height=0.36, label="reach (% / 10)")
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=8)
    ax.set_title("Forecasted scenario outcomes")
    ax.legend()
    _save(fig, path)

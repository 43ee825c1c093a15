"""Batch command-line entry point driving the full pipeline."""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from .codebook import save_codebook
from .dataset import load_dataset, summarize, write_dataset
from .levers import LeverRow
from .models import EvaluationReport, trained_model_from_dict
from .pipeline import SplitSpec
from .profiling import (
    CountryStats,
    DiscriminanceRow,
    GapRow,
    MeasureStats,
    country_stats,
    dfc_dfl_correlation,
    discriminance_report,
    gap_table,
)
from .reportgen import (
    BEHAVIORAL_GAP_FIELDS,
    DEMOGRAPHIC_GAP_FIELDS,
    SOCIOECONOMIC_GAP_FIELDS,
    figure_country_scores,
    figure_dfc_dfl_scatter,
    figure_gap_table,
    figure_lever_weights,
    figure_model_comparison,
    write_country_stats,
    write_discriminance,
    write_gap_table,
    write_lever_table,
    write_model_comparison,
)
from .scenario import (
    SCENARIO_PRESETS,
    ResponderConfig,
    Scenario,
    disaggregate,
    load_scenario,
    partition_responders,
    simulate,
)
from .scoring import score_dataset, write_scores
from .synthesis import CALIBRATION_PRESETS, synthesize_dataset
from .workflow import TrainingConfig, train


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _provenance(command: str, **flags) -> list[str]:
    # File flags are recorded by basename so re-running the same pipeline in a
    # different directory reproduces the artifacts byte for byte.
    shown = {k: (v.name if isinstance(v, Path) else v) for k, v in flags.items()}
    parts = " ".join(f"--{k.replace('_', '-')}={v}" for k, v in sorted(shown.items()))
    return [f"dflsim {command} {parts}"]


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


@click.group()
def main():
    """Digital financial literacy profiling, modelling, and scenario simulation."""


@main.command()
@click.option("--calibration", default="pacific-baseline",
              type=click.Choice(sorted(CALIBRATION_PRESETS)), show_default=True)
@click.option("--scale", default=1.0, show_default=True,
              help="Scale factor applied to the preset per-country counts.")
@click.option("--seed", default=0, show_default=True)
@click.option("--missing-rate", default=0.02, show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def synth(calibration, scale, seed, missing_rate, out):
    """Generate a calibrated synthetic dataset and its codebook."""
    try:
        spec = CALIBRATION_PRESETS[calibration]
        if scale != 1.0:
            spec = spec.with_counts(scale)
        if missing_rate != spec.missing_rate:
            spec = replace(spec, missing_rate=missing_rate)
        dataset = synthesize_dataset(spec, seed=seed)
    except ValueError as exc:
        _fail(str(exc))
    out.mkdir(parents=True, exist_ok=True)
    save_codebook(dataset.codebook, out / "codebook.json")
    write_dataset(dataset, out / "data.csv")
    s = summarize(dataset)
    _write_json(out / "summary.json", {
        "provenance": _provenance("synth", calibration=calibration, scale=scale,
                                  seed=seed, missing_rate=missing_rate),
        "records": s.total,
        "country_counts": s.country_counts,
        "fingerprint": dataset.fingerprint(),
        "seed": seed,
    })
    click.echo(f"wrote {s.total} records to {out / 'data.csv'}")


@main.command()
@click.option("--codebook", "codebook_path", required=True, type=click.Path(path_type=Path))
@click.option("--data", "data_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
def ingest(codebook_path, data_path, out):
    """Validate a microdata file against a codebook and emit a summary."""
    try:
        dataset = load_dataset(codebook_path, data_path)
    except (ValueError, FileNotFoundError) as exc:
        _fail(str(exc))
    out.mkdir(parents=True, exist_ok=True)
    s = summarize(dataset)
    _write_json(out / "summary.json", {
        "provenance": _provenance("ingest", codebook=codebook_path, data=data_path),
        "records": s.total,
        "country_counts": s.country_counts,
        "missingness": s.missingness,
        "fingerprint": dataset.fingerprint(),
    })
    click.echo(f"validated {s.total} records")


def _load(codebook_path, data_path):
    try:
        return load_dataset(codebook_path, data_path)
    except (ValueError, FileNotFoundError) as exc:
        _fail(str(exc))


@main.command()
@click.option("--codebook", "codebook_path", required=True, type=click.Path(path_type=Path))
@click.option("--data", "data_path", required=True, type=click.Path(path_type=Path))
@click.option("--min-cell", default=30, show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def profile(codebook_path, data_path, min_cell, out):
    """Phase 1: descriptive profiling of the competency divide."""
    dataset = _load(codebook_path, data_path)
    scores = score_dataset(dataset)
    stats = country_stats(scores)
    out.mkdir(parents=True, exist_ok=True)
    write_scores(scores, out / "scores.csv")
    gaps = {}
    for label, fields in (("demographic", DEMOGRAPHIC_GAP_FIELDS),
                          ("socioeconomic", SOCIOECONOMIC_GAP_FIELDS),
                          ("behavioral", BEHAVIORAL_GAP_FIELDS)):
        present = [f for f in fields if f in dataset.codebook]
        gaps[label] = [vars(g) for g in gap_table(dataset, scores, present, min_cell=min_cell)]
    doc = {
        "provenance": _provenance("profile", codebook=codebook_path, data=data_path,
                                  min_cell=min_cell),
        "country_stats": [
            {"country": c.country, "count": c.count, "dfc": vars(c.dfc), "dfl": vars(c.dfl)}
            for c in stats
        ],
        "discriminance": [vars(d) for d in discriminance_report(scores)],
        "gap_tables": gaps,
        "dfc_dfl_correlation": dfc_dfl_correlation(stats) if len(stats) >= 3 else None,
    }
    _write_json(out / "profile.json", doc)
    click.echo(f"profiled {len(scores)} records across {len(stats)} countries")


@main.command("train")
@click.option("--codebook", "codebook_path", required=True, type=click.Path(path_type=Path))
@click.option("--data", "data_path", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True)
@click.option("--test-fraction", default=0.20, show_default=True)
@click.option("--folds", default=10, show_default=True)
@click.option("--families", default="linear,forest,boosting", show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def train_cmd(codebook_path, data_path, seed, test_fraction, folds, families, out):
    """Phase 2: train the model families, select one, extract policy levers."""
    dataset = _load(codebook_path, data_path)
    alias = {"linear": "Linear", "forest": "RandomForest", "boosting": "GradientBoosting"}
    try:
        fams = tuple(alias[f.strip().lower()] for f in families.split(","))
    except KeyError as exc:
        _fail(f"unknown family {exc.args[0]!r}; choose from {sorted(alias)}")
    try:
        config = TrainingConfig(
            split=SplitSpec(test_fraction=test_fraction, folds=folds, seed=seed),
            families=fams,
        )
        outcome = train(dataset, config)
    except ValueError as exc:
        _fail(str(exc))
    out.mkdir(parents=True, exist_ok=True)
    doc = outcome.to_dict()
    doc["provenance"] = _provenance(
        "train", codebook=codebook_path, data=data_path, seed=seed,
        test_fraction=test_fraction, folds=folds, families=families,
    )
    _write_json(out / "model.json", doc)
    click.echo(f"selected {outcome.selection.chosen} "
               f"(test R^2 per family: "
               + ", ".join(f"{r.family}={r.test_r2:.4f}" for r in outcome.reports) + ")")


@main.command("simulate")
@click.option("--codebook", "codebook_path", required=True, type=click.Path(path_type=Path))
@click.option("--data", "data_path", required=True, type=click.Path(path_type=Path))
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path))
@click.option("--scenario", "scenarios", multiple=True,
              help="Preset name, path to a scenario document, or 'all'. Repeatable.")
@click.option("--clip/--no-clip", default=True, show_default=True)
@click.option("--disaggregate-by", default="country,gender,area", show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def simulate_cmd(codebook_path, data_path, model_path, scenarios, clip, disaggregate_by, out):
    """Phase 3: run intervention scenarios and partition responders."""
    dataset = _load(codebook_path, data_path)
    try:
        model_doc = json.loads(Path(model_path).read_text(encoding="utf-8"))
        model = trained_model_from_dict(model_doc["model"])
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        _fail(f"cannot load model artifact: {exc}")

    chosen: list[Scenario] = []
    names = scenarios or ("all",)
    for name in names:
        if name == "all":
            chosen.extend(SCENARIO_PRESETS.values())
        elif name in SCENARIO_PRESETS:
            chosen.append(SCENARIO_PRESETS[name])
        elif Path(name).exists():
            chosen.append(load_scenario(name))
        else:
            _fail(f"unknown scenario {name!r}")
    chosen = [replace(s, clip=clip) for s in chosen]

    by = [f.strip() for f in disaggregate_by.split(",") if f.strip()]
    out.mkdir(parents=True, exist_ok=True)
    results = []
    provenance = _provenance(
        "simulate", codebook=codebook_path, data=data_path, model=model_path,
        scenario=",".join(s.name for s in chosen), clip=clip,
        disaggregate_by=disaggregate_by,
    )
    try:
        for scenario in chosen:
            result = simulate(dataset, model, scenario)
            results.append(result)
            _write_json(out / f"simulation_{scenario.name}.json", {
                "provenance": provenance,
                **result.to_dict(),
                "subgroups": [r.to_dict() for r in disaggregate(result, dataset, by)],
            })
        scores = score_dataset(dataset)
        baseline = {s.record_id: s.dfl_points for s in scores}
        partition = partition_responders(results, dataset, baseline, ResponderConfig())
        _write_json(out / "responders.json", {
            "provenance": provenance,
            "scenarios": [r.scenario.name for r in results],
            **{k: v for k, v in partition.to_dict().items()
               if k in ("profiles",)},
            "counts": {
                "broad_responders": len(partition.broad_responders),
                "deep_impact": len(partition.deep_impact),
                "non_responders": {
                    k: len(v) for k, v in partition.non_responders.items()
                },
                "ceiling_non_responders": {
                    k: len(v) for k, v in partition.ceiling_non_responders.items()
                },
            },
        })
        _write_json(out / "simulations.json", {
            "provenance": provenance,
            "results": [r.to_dict() for r in results],
        })
    except ValueError as exc:
        _fail(str(exc))
    for r in results:
        click.echo(f"{r.scenario.name}: reach {100 * r.reach:.1f}%, "
                   f"population gain {r.population_gain_pct:.1f} pp")


@main.command()
@click.option("--out", "run_dir", required=True, type=click.Path(path_type=Path),
              help="Directory holding profile/train/simulate outputs to render.")
def report(run_dir):
    """Render delimited tables and figures from prior pipeline outputs."""
    run_dir = Path(run_dir)
    tables = run_dir / "tables"
    figures = run_dir / "figures"
    rendered = []

    profile_path = run_dir / "profile.json"
    if profile_path.exists():
        doc = json.loads(profile_path.read_text(encoding="utf-8"))
        prov = doc.get("provenance", [])
        stats = [
            CountryStats(country=c["country"], count=c["count"],
                         dfc=MeasureStats(**c["dfc"]), dfl=MeasureStats(**c["dfl"]))
            for c in doc["country_stats"]
        ]
        write_country_stats(stats, tables / "country_stats.csv", prov)
        disc = [DiscriminanceRow(**d) for d in doc["discriminance"]]
        write_discriminance(disc, tables / "discriminance.csv", prov)
        figure_country_scores(stats, figures / "country_scores.png")
        if doc.get("dfc_dfl_correlation") is not None:
            figure_dfc_dfl_scatter(stats, doc["dfc_dfl_correlation"],
                                   figures / "dfc_dfl_correlation.png")
        for label, rows in doc["gap_tables"].items():
            gaps = [GapRow(**g) for g in rows]
            write_gap_table(gaps, tables / f"gaps_{label}.csv", prov)
            if gaps:
                figure_gap_table(gaps, f"Competency gaps: {label}",
                                 figures / f"gaps_{label}.png")
        rendered.append("profile")

    model_path = run_dir / "model.json"
    if model_path.exists():
        doc = json.loads(model_path.read_text(encoding="utf-8"))
        prov = doc.get("provenance", [])
        reports = [
            EvaluationReport(
                family=r["family"], mse=r["mse"], rmse=r["rmse"], mae=r["mae"],
                test_r2=r["test_r2"], cv_r2_mean=r["cv_r2_mean"], cv_r2_std=r["cv_r2_std"],
            )
            for r in doc["evaluation"]
        ]
        write_model_comparison(reports, tables / "model_comparison.csv", prov)
        figure_model_comparison(reports, figures / "model_comparison.png")
        levers = [
            LeverRow(field=l["field"], domain=l["domain"], modifiable=l["modifiable"],
                     raw_coefficient=l["raw_coefficient"],
                     standardized_coefficient=l["standardized_coefficient"],
                     relative_weight=l["relative_weight"])
            for l in doc.get("levers", [])
        ]
        if levers:
            write_lever_table(levers, tables / "lever_table.csv", prov)
            figure_lever_weights(levers, figures / "lever_weights.png")
        rendered.append("model")

    sims_path = run_dir / "simulations.json"
    if sims_path.exists():
        doc = json.loads(sims_path.read_text(encoding="utf-8"))
        prov = doc.get("provenance", [])
        header = ["scenario", "levers", "reach_pct", "population_gain_pct",
                  "reached_gain_pct", "population_gain_points"]
        tables.mkdir(parents=True, exist_ok=True)
        with (tables / "scenario_outcomes.csv").open("w", newline="", encoding="utf-8") as fh:
            for line in prov:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in doc["results"]:
                w.writerow([
                    r["scenario"]["name"],
                    "+".join(sorted(r["scenario"]["assignments"])),
                    f"{100 * r['reach']:.1f}",
                    f"{r['population_gain_pct']:.1f}",
                    f"{r['reached_gain_pct']:.1f}",
                    f"{r['population_gain_points']:.2f}",
                ])
        _scenario_outcome_figure(doc["results"], figures / "scenario_outcomes.png")
        rendered.append("simulations")

    if not rendered:
        _fail(f"no renderable artifacts found under {run_dir}")
    click.echo(f"rendered {', '.join(rendered)} into {tables} and {figures}")


def _scenario_outcome_figure(results: list[dict], path: Path):
    import matplotlib.pyplot as plt
    import numpy as np

    names = [r["scenario"]["name"] for r in results][::-1]
    gains = [r["population_gain_pct"] for r in results][::-1]
    reach = [100.0 * r["reach"] for r in results][::-1]
    y = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(8, 0.5 * max(5, len(names))))
    ax.barh(y + 0.18, gains, height=0.36, label="population gain (pp)")
    ax.barh(y - 0.18, [x / 10 for x in reach], height=0.36, label="reach (% / 10)")
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=8)
    ax.set_title("Forecasted scenario outcomes")
    ax.legend()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


@main.command()
@click.option("--bind", default="127.0.0.1:8765", show_default=True)
@click.option("--data-dir", default="service-data", show_default=True,
              type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True)
def serve(bind, data_dir, seed):
    """Run the HTTP intelligence service."""
    from .service import serve as _serve

    try:
        _serve(bind=bind, data_dir=data_dir, default_seed=seed)
    except OSError as exc:
        _fail(str(exc))


if __name__ == "__main__":
    main()

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from dflsim.cli import main

RUNNER = CliRunner()


def _run(*args):
    result = RUNNER.invoke(main, [str(a) for a in args], catch_exceptions=False)
    return result


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """One full CLI pipeline shared by the read-only assertions below."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    run = root / "run"
    r = _run("synth", "--scale", 0.05, "--seed", 3, "--out", data)
    assert r.exit_code == 0, r.output
    r = _run("profile", "--codebook", data / "codebook.json", "--data", data / "data.csv",
             "--min-cell", 10, "--out", run)
    assert r.exit_code == 0, r.output
    r = _run("train", "--codebook", data / "codebook.json", "--data", data / "data.csv",
             "--seed", 3, "--folds", 5, "--families", "linear", "--out", run)
    assert r.exit_code == 0, r.output
    r = _run("simulate", "--codebook", data / "codebook.json", "--data", data / "data.csv",
             "--model", run / "model.json", "--scenario", "device_access",
             "--scenario", "financial_capability_bundle", "--out", run)
    assert r.exit_code == 0, r.output
    r = _run("report", "--out", run)
    assert r.exit_code == 0, r.output
    return root


def test_synth_outputs(workdir):
    data = workdir / "data"
    assert (data / "codebook.json").exists()
    assert (data / "data.csv").exists()
    summary = json.loads((data / "summary.json").read_text())
    assert summary["records"] == sum(summary["country_counts"].values())
    assert summary["seed"] == 3
    assert any("dflsim synth" in line for line in summary["provenance"])


def test_ingest_round_trip(workdir, tmp_path):
    data = workdir / "data"
    r = _run("ingest", "--codebook", data / "codebook.json",
             "--data", data / "data.csv", "--out", tmp_path)
    assert r.exit_code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    original = json.loads((data / "summary.json").read_text())
    assert summary["fingerprint"] == original["fingerprint"]


def test_profile_artifacts(workdir):
    doc = json.loads((workdir / "run" / "profile.json").read_text())
    assert len(doc["country_stats"]) == 7
    assert {g for g in doc["gap_tables"]} == {"demographic", "socioeconomic", "behavioral"}
    assert (workdir / "run" / "scores.csv").exists()


def test_train_artifact(workdir):
    doc = json.loads((workdir / "run" / "model.json").read_text())
    assert doc["selection"]["chosen"] == "Linear"
    assert doc["split_counts"]["train"] + doc["split_counts"]["test"] == 505
    assert sum(l["relative_weight"] for l in doc["levers"]) == pytest.approx(100.0)


def test_simulate_artifacts(workdir):
    run = workdir / "run"
    sims = json.loads((run / "simulations.json").read_text())
    assert [r["scenario"]["name"] for r in sims["results"]] == [
        "device_access", "financial_capability_bundle"
    ]
    single = json.loads((run / "simulation_device_access.json").read_text())
    assert "subgroups" in single
    responders = json.loads((run / "responders.json").read_text())
    assert responders["counts"]["broad_responders"] >= 0
    assert "deep_impact" in responders["profiles"]


def test_report_renders_tables_and_figures(workdir):
    run = workdir / "run"
    for name in ("country_stats", "discriminance", "model_comparison",
                 "lever_table", "scenario_outcomes"):
        path = run / "tables" / f"{name}.csv"
        assert path.exists(), name
        text = path.read_text()
        assert text.startswith("# dflsim")  # provenance header
    for name in ("country_scores", "dfc_dfl_correlation", "model_comparison",
                 "lever_weights", "scenario_outcomes"):
        png = run / "figures" / f"{name}.png"
        assert png.exists(), name
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_synth_is_deterministic(tmp_path):
    for sub in ("a", "b"):
        r = _run("synth", "--scale", 0.02, "--seed", 11, "--out", tmp_path / sub)
        assert r.exit_code == 0
    assert (tmp_path / "a" / "data.csv").read_bytes() == (
        tmp_path / "b" / "data.csv"
    ).read_bytes()


def test_unknown_scenario_fails_cleanly(workdir, tmp_path):
    data = workdir / "data"
    run = workdir / "run"
    r = RUNNER.invoke(main, [
        "simulate", "--codebook", str(data / "codebook.json"),
        "--data", str(data / "data.csv"), "--model", str(run / "model.json"),
        "--scenario", "not_a_scenario", "--out", str(tmp_path),
    ])
    assert r.exit_code == 1
    assert "error:" in r.output


def test_unknown_family_fails_cleanly(workdir, tmp_path):
    data = workdir / "data"
    r = RUNNER.invoke(main, [
        "train", "--codebook", str(data / "codebook.json"),
        "--data", str(data / "data.csv"), "--families", "deep_net",
        "--out", str(tmp_path),
    ])
    assert r.exit_code == 1
    assert "error:" in r.output


def test_missing_input_fails_cleanly(tmp_path):
    r = RUNNER.invoke(main, [
        "profile", "--codebook", str(tmp_path / "nope.json"),
        "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path),
    ])
    assert r.exit_code == 1
    assert "error:" in r.output


def test_report_with_no_artifacts(tmp_path):
    r = RUNNER.invoke(main, ["report", "--out", str(tmp_path)])
    assert r.exit_code == 1
    assert "error:" in r.output

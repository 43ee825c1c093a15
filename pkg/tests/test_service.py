import time

import pytest
from fastapi.testclient import TestClient

from dflsim.codebook import save_codebook
from dflsim.dataset import write_dataset
from dflsim.service import create_app


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("service")
    app = create_app(data_dir, default_seed=0)
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def dataset_id(client):
    r = client.post(
        "/datasets",
        json={"source": "synthesize", "calibration": "pacific-baseline",
              "scale": 0.05, "seed": 3},
    )
    assert r.status_code == 201
    return r.json()["id"]


@pytest.fixture(scope="module")
def model_id(client, dataset_id):
    r = client.post("/models", json={"dataset_id": dataset_id, "seed": 3,
                                     "folds": 5, "families": ["Linear"]})
    assert r.status_code == 202
    mid = r.json()["id"]
    for _ in range(300):
        doc = client.get(f"/models/{mid}").json()
        if doc.get("status") != "training":
            break
        time.sleep(0.2)
    assert doc["status"] == "complete", doc
    return mid


def test_health(client):
    doc = client.get("/health").json()
    assert doc["status"] == "ok"


def test_synthesized_dataset_listed(client, dataset_id):
    listing = client.get("/datasets").json()["datasets"]
    assert any(d["id"] == dataset_id for d in listing)
    detail = client.get(f"/datasets/{dataset_id}").json()
    assert detail["records"] == sum(detail["country_counts"].values())
    assert len(detail["fingerprint"]) == 16


def test_dataset_profile(client, dataset_id):
    doc = client.get(f"/datasets/{dataset_id}/profile").json()["profile"]
    assert len(doc["country_stats"]) == 7
    assert len(doc["discriminance"]) == 7
    assert set(doc["gap_tables"]) == {"demographic", "socioeconomic", "behavioral"}
    assert -1.0 <= doc["dfc_dfl_correlation"] <= 1.0


def test_dataset_not_found(client):
    assert client.get("/datasets/nope").status_code == 404
    assert client.get("/datasets/nope/profile").status_code == 404


def test_unknown_calibration_preset(client):
    r = client.post("/datasets", json={"source": "synthesize", "calibration": "nope"})
    assert r.status_code == 400


def test_bad_source(client):
    assert client.post("/datasets", json={"source": "divine"}).status_code == 400


def test_infeasible_synthesis_targets(client):
    r = client.post(
        "/datasets",
        json={"source": "synthesize",
              "targets": [{"country": "Fiji", "count": 5, "dfc_mean": 140,
                           "dfc_std": 10, "dfl_mean": 40, "dfl_std": 10}]},
    )
    assert r.status_code == 422


def test_ingest_source(client, small_dataset, tmp_path_factory):
    d = tmp_path_factory.mktemp("ingest")
    save_codebook(small_dataset.codebook, d / "codebook.json")
    write_dataset(small_dataset, d / "data.csv")
    r = client.post(
        "/datasets",
        json={"source": "ingest", "codebook_path": str(d / "codebook.json"),
              "data_path": str(d / "data.csv")},
    )
    assert r.status_code == 201
    assert r.json()["fingerprint"] == small_dataset.fingerprint()


def test_ingest_missing_file(client, tmp_path_factory):
    d = tmp_path_factory.mktemp("missing")
    r = client.post(
        "/datasets",
        json={"source": "ingest", "codebook_path": str(d / "nope.json"),
              "data_path": str(d / "nope.csv")},
    )
    assert r.status_code == 404


def test_training_requires_dataset(client):
    assert client.post("/models", json={}).status_code == 400
    assert client.post("/models", json={"dataset_id": "nope"}).status_code == 404


def test_invalid_split_rejected(client, dataset_id):
    r = client.post("/models", json={"dataset_id": dataset_id, "test_fraction": 2.0})
    assert r.status_code == 422


def test_trained_model_document(client, model_id):
    doc = client.get(f"/models/{model_id}").json()
    assert doc["status"] == "complete"
    outcome = doc["outcome"]
    assert outcome["selection"]["chosen"] == "Linear"
    assert outcome["model"]["family"] == "Linear"
    weights = [l["relative_weight"] for l in outcome["levers"]]
    assert sum(weights) == pytest.approx(100.0, abs=1e-9)
    listing = client.get("/models").json()["models"]
    assert any(m["id"] == model_id and m["status"] == "complete" for m in listing)


def test_model_not_found(client):
    assert client.get("/models/nope").status_code == 404


def test_simulation_run(client, model_id):
    r = client.post("/simulations", json={"model_id": model_id,
                                          "scenario": "device_access"})
    assert r.status_code == 201
    doc = r.json()
    result = doc["result"]
    assert 0.0 <= result["reach"] <= 1.0
    assert result["population_gain_points"] <= result["reached_gain_points"]
    fields = {s["field"] for s in result["subgroups"]}
    assert fields == {"country", "gender", "area"}

    stored = client.get(f"/simulations/{doc['id']}")
    assert stored.status_code == 200
    # Stored documents are immutable: repeated reads are byte-identical.
    assert stored.content == client.get(f"/simulations/{doc['id']}").content

    listing = client.get("/simulations").json()["simulations"]
    assert any(s["id"] == doc["id"] for s in listing)


def test_simulation_with_inline_scenario(client, model_id):
    r = client.post(
        "/simulations",
        json={"model_id": model_id,
              "scenario": {"name": "custom", "assignments": {"budget_management": "yes"},
                           "filter": {"area": ["Rural"]}},
              "clip": False,
              "disaggregate_by": ["country"]},
    )
    assert r.status_code == 201
    assert r.json()["request"]["scenario"]["clip"] is False


def test_simulation_unknown_preset(client, model_id):
    r = client.post("/simulations", json={"model_id": model_id, "scenario": "nope"})
    assert r.status_code == 422


def test_simulation_requires_model(client):
    assert client.post("/simulations", json={}).status_code == 400
    r = client.post("/simulations", json={"model_id": "nope", "scenario": "device_access"})
    assert r.status_code == 404


def test_simulation_not_found(client):
    assert client.get("/simulations/nope").status_code == 404

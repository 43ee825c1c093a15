"""HTTP intelligence layer: datasets, profiles, models, and simulations with a
file-backed run store.

State lives as plain JSON documents under the data directory, one file per
resource; stored results are immutable once written and are served back from
the file bytes, so repeated reads are byte-identical.
"""

from __future__ import annotations

import csv as _csv
import io
import json
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response

from . import __version__
from .codebook import codebook_from_dict
from .dataset import (
    Dataset,
    SurveyRecord,
    ValidationError,
    load_dataset,
    make_dataset,
    summarize,
    write_dataset_stream,
)
from .models import trained_model_from_dict
from .pipeline import SplitSpec
from .profiling import (
    country_stats,
    dfc_dfl_correlation,
    discriminance_report,
    gap_table,
)
from .reportgen import (
    BEHAVIORAL_GAP_FIELDS,
    DEMOGRAPHIC_GAP_FIELDS,
    SOCIOECONOMIC_GAP_FIELDS,
)
from .scenario import (
    SCENARIO_PRESETS,
    ScenarioError,
    disaggregate,
    scenario_from_dict,
    simulate,
)
from .scoring import score_dataset
from .synthesis import CALIBRATION_PRESETS, CountryTargets, SynthesisSpec, synthesize_dataset
from .workflow import TrainingConfig, train


class RunStore:
    """Directory-tree persistence for datasets, models, and simulation runs."""

    def __init__(self, root: Path):
        self.root = Path(root)
        for sub in ("datasets", "models", "simulations"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, kind: str, rid: str) -> Path:
        return self.root / kind / f"{rid}.json"

    def write(self, kind: str, rid: str, doc: dict) -> None:
        path = self._path(kind, rid)
        with self._lock:
            if path.exists():
                raise FileExistsError(f"{kind}/{rid} already stored")
            path.write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")

    def read_bytes(self, kind: str, rid: str) -> bytes:
        path = self._path(kind, rid)
        if not path.exists():
            raise KeyError(rid)
        return path.read_bytes()

    def read(self, kind: str, rid: str) -> dict:
        return json.loads(self.read_bytes(kind, rid).decode("utf-8"))

    def list_ids(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _dataset_to_doc(dataset: Dataset, rid: str) -> dict:
    buf = io.StringIO()
    write_dataset_stream(dataset, buf)
    return {
        "id": rid,
        "kind": "dataset",
        "created_at": _now(),
        "provenance": dataset.provenance,
        "seed": dataset.seed,
        "fingerprint": dataset.fingerprint(),
        "codebook": dataset.codebook.to_dict(),
        "csv": buf.getvalue(),
    }


def _dataset_from_doc(doc: dict) -> Dataset:
    codebook = codebook_from_dict(doc["codebook"])
    reader = _csv.DictReader(io.StringIO(doc["csv"]))
    records = []
    for row in reader:
        responses = {}
        for name, raw in row.items():
            if name in ("record_id", "country"):
                continue
            if raw is None or raw == "":
                responses[name] = None
            elif codebook[name].kind == "Numeric":
                responses[name] = float(raw)
            else:
                responses[name] = raw
        records.append(
            SurveyRecord(record_id=row["record_id"], country=row["country"],
                         responses=responses)
        )
    return make_dataset(
        records, codebook, provenance=doc.get("provenance", "Ingested"), seed=doc.get("seed")
    )


def _profile_payload(dataset: Dataset) -> dict:
    scores = score_dataset(dataset)
    stats = country_stats(scores)
    gaps = {}
    for label, fields in (
        ("demographic", DEMOGRAPHIC_GAP_FIELDS),
        ("socioeconomic", SOCIOECONOMIC_GAP_FIELDS),
        ("behavioral", BEHAVIORAL_GAP_FIELDS),
    ):
        present = [f for f in fields if f in dataset.codebook]
        gaps[label] = [
            {
                "category": g.category,
                "lowest_group": g.lowest_group,
                "lowest_mean": g.lowest_mean,
                "highest_group": g.highest_group,
                "highest_mean": g.highest_mean,
                "gap": g.gap,
            }
            for g in gap_table(dataset, scores, present)
        ]
    return {
        "country_stats": [
            {
                "country": c.country,
                "count": c.count,
                "dfc": vars(c.dfc),
                "dfl": vars(c.dfl),
            }
            for c in stats
        ],
        "discriminance": [
            {
                "country": d.country,
                "cv_dfc": d.cv_dfc,
                "cv_dfl": d.cv_dfl,
                "dfc_more_discriminant": d.dfc_more_discriminant,
            }
            for d in discriminance_report(scores)
        ],
        "gap_tables": gaps,
        "dfc_dfl_correlation": dfc_dfl_correlation(stats) if len(stats) >= 3 else None,
    }


def create_app(data_dir: str | Path, default_seed: int = 0) -> FastAPI:
    store = RunStore(Path(data_dir))
    app = FastAPI(title="dflsim service", version=__version__)
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/datasets")
    def list_datasets():
        out = []
        for rid in store.list_ids("datasets"):
            doc = store.read("datasets", rid)
            out.append({
                "id": rid,
                "provenance": doc.get("provenance"),
                "seed": doc.get("seed"),
                "fingerprint": doc.get("fingerprint"),
                "records": max(0, doc["csv"].count("\n") - 1),
            })
        return {"datasets": out}

    @app.post("/datasets", status_code=201)
    def create_dataset(body: dict):
        source = body.get("source")
        try:
            if source == "synthesize":
                seed = int(body.get("seed", default_seed))
                if "targets" in body:
                    spec = SynthesisSpec(
                        targets=tuple(CountryTargets(**t) for t in body["targets"]),
                        missing_rate=float(body.get("missing_rate", 0.02)),
                    )
                else:
                    name = body.get("calibration", "pacific-baseline")
                    if name not in CALIBRATION_PRESETS:
                        raise HTTPException(400, f"unknown calibration preset {name!r}")
                    spec = CALIBRATION_PRESETS[name]
                scale = float(body.get("scale", 1.0))
                if scale != 1.0:
                    spec = spec.with_counts(scale)
                dataset = synthesize_dataset(spec, seed=seed)
            elif source == "ingest":
                dataset = load_dataset(body["codebook_path"], body["data_path"])
            else:
                raise HTTPException(400, "source must be 'synthesize' or 'ingest'")
        except (ValidationError, ValueError) as exc:
            raise HTTPException(422, str(exc))
        except FileNotFoundError as exc:
            raise HTTPException(404, f"file not found: {exc}")
        rid = f"ds-{uuid.uuid4().hex[:10]}"
        store.write("datasets", rid, _dataset_to_doc(dataset, rid))
        s = summarize(dataset)
        return {"id": rid, "records": s.total, "country_counts": s.country_counts,
                "fingerprint": dataset.fingerprint()}

    def _get_dataset(dataset_id: str) -> Dataset:
        try:
            return _dataset_from_doc(store.read("datasets", dataset_id))
        except KeyError:
            raise HTTPException(404, f"dataset {dataset_id!r} not found")

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        dataset = _get_dataset(dataset_id)
        s = summarize(dataset)
        return {
            "id": dataset_id,
            "provenance": dataset.provenance,
            "records": s.total,
            "country_counts": s.country_counts,
            "missingness": s.missingness,
            "fingerprint": dataset.fingerprint(),
        }

    @app.get("/datasets/{dataset_id}/profile")
    def profile_dataset(dataset_id: str):
        dataset = _get_dataset(dataset_id)
        return {"id": dataset_id, "profile": _profile_payload(dataset)}

    def _run_training(model_id: str, dataset_id: str, dataset, config):
        try:
            outcome = train(dataset, config)
            doc = {
                "id": model_id,
                "kind": "model",
                "created_at": _now(),
                "dataset_id": dataset_id,
                "status": "complete",
                "request": {
                    "seed": config.split.seed,
                    "test_fraction": config.split.test_fraction,
                    "folds": config.split.folds,
                    "families": list(config.families),
                },
                "outcome": outcome.to_dict(),
            }
            store.write("models", model_id, doc)
            with jobs_lock:
                jobs[model_id] = {"status": "complete"}
        except Exception as exc:  # surfaced via the status endpoint
            with jobs_lock:
                jobs[model_id] = {"status": "failed", "error": str(exc)}

    @app.post("/models", status_code=202)
    def train_model(body: dict):
        dataset_id = body.get("dataset_id")
        if not dataset_id:
            raise HTTPException(400, "dataset_id is required")
        dataset = _get_dataset(dataset_id)
        try:
            split = SplitSpec(
                test_fraction=float(body.get("test_fraction", 0.20)),
                folds=int(body.get("folds", 10)),
                seed=int(body.get("seed", default_seed)),
            )
            families = tuple(body.get("families", ["Linear", "RandomForest", "GradientBoosting"]))
            config = TrainingConfig(split=split, families=families)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        model_id = f"mdl-{uuid.uuid4().hex[:10]}"
        with jobs_lock:
            jobs[model_id] = {"status": "training"}
        thread = threading.Thread(
            target=_run_training, args=(model_id, dataset_id, dataset, config), daemon=True
        )
        thread.start()
        return {"id": model_id, "status": "training"}

    @app.get("/models")
    def list_models():
        stored = store.list_ids("models")
        with jobs_lock:
            pending = [
                {"id": mid, **info} for mid, info in jobs.items() if mid not in stored
            ]
        return {"models": [{"id": mid, "status": "complete"} for mid in stored] + pending}

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        try:
            return Response(content=store.read_bytes("models", model_id),
                            media_type="application/json")
        except KeyError:
            pass
        with jobs_lock:
            info = jobs.get(model_id)
        if info is None:
            raise HTTPException(404, f"model {model_id!r} not found")
        return {"id": model_id, **info}

    @app.post("/simulations", status_code=201)
    def run_simulation(body: dict):
        model_id = body.get("model_id")
        if not model_id:
            raise HTTPException(400, "model_id is required")
        try:
            model_doc = store.read("models", model_id)
        except KeyError:
            raise HTTPException(404, f"model {model_id!r} not found (or still training)")
        if model_doc["outcome"]["model"]["family"] != "Linear" and body.get("require_levers"):
            raise HTTPException(422, "lever extraction requires the transparent model")
        dataset = _get_dataset(model_doc["dataset_id"])
        model = trained_model_from_dict(model_doc["outcome"]["model"])

        raw = body.get("scenario")
        try:
            if isinstance(raw, str):
                if raw not in SCENARIO_PRESETS:
                    raise ScenarioError(f"unknown scenario preset {raw!r}")
                scenario = SCENARIO_PRESETS[raw]
            elif isinstance(raw, dict):
                scenario = scenario_from_dict(raw)
            else:
                raise ScenarioError("scenario must be a preset name or a scenario document")
            if "clip" in body:
                scenario = type(scenario)(
                    name=scenario.name, assignments=scenario.assignments,
                    filter=scenario.filter, clip=bool(body["clip"]),
                )
            result = simulate(dataset, model, scenario)
        except ScenarioError as exc:
            raise HTTPException(422, str(exc))
        by = body.get("disaggregate_by", ["country", "gender", "area"])
        subgroups = [r.to_dict() for r in disaggregate(result, dataset, by)]
        run_id = f"sim-{uuid.uuid4().hex[:10]}"
        doc = {
            "id": run_id,
            "kind": "simulation",
            "created_at": _now(),
            "model_id": model_id,
            "dataset_id": model_doc["dataset_id"],
            "model_fingerprint": model_doc["outcome"]["model_fingerprint"],
            "request": {"scenario": scenario.to_dict(), "disaggregate_by": by},
            "result": {**result.to_dict(), "subgroups": subgroups},
        }
        store.write("simulations", run_id, doc)
        return json.loads(json.dumps(doc, sort_keys=True))

    @app.get("/simulations")
    def list_simulations():
        out = []
        for rid in store.list_ids("simulations"):
            doc = store.read("simulations", rid)
            out.append({
                "id": rid,
                "model_id": doc["model_id"],
                "scenario": doc["request"]["scenario"]["name"],
                "created_at": doc["created_at"],
            })
        return {"simulations": out}

    @app.get("/simulations/{run_id}")
    def get_simulation(run_id: str):
        try:
            return Response(content=store.read_bytes("simulations", run_id),
                            media_type="application/json")
        except KeyError:
            raise HTTPException(404, f"simulation {run_id!r} not found")

    return app


def serve(bind: str = "127.0.0.1:8765", data_dir: str | Path = "service-data",
          default_seed: int = 0) -> None:
    import uvicorn

    host, _, port = bind.partition(":")
    app = create_app(data_dir, default_seed=default_seed)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8765), log_level="info")

"""Static scenario simulation: counterfactual re-prediction, reach, equity cuts."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .codebook import Codebook, INDEX_POINTS
from .dataset import Dataset, SurveyRecord
from .levers import classify_features
from .models import TrainedModel
from .pipeline import apply_preprocess
from .scoring import points_to_pct


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """A named set of lever assignments with an optional target-segment filter."""

    name: str
    assignments: dict  # lever field -> target category
    filter: dict | None = None  # segmentation field -> list of admitted values
    clip: bool = True

    def validate(self, codebook: Codebook) -> None:
        if not self.assignments:
            raise ScenarioError(f"scenario {self.name!r} assigns no levers")
        levers, segmentation = classify_features(codebook)
        for lever, target in self.assignments.items():
            if lever not in codebook:
                raise ScenarioError(f"unknown lever {lever!r}")
            if lever not in levers:
                raise ScenarioError(f"field {lever!r} is not modifiable; cannot be a lever")
            if str(target) not in codebook[lever].categories:
                raise ScenarioError(
                    f"target value {target!r} not admissible for lever {lever!r}"
                )
        for name, allowed in (self.filter or {}).items():
            if name not in segmentation:
                raise ScenarioError(f"filter field {name!r} is not a segmentation variable")
            f = codebook[name]
            if f.kind != "Numeric":
                for v in allowed:
                    if str(v) not in f.categories:
                        raise ScenarioError(
                            f"filter value {v!r} not admissible for field {name!r}"
                        )

    def matches(self, record: SurveyRecord) -> bool:
        for name, allowed in (self.filter or {}).items():
            v = record.get(name)
            if v is None or str(v) not in {str(a) for a in allowed}:
                return False
        return True

    def lacking(self, record: SurveyRecord) -> bool:
        """True when the record misses at least one assigned lever value."""
        return any(
            record.get(lever) is None or str(record.get(lever)) != str(target)
            for lever, target in self.assignments.items()
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "assignments": dict(self.assignments),
            "filter": None if self.filter is None else {k: list(v) for k, v in self.filter.items()},
            "clip": self.clip,
        }


def scenario_from_dict(doc: dict) -> Scenario:
    return Scenario(
        name=doc["name"],
        assignments=dict(doc["assignments"]),
        filter=doc.get("filter"),
        clip=bool(doc.get("clip", True)),
    )


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# Bundled intervention catalogue mirroring the study's scenario set.
SCENARIO_PRESETS: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario("device_access", {"device_ownership": "yes"}),
        Scenario("digital_content_creation", {"digital_content_creation": "yes"}),
        Scenario("computational_skills", {"computational_skills": "yes"}),
        Scenario("financial_optimism", {"financial_optimism": "yes"}),
        Scenario("budget_management", {"budget_management": "yes"}),
        Scenario("expense_recording", {"expense_recording": "yes"}),
        Scenario("digital_autonomy", {"digital_autonomy": "yes"}),
        Scenario("cybersecurity_resilience", {"cybersecurity_resilience": "yes"}),
        Scenario("digital_spending_tracking", {"digital_spending_tracking": "yes"}),
        Scenario(
            "digital_capability_bundle",
            {
                "device_ownership": "yes",
                "digital_content_creation": "yes",
                "computational_skills": "yes",
            },
        ),
        Scenario(
            "financial_capability_bundle",
            {"budget_management": "yes", "expense_recording": "yes"},
        ),
        Scenario(
            "digital_financial_safety_bundle",
            {"digital_autonomy": "yes", "cybersecurity_resilience": "yes"},
        ),
        Scenario(
            "comprehensive_bundle",
            {
                "device_ownership": "yes",
                "digital_content_creation": "yes",
                "computational_skills": "yes",
                "financial_optimism": "yes",
                "budget_management": "yes",
                "expense_recording": "yes",
                "digital_autonomy": "yes",
                "cybersecurity_resilience": "yes",
                "digital_spending_tracking": "yes",
            },
        ),
    )
}


@dataclass(frozen=True)
class SimulationResult:
    scenario: Scenario
    record_ids: tuple
    delta_points: np.ndarray
    baseline_points: np.ndarray
    counterfactual_points: np.ndarray
    reached: np.ndarray  # boolean per record
    model_fingerprint: str = ""
    dataset_fingerprint: str = ""

    @property
    def reach(self) -> float:
        return float(self.reached.mean()) if self.reached.size else 0.0

    @property
    def population_gain_points(self) -> float:
        return float(self.delta_points.mean()) if self.delta_points.size else 0.0

    @property
    def population_gain_pct(self) -> float:
        return points_to_pct(self.population_gain_points)

    @property
    def reached_gain_points(self) -> float:
        if not self.reached.any():
            return 0.0
        return float(self.delta_points[self.reached].mean())

    @property
    def reached_gain_pct(self) -> float:
        return points_to_pct(self.reached_gain_points)

    @property
    def delta_pct(self) -> np.ndarray:
        return self.delta_points / INDEX_POINTS * 100.0

    def to_dict(self, include_records: bool = False) -> dict:
        doc = {
            "scenario": self.scenario.to_dict(),
            "reach": self.reach,
            "population_gain_points": self.population_gain_points,
            "population_gain_pct": self.population_gain_pct,
            "reached_gain_points": self.reached_gain_points,
            "reached_gain_pct": self.reached_gain_pct,
            "population": len(self.record_ids),
            "reached_count": int(self.reached.sum()),
            "model_fingerprint": self.model_fingerprint,
            "dataset_fingerprint": self.dataset_fingerprint,
        }
        if include_records:
            doc["records"] = {
                "record_id": list(self.record_ids),
                "delta_points": self.delta_points.tolist(),
                "reached": self.reached.astype(bool).tolist(),
            }
        return doc


def _counterfactual_record(record: SurveyRecord, scenario: Scenario) -> SurveyRecord:
    responses = dict(record.responses)
    for lever, target in scenario.assignments.items():
        responses[lever] = str(target)
    return replace(record, responses=responses)


def simulate(dataset: Dataset, model: TrainedModel, scenario: Scenario) -> SimulationResult:
    """Re-predict the population under the scenario's lever assignments.

    Baseline and counterfactual predictions run through the same preprocessing
    and model path; the delta is their difference, clipped to the index bounds
    when the scenario requests clipping.
    """
    scenario.validate(dataset.codebook)
    records = dataset.records
    in_filter = np.array([scenario.matches(r) for r in records], dtype=bool)
    lacking = np.array([scenario.lacking(r) for r in records], dtype=bool)
    reached = in_filter & lacking
    if (scenario.filter is not None) and not in_filter.any():
        warnings.warn(f"scenario {scenario.name!r}: filter matches no records")

    cf_records = [
        _counterfactual_record(r, scenario) if reached[i] else r
        for i, r in enumerate(records)
    ]
    X_base = apply_preprocess(model.plan, records)
    X_cf = apply_preprocess(model.plan, cf_records)
    pred_base = model.predict(X_base)
    pred_cf = model.predict(X_cf)
    delta = pred_cf - pred_base
    if scenario.clip:
        clipped = np.clip(pred_cf, 0.0, INDEX_POINTS) - np.clip(pred_base, 0.0, INDEX_POINTS)
        delta = np.minimum(delta, clipped)
    return SimulationResult(
        scenario=scenario,
        record_ids=tuple(r.record_id for r in records),
        delta_points=delta,
        baseline_points=pred_base,
        counterfactual_points=pred_cf,
        reached=reached,
        dataset_fingerprint=dataset.fingerprint(),
    )


def simulate_bundle(dataset: Dataset, model: TrainedModel, bundle: Scenario) -> SimulationResult:
    if len(bundle.assignments) < 2:
        raise ScenarioError("a bundle assigns at least two levers")
    return simulate(dataset, model, bundle)


@dataclass(frozen=True)
class SubgroupRow:
    field: str
    group: str
    count: int
    reach: float
    mean_gain_points: float
    mean_gain_pct: float

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "group": self.group,
            "count": self.count,
            "reach": self.reach,
            "mean_gain_points": self.mean_gain_points,
            "mean_gain_pct": self.mean_gain_pct,
        }


def disaggregate(
    result: SimulationResult, dataset: Dataset, by: list[str]
) -> list[SubgroupRow]:
    """Gain and reach per subgroup of each requested segmentation field."""
    levers, segmentation = classify_features(dataset.codebook)
    rows = []
    for name in by:
        if name not in segmentation:
            raise ScenarioError(f"disaggregation field {name!r} is not a segmentation variable")
        groups: dict[str, list[int]] = {}
        for i, r in enumerate(dataset.records):
            v = r.get(name)
            groups.setdefault("(missing)" if v is None else str(v), []).append(i)
        for group in sorted(groups):
            idx = np.array(groups[group])
            rows.append(
                SubgroupRow(
                    field=name,
                    group=group,
                    count=idx.size,
                    reach=float(result.reached[idx].mean()),
                    mean_gain_points=float(result.delta_points[idx].mean()),
                    mean_gain_pct=points_to_pct(float(result.delta_points[idx].mean())),
                )
            )
    return rows


@dataclass(frozen=True)
class ResponderConfig:
    non_responder_threshold: float = 0.0  # points
    deep_decile: float = 0.10
    high_baseline_quantile: float = 0.75


PROFILE_FIELDS = (
    "country", "gender", "age_group", "area", "occupation", "education", "income_band",
)


@dataclass(frozen=True)
class ResponderPartition:
    non_responders: dict       # scenario name -> tuple of record ids
    ceiling_non_responders: dict  # scenario name -> tuple of record ids
    broad_responders: tuple
    deep_impact: tuple
    mean_delta_points: dict    # record id -> mean delta over the scenario set
    profiles: dict             # partition name -> profile summary

    def to_dict(self) -> dict:
        return {
            "non_responders": {k: list(v) for k, v in self.non_responders.items()},
            "ceiling_non_responders": {
                k: list(v) for k, v in self.ceiling_non_responders.items()
            },
            "broad_responders": list(self.broad_responders),
            "deep_impact": list(self.deep_impact),
            "profiles": self.profiles,
        }


def _profile(ids, dataset: Dataset, mean_delta: dict, total: int) -> dict:
    by_id = {r.record_id: r for r in dataset.records}
    modal = {}
    for name in PROFILE_FIELDS:
        counts: dict[str, int] = {}
        for rid in ids:
            v = by_id[rid].get(name)
            if v is None:
                continue
            counts[str(v)] = counts.get(str(v), 0) + 1
        modal[name] = min((c for c, k in counts.items() if k == max(counts.values())),
                          default=None) if counts else None
    gains = [mean_delta[rid] for rid in ids]
    return {
        "count": len(ids),
        "share_of_population": len(ids) / total if total else 0.0,
        "mean_gain_points": float(np.mean(gains)) if gains else 0.0,
        "mean_gain_pct": points_to_pct(float(np.mean(gains))) if gains else 0.0,
        "modal": modal,
    }


def partition_responders(
    results: list[SimulationResult],
    dataset: Dataset,
    baseline_dfl_points: dict,
    config: ResponderConfig = ResponderConfig(),
) -> ResponderPartition:
    """Split the population into non-responders, broad responders, deep impact.

    Non-responders are per scenario (delta <= threshold), flagged as ceiling
    cases when their baseline index is at or above the high-baseline quantile.
    Broad responders gain in every scenario; the deep-impact set is the top
    decile of broad responders by mean delta across the scenario set.
    """
    if not results:
        raise ScenarioError("partition_responders needs at least one scenario result")
    ids = results[0].record_ids
    for r in results[1:]:
        if r.record_ids != ids:
            raise ScenarioError("all results must cover the same population")
    tau = config.non_responder_threshold
    n = len(ids)
    baseline = np.array([baseline_dfl_points[rid] for rid in ids])
    high_cut = float(np.quantile(baseline, config.high_baseline_quantile))

    deltas = np.stack([r.delta_points for r in results])
    mean_delta = deltas.mean(axis=0)
    mean_map = {rid: float(mean_delta[i]) for i, rid in enumerate(ids)}

    non_responders = {}
    ceiling = {}
    for r in results:
        mask = r.delta_points <= tau
        non_responders[r.scenario.name] = tuple(np.array(ids)[mask])
        ceiling[r.scenario.name] = tuple(np.array(ids)[mask & (baseline >= high_cut)])

    broad_mask = (deltas > tau).all(axis=0)
    broad = [ids[i] for i in np.flatnonzero(broad_mask)]
    k = max(1, round(config.deep_decile * len(broad))) if broad else 0
    broad_sorted = sorted(broad, key=lambda rid: (-mean_map[rid], rid))
    deep = tuple(broad_sorted[:k])

    profiles = {
        "broad_responders": _profile(broad, dataset, mean_map, n),
        "deep_impact": _profile(list(deep), dataset, mean_map, n),
        "non_responders": {
            name: _profile(list(rids), dataset, mean_map, n)
            for name, rids in non_responders.items()
        },
    }
    return ResponderPartition(
        non_responders=non_responders,
        ceiling_non_responders=ceiling,
        broad_responders=tuple(broad),
        deep_impact=deep,
        mean_delta_points=mean_map,
        profiles=profiles,
    )

import json

import numpy as np
import pytest

from dflsim.codebook import (
    DIGITAL_FINANCIAL_ITEMS,
    DIGITAL_ITEMS,
    FINANCIAL_ITEMS,
    default_codebook,
)
from dflsim.dataset import SurveyRecord, make_dataset
from dflsim.models import LinearModel, TrainedModel
from dflsim.pipeline import apply_preprocess, fit_preprocess
from dflsim.scenario import (
    ResponderConfig,
    SCENARIO_PRESETS,
    Scenario,
    ScenarioError,
    disaggregate,
    load_scenario,
    partition_responders,
    scenario_from_dict,
    simulate,
    simulate_bundle,
)

CODEBOOK = default_codebook()
ALL_ITEMS = DIGITAL_ITEMS + FINANCIAL_ITEMS + DIGITAL_FINANCIAL_ITEMS


def test_presets_valid_against_default_instrument():
    for scenario in SCENARIO_PRESETS.values():
        scenario.validate(CODEBOOK)
    assert len(SCENARIO_PRESETS["comprehensive_bundle"].assignments) == 9


def test_validate_rejects_unknown_lever():
    with pytest.raises(ScenarioError, match="unknown lever"):
        Scenario("s", {"teleportation": "yes"}).validate(CODEBOOK)


def test_validate_rejects_non_modifiable_field():
    with pytest.raises(ScenarioError, match="not modifiable"):
        Scenario("s", {"education": "Tertiary"}).validate(CODEBOOK)


def test_validate_rejects_bad_target_value():
    with pytest.raises(ScenarioError, match="not admissible"):
        Scenario("s", {"device_ownership": "definitely"}).validate(CODEBOOK)


def test_validate_rejects_empty_assignment():
    with pytest.raises(ScenarioError, match="no levers"):
        Scenario("s", {}).validate(CODEBOOK)


def test_validate_rejects_lever_as_filter():
    s = Scenario("s", {"device_ownership": "yes"},
                 filter={"budget_management": ["yes"]})
    with pytest.raises(ScenarioError, match="segmentation"):
        s.validate(CODEBOOK)


def test_matches_and_lacking():
    s = Scenario("s", {"device_ownership": "yes"}, filter={"area": ["Rural"]})
    rural_without = SurveyRecord("a", "Fiji", {"area": "Rural", "device_ownership": "no"})
    rural_with = SurveyRecord("b", "Fiji", {"area": "Rural", "device_ownership": "yes"})
    urban = SurveyRecord("c", "Fiji", {"area": "Urban", "device_ownership": "no"})
    missing = SurveyRecord("d", "Fiji", {"area": "Rural", "device_ownership": None})
    assert s.matches(rural_without) and s.lacking(rural_without)
    assert s.matches(rural_with) and not s.lacking(rural_with)
    assert not s.matches(urban)
    assert s.lacking(missing)  # an unanswered lever counts as not owned


def test_scenario_json_round_trip(tmp_path):
    s = Scenario("s", {"device_ownership": "yes"}, filter={"area": ["Rural"]}, clip=False)
    assert scenario_from_dict(s.to_dict()) == s
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(s.to_dict()))
    assert load_scenario(path) == s


def _records_with(owned_items, n, prefix, country="Fiji", area="Rural"):
    out = []
    for i in range(n):
        responses = {name: ("yes" if name in owned_items else "no") for name in ALL_ITEMS}
        responses["area"] = area
        responses["gender"] = "Female" if i % 2 == 0 else "Male"
        out.append(SurveyRecord(f"{prefix}{i}", country, responses))
    return out


def _manual_model(records, lever_weights, intercept=0.0):
    """A linear predictor with hand-set weights on chosen lever=yes columns."""
    # Two reference respondents make both item categories observable so the
    # encoding always carries a "yes" column for every lever.
    ref = [
        SurveyRecord("_ref_yes", "Fiji", {n: "yes" for n in ALL_ITEMS}),
        SurveyRecord("_ref_no", "Fiji", {n: "no" for n in ALL_ITEMS}),
    ]
    plan = fit_preprocess(list(records) + ref, CODEBOOK)
    cols = {c: j for j, c in enumerate(plan.columns)}
    coefs = np.zeros(len(plan.columns))
    for lever, w in lever_weights.items():
        coefs[cols[f"{lever}=yes"]] = w
    return TrainedModel(
        family="Linear",
        model=LinearModel(intercept=intercept, coefficients=coefs),
        plan=plan,
    )


def test_simulate_delta_matches_coefficient_oracle():
    records = _records_with({"device_ownership"}, 20, "a") + _records_with(set(), 20, "b")
    ds = make_dataset(records, CODEBOOK)
    model = _manual_model(records, {"device_ownership": 2.5}, intercept=10.0)
    result = simulate(ds, model, Scenario("s", {"device_ownership": "yes"}, clip=False))
    # Granting the lever flips exactly one indicator: delta = its coefficient.
    expected = np.array([0.0] * 20 + [2.5] * 20)
    assert np.allclose(result.delta_points, expected, atol=1e-12)
    assert result.reach == pytest.approx(0.5)
    assert result.population_gain_points == pytest.approx(1.25)
    assert result.reached_gain_points == pytest.approx(2.5)


def test_reach_matches_brute_force(small_dataset, full_linear):
    scenario = SCENARIO_PRESETS["digital_capability_bundle"]
    result = simulate(small_dataset, full_linear, scenario)
    expected = sum(
        1 for r in small_dataset.records if scenario.matches(r) and scenario.lacking(r)
    )
    assert int(result.reached.sum()) == expected


def test_fully_equipped_population_zero_reach():
    records = _records_with(set(ALL_ITEMS), 25, "full")
    ds = make_dataset(records, CODEBOOK)
    model = _manual_model(records, {"device_ownership": 2.0})
    result = simulate(ds, model, SCENARIO_PRESETS["device_access"])
    assert result.reach == 0.0
    assert result.population_gain_points == 0.0


def test_clipping_caps_delta_at_index_ceiling():
    records = _records_with(set(), 10, "r")
    ds = make_dataset(records, CODEBOOK)
    # Baseline prediction 50 points; the lever is worth 5 more, but the index
    # tops out at 52, so the clipped gain is 2.
    model = _manual_model(records, {"device_ownership": 5.0}, intercept=50.0)
    clipped = simulate(ds, model, Scenario("s", {"device_ownership": "yes"}, clip=True))
    raw = simulate(ds, model, Scenario("s", {"device_ownership": "yes"}, clip=False))
    assert np.allclose(clipped.delta_points, 2.0)
    assert np.allclose(raw.delta_points, 5.0)


def test_filter_restricts_reach():
    records = _records_with(set(), 10, "r", area="Rural") + _records_with(
        set(), 10, "u", area="Urban"
    )
    ds = make_dataset(records, CODEBOOK)
    model = _manual_model(records, {"device_ownership": 2.0})
    s = Scenario("rural_only", {"device_ownership": "yes"}, filter={"area": ["Rural"]})
    result = simulate(ds, model, s)
    assert int(result.reached.sum()) == 10
    assert result.reach == pytest.approx(0.5)


def test_empty_filter_warns():
    records = _records_with(set(), 10, "r", area="Rural")
    ds = make_dataset(records, CODEBOOK)
    model = _manual_model(records, {"device_ownership": 2.0})
    s = Scenario("none", {"device_ownership": "yes"}, filter={"area": ["Urban"]})
    with pytest.warns(UserWarning, match="matches no records"):
        result = simulate(ds, model, s)
    assert result.reach == 0.0


def test_bundle_requires_two_levers(small_dataset, full_linear):
    with pytest.raises(ScenarioError, match="at least two"):
        simulate_bundle(small_dataset, full_linear, SCENARIO_PRESETS["device_access"])


def test_bundle_additivity_unclipped():
    records = _records_with(set(), 30, "r")
    ds = make_dataset(records, CODEBOOK)
    model = _manual_model(
        records, {"budget_management": 1.5, "expense_recording": 2.5}, intercept=5.0
    )
    parts = [
        simulate(ds, model, Scenario("a", {"budget_management": "yes"}, clip=False)),
        simulate(ds, model, Scenario("b", {"expense_recording": "yes"}, clip=False)),
    ]
    bundle = simulate_bundle(
        ds, model,
        Scenario("ab", {"budget_management": "yes", "expense_recording": "yes"}, clip=False),
    )
    assert np.allclose(
        bundle.delta_points, parts[0].delta_points + parts[1].delta_points, atol=1e-12
    )


def test_disaggregate_partitions_population(small_dataset, full_linear):
    result = simulate(small_dataset, full_linear, SCENARIO_PRESETS["device_access"])
    rows = disaggregate(result, small_dataset, ["country", "gender"])
    by_field = {}
    for r in rows:
        by_field.setdefault(r.field, 0)
        by_field[r.field] += r.count
    assert by_field["country"] == len(small_dataset)
    assert by_field["gender"] == len(small_dataset)  # includes the missing bucket


def test_disaggregate_rejects_lever_fields(small_dataset, full_linear):
    result = simulate(small_dataset, full_linear, SCENARIO_PRESETS["device_access"])
    with pytest.raises(ScenarioError, match="segmentation"):
        disaggregate(result, small_dataset, ["device_ownership"])


def _responder_population():
    """50 own everything, 45 lack only the shared lever, 5 lack everything."""
    rich = _records_with(set(ALL_ITEMS), 50, "rich")
    shared_missing = _records_with(set(ALL_ITEMS) - {"device_ownership"}, 45, "mid")
    poor = _records_with(set(), 5, "poor")
    records = rich + shared_missing + poor
    ds = make_dataset(records, CODEBOOK)
    model = _manual_model(
        records,
        {"device_ownership": 1.0, "budget_management": 3.0, "mobile_money_use": 3.0},
    )
    scenarios = [
        Scenario("s1", {"device_ownership": "yes", "budget_management": "yes"}),
        Scenario("s2", {"device_ownership": "yes", "mobile_money_use": "yes"}),
    ]
    results = [simulate(ds, model, s) for s in scenarios]
    baseline = {r.record_id: float(i) for i, r in enumerate(records)}
    return ds, results, baseline


def test_partition_planted_subpopulation():
    ds, results, baseline = _responder_population()
    part = partition_responders(results, ds, baseline, ResponderConfig())
    broad = set(part.broad_responders)
    assert broad == {f"mid{i}" for i in range(45)} | {f"poor{i}" for i in range(5)}
    # Deep impact: top decile of 50 broad responders by mean delta = the 5
    # records that lack every lever in the catalogue.
    assert set(part.deep_impact) == {f"poor{i}" for i in range(5)}


def test_partition_owners_are_exact_zero_non_responders():
    ds, results, baseline = _responder_population()
    part = partition_responders(results, ds, baseline, ResponderConfig())
    for r in results:
        ids = set(part.non_responders[r.scenario.name])
        assert {f"rich{i}" for i in range(50)} <= ids
        owners = [i for i, rid in enumerate(r.record_ids) if rid.startswith("rich")]
        assert all(r.delta_points[i] == 0.0 for i in owners)


def test_partition_profiles_shape():
    ds, results, baseline = _responder_population()
    part = partition_responders(results, ds, baseline, ResponderConfig())
    profile = part.profiles["deep_impact"]
    assert profile["count"] == 5
    assert profile["share_of_population"] == pytest.approx(5 / 100)
    assert profile["modal"]["country"] == "Fiji"


def test_partition_requires_consistent_population(small_dataset, full_linear):
    r1 = simulate(small_dataset, full_linear, SCENARIO_PRESETS["device_access"])
    shrunk = make_dataset(small_dataset.records[:50], CODEBOOK)
    r2 = simulate(shrunk, full_linear, SCENARIO_PRESETS["budget_management"])
    baseline = {r.record_id: 0.0 for r in small_dataset.records}
    with pytest.raises(ScenarioError, match="same population"):
        partition_responders([r1, r2], small_dataset, baseline, ResponderConfig())

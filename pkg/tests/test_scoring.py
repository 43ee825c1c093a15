import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dflsim.codebook import (
    DIGITAL_FINANCIAL_ITEMS,
    DIGITAL_ITEMS,
    FINANCIAL_ITEMS,
    INDEX_POINTS,
    default_codebook,
)
from dflsim.dataset import SurveyRecord
from dflsim.scoring import pct_to_points, points_to_pct, score_dataset, score_record

CODEBOOK = default_codebook()
ALL_ITEMS = DIGITAL_ITEMS + FINANCIAL_ITEMS + DIGITAL_FINANCIAL_ITEMS

item_responses = st.fixed_dictionaries(
    {name: st.sampled_from(["yes", "no", None]) for name in ALL_ITEMS}
)


def _record(responses, rid="r1"):
    return SurveyRecord(record_id=rid, country="Fiji", responses=dict(responses))


@given(item_responses)
@settings(max_examples=200)
def test_composite_index_is_additive(responses):
    s = score_record(_record(responses), CODEBOOK)
    assert s.dfl_points == s.dc_points + s.fc_points + s.dfc_points


@given(item_responses)
@settings(max_examples=200)
def test_index_equals_two_points_per_owned_item(responses):
    s = score_record(_record(responses), CODEBOOK)
    owned = sum(1 for v in responses.values() if v == "yes")
    assert s.dfl_points == 2.0 * owned


@given(item_responses, st.sampled_from(ALL_ITEMS))
@settings(max_examples=200)
def test_granting_an_item_never_lowers_the_score(responses, item):
    base = score_record(_record(responses), CODEBOOK)
    upgraded = dict(responses, **{item: "yes"})
    after = score_record(_record(upgraded), CODEBOOK)
    assert after.dfl_points >= base.dfl_points


@given(st.floats(min_value=0.0, max_value=float(INDEX_POINTS)))
def test_points_pct_round_trip(points):
    assert pct_to_points(points_to_pct(points)) == pytest.approx(points, abs=1e-9)


def test_missing_scored_items_contribute_zero():
    s = score_record(_record({name: None for name in ALL_ITEMS}), CODEBOOK)
    assert s.dfl_points == 0.0
    assert s.dfl_pct == 0.0


def test_full_marks():
    s = score_record(_record({name: "yes" for name in ALL_ITEMS}), CODEBOOK)
    assert s.dfl_points == INDEX_POINTS
    assert s.dfl_pct == 100.0
    assert s.dc_pct == s.fc_pct == s.dfc_pct == 100.0


def test_domain_percentages_use_domain_maxima():
    responses = {name: "no" for name in ALL_ITEMS}
    responses["device_ownership"] = "yes"       # Digital, 2 of 18 points
    responses["expense_recording"] = "yes"      # Financial, 2 of 16 points
    s = score_record(_record(responses), CODEBOOK)
    assert s.dc_pct == pytest.approx(2 / 18 * 100)
    assert s.fc_pct == pytest.approx(2 / 16 * 100)
    assert s.dfc_pct == 0.0


def test_score_dataset_covers_every_record(small_dataset):
    scores = score_dataset(small_dataset)
    assert len(scores) == len(small_dataset)
    assert {s.record_id for s in scores} == {r.record_id for r in small_dataset.records}
    arr = np.array([s.dfl_points for s in scores])
    assert arr.min() >= 0.0 and arr.max() <= INDEX_POINTS

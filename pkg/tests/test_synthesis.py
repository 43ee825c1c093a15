import numpy as np
import pytest

from dflsim.dataset import summarize
from dflsim.profiling import country_stats
from dflsim.scoring import score_dataset
from dflsim.synthesis import (
    CALIBRATION_PRESETS,
    CountryTargets,
    PACIFIC_BASELINE,
    SynthesisError,
    SynthesisSpec,
    synthesize_dataset,
)


def test_determinism_same_seed(small_dataset):
    again = synthesize_dataset(PACIFIC_BASELINE.with_counts(0.05), seed=3)
    assert again.fingerprint() == small_dataset.fingerprint()


def test_different_seed_changes_output(small_dataset):
    other = synthesize_dataset(PACIFIC_BASELINE.with_counts(0.05), seed=4)
    assert other.fingerprint() != small_dataset.fingerprint()


def test_preset_counts():
    counts = {t.country: t.count for t in PACIFIC_BASELINE.targets}
    assert counts == {
        "Fiji": 1678,
        "PNG": 1587,
        "Samoa": 1216,
        "Solomon Islands": 1540,
        "Timor-Leste": 1631,
        "Tonga": 1227,
        "Vanuatu": 1229,
    }
    assert sum(counts.values()) == 10108
    assert "pacific-baseline" in CALIBRATION_PRESETS


def test_with_counts_scaling():
    scaled = PACIFIC_BASELINE.with_counts(0.1)
    assert [t.count for t in scaled.targets] == [
        round(t.count * 0.1) for t in PACIFIC_BASELINE.targets
    ]
    tiny = PACIFIC_BASELINE.with_counts(1e-9)
    assert all(t.count == 1 for t in tiny.targets)  # never drops to zero


def test_calibration_hits_published_moments():
    ds = synthesize_dataset(PACIFIC_BASELINE.with_counts(0.25), seed=5)
    stats = {c.country: c for c in country_stats(score_dataset(ds))}
    for t in PACIFIC_BASELINE.targets:
        s = stats[t.country]
        assert s.dfc.mean == pytest.approx(t.dfc_mean, abs=1.0), t.country
        assert s.dfl.mean == pytest.approx(t.dfl_mean, abs=1.0), t.country
        assert s.dfc.std == pytest.approx(t.dfc_std, abs=2.0), t.country
        assert s.dfl.std == pytest.approx(t.dfl_std, abs=2.0), t.country


def test_missing_rate_approximated(small_dataset):
    s = summarize(small_dataset)
    overall = float(np.mean(list(s.missingness.values())))
    assert 0.005 < overall < 0.04  # 2% nominal


def test_record_ids_unique(small_dataset):
    ids = [r.record_id for r in small_dataset.records]
    assert len(set(ids)) == len(ids)


def test_validation_passed_by_construction(small_dataset):
    # make_dataset inside the generator validates; spot-check the vocabulary.
    cb = small_dataset.codebook
    for r in small_dataset.records[:50]:
        for name, v in r.responses.items():
            if v is None or cb[name].kind == "Numeric":
                continue
            assert str(v) in cb[name].categories


@pytest.mark.parametrize(
    "targets",
    [
        (CountryTargets("Fiji", 0, 40, 10, 40, 10),),
        (CountryTargets("Fiji", 10, 140, 10, 40, 10),),
        (CountryTargets("Fiji", 10, 40, -1, 40, 10),),
    ],
)
def test_infeasible_targets_rejected(targets):
    with pytest.raises(SynthesisError):
        synthesize_dataset(SynthesisSpec(targets=tuple(targets)), seed=0)


def test_bad_missing_rate_rejected():
    spec = SynthesisSpec(targets=PACIFIC_BASELINE.targets, missing_rate=1.0)
    with pytest.raises(SynthesisError, match="missing_rate"):
        synthesize_dataset(spec, seed=0)

"""Calibrated synthetic survey generator.

The original Pacific microdata is not redistributable, so the pipeline ships a
deterministic generator calibrated to published per-country moments of the
competency scores.  Per record, correlated latent ability draws set the target
digital-financial and composite literacy levels; item responses are then dealt
to match those levels, and segmentation attributes are sampled from per-country
distributions tilted by the same latent ability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .codebook import (
    Codebook,
    DIGITAL_ITEMS,
    DIGITAL_FINANCIAL_ITEMS,
    FINANCIAL_ITEMS,
    default_codebook,
)
from .dataset import Dataset, SurveyRecord, make_dataset


class SynthesisError(ValueError):
    """Raised for infeasible calibration targets."""


@dataclass(frozen=True)
class CountryTargets:
    country: str
    count: int
    dfc_mean: float  # percent of the digital-financial domain
    dfc_std: float
    dfl_mean: float  # percent of the 52-point index
    dfl_std: float


@dataclass(frozen=True)
class SynthesisSpec:
    targets: tuple[CountryTargets, ...]
    missing_rate: float = 0.02
    ability_correlation: float = 0.85  # latent corr between DFC and DFL levels

    def with_counts(self, scale: float) -> "SynthesisSpec":
        scaled = tuple(
            replace(t, count=max(1, round(t.count * scale))) for t in self.targets
        )
        return replace(self, targets=scaled)


# Published per-country calibration: participant counts and competency moments.
# The Vanuatu DFC mean and DFL std are not published; the values below are
# documented stand-ins consistent with the published regional range.
PACIFIC_BASELINE = SynthesisSpec(
    targets=(
        CountryTargets("Fiji", 1678, 43.7, 16.4, 50.7, 14.8),
        CountryTargets("PNG", 1587, 32.6, 15.0, 41.1, 14.3),
        CountryTargets("Samoa", 1216, 38.7, 15.7, 43.3, 12.4),
        CountryTargets("Solomon Islands", 1540, 36.3, 11.9, 41.9, 12.2),
        CountryTargets("Timor-Leste", 1631, 37.9, 13.0, 39.6, 12.7),
        CountryTargets("Tonga", 1227, 46.2, 15.2, 44.3, 12.5),
        CountryTargets("Vanuatu", 1229, 39.5, 17.6, 44.2, 14.0),
    ),
)

CALIBRATION_PRESETS = {"pacific-baseline": PACIFIC_BASELINE}

# Country -> dominant interview language (remainder falls back to English).
_COUNTRY_LANGUAGE = {
    "Fiji": "Fijian",
    "PNG": "Tok Pisin",
    "Samoa": "Samoan",
    "Solomon Islands": "Solomon Pijin",
    "Timor-Leste": "Tetum",
    "Tonga": "Tongan",
    "Vanuatu": "Bislama",
}

_OCCUPATION_P = np.array([0.22, 0.12, 0.18, 0.05, 0.16, 0.08, 0.09, 0.10])
_HOUSEHOLD_P = np.array([0.08, 0.30, 0.52, 0.10])
_EDUCATION_P = np.array([0.08, 0.18, 0.24, 0.28, 0.16, 0.06])
_INCOME_P = np.array([0.30, 0.34, 0.22, 0.14])
_SETTLEMENT_P = np.array([0.18, 0.34, 0.32, 0.16])
_AGE_P = np.array([0.24, 0.26, 0.20, 0.14, 0.10, 0.06])


def _standardize(x: np.ndarray) -> np.ndarray:
    return (x - x.mean()) / x.std(ddof=1)


def _deal_items(rng, counts: np.ndarray, n_items: int) -> np.ndarray:
    """Row i gets counts[i] ones placed uniformly at random among n_items slots."""
    order = np.argsort(rng.random((counts.size, n_items)), axis=1)
    have = np.arange(n_items)[None, :] < counts[:, None]
    out = np.zeros((counts.size, n_items), dtype=bool)
    np.put_along_axis(out, order, have, axis=1)
    return out


def _graded(rng, z: np.ndarray, base_p: np.ndarray, tilt: float) -> np.ndarray:
    """Sample ordinal categories whose level drifts with latent ability z."""
    noise = rng.standard_normal(z.size)
    u = _phi((tilt * z + noise) / np.sqrt(tilt * tilt + 1.0))
    edges = np.cumsum(base_p) / base_p.sum()
    return np.searchsorted(edges[:-1], u, side="right")


_erf = np.vectorize(math.erf)


def _phi(x: np.ndarray) -> np.ndarray:
    """Standard normal CDF."""
    return 0.5 * (1.0 + _erf(x / np.sqrt(2.0)))


def synthesize_dataset(
    spec: SynthesisSpec,
    seed: int,
    codebook: Codebook | None = None,
) -> Dataset:
    """Generate a dataset hitting the spec's per-country competency moments.

    Deterministic for a given (spec, seed).
    """
    codebook = codebook or default_codebook()
    for t in spec.targets:
        if t.count <= 0:
            raise SynthesisError(f"{t.country}: count must be positive")
        for label, m in (("dfc_mean", t.dfc_mean), ("dfl_mean", t.dfl_mean)):
            if not 0.0 <= m <= 100.0:
                raise SynthesisError(f"{t.country}: {label} {m} outside [0, 100]")
        if t.dfc_std < 0 or t.dfl_std < 0:
            raise SynthesisError(f"{t.country}: negative std target")
    if not 0.0 <= spec.missing_rate < 1.0:
        raise SynthesisError("missing_rate must be in [0, 1)")

    n_dc = len(DIGITAL_ITEMS)
    n_fc = len(FINANCIAL_ITEMS)
    n_df = len(DIGITAL_FINANCIAL_ITEMS)
    keep = 1.0 - spec.missing_rate  # scored items lost to missingness score zero
    rho = spec.ability_correlation

    records: list[SurveyRecord] = []
    for ci, t in enumerate(spec.targets):
        rng = np.random.default_rng([seed, ci])
        n = t.count

        z_dfc = rng.standard_normal(n)
        z_ind = rng.standard_normal(n)
        if n >= 3:
            z_dfc = _standardize(z_dfc)
            z_ind = _standardize(z_ind)
        z_dfl = rho * z_dfc + np.sqrt(1.0 - rho * rho) * z_ind
        if n >= 3:
            z_dfl = _standardize(z_dfl)

        dfc_pct = np.clip(t.dfc_mean / keep + t.dfc_std * z_dfc, 0.0, 100.0)
        dfl_pct = np.clip(t.dfl_mean / keep + t.dfl_std * z_dfl, 0.0, 100.0)

        k_df = np.clip(np.rint(dfc_pct / 100.0 * n_df), 0, n_df).astype(int)
        other_pts = dfl_pct / 100.0 * 52.0 - 2.0 * k_df
        k_other = np.clip(np.rint(other_pts / 2.0), 0, n_dc + n_fc).astype(int)
        k_dc = np.clip(np.rint(k_other * n_dc / (n_dc + n_fc)), 0, n_dc).astype(int)
        k_fc = k_other - k_dc
        # Rebalance overflow between the two domains.
        over = k_fc > n_fc
        k_dc[over] += k_fc[over] - n_fc
        k_fc[over] = n_fc
        k_dc = np.minimum(k_dc, n_dc)

        have_dc = _deal_items(rng, k_dc, n_dc)
        have_fc = _deal_items(rng, k_fc, n_fc)
        have_df = _deal_items(rng, k_df, n_df)

        ability = z_dfl
        language = np.where(
            rng.random(n) < 0.85, _COUNTRY_LANGUAGE[t.country], "English"
        )
        gender = np.where(rng.random(n) < 0.52, "Female", "Male")
        age_idx = rng.choice(len(_AGE_P), size=n, p=_AGE_P / _AGE_P.sum())
        occupation_idx = rng.choice(
            len(_OCCUPATION_P), size=n, p=_OCCUPATION_P / _OCCUPATION_P.sum()
        )
        household_idx = rng.choice(
            len(_HOUSEHOLD_P), size=n, p=_HOUSEHOLD_P / _HOUSEHOLD_P.sum()
        )
        education_idx = _graded(rng, ability, _EDUCATION_P, tilt=0.9)
        income_idx = _graded(rng, ability, _INCOME_P, tilt=0.7)
        settlement_idx = _graded(rng, ability, _SETTLEMENT_P, tilt=0.5)
        urban = rng.random(n) < np.clip(0.38 + 0.10 * ability, 0.05, 0.95)
        household_size = rng.poisson(3.6, size=n) + 1

        cb = codebook
        age_cats = cb["age_group"].categories
        occ_cats = cb["occupation"].categories
        hh_cats = cb["household_composition"].categories
        edu_cats = cb["education"].categories
        inc_cats = cb["income_band"].categories
        set_cats = cb["settlement_size"].categories

        miss = rng.random((n, len(cb.fields))) < spec.missing_rate
        field_pos = {f.name: j for j, f in enumerate(cb.fields)}

        yn = np.array(["no", "yes"])
        for i in range(n):
            responses = {
                "gender": gender[i],
                "age_group": age_cats[age_idx[i]],
                "spoken_language": str(language[i]),
                "area": "Urban" if urban[i] else "Rural",
                "settlement_size": set_cats[settlement_idx[i]],
                "household_composition": hh_cats[household_idx[i]],
                "education": edu_cats[education_idx[i]],
                "occupation": occ_cats[occupation_idx[i]],
                "income_band": inc_cats[income_idx[i]],
                "household_size": float(household_size[i]),
            }
            for j, name in enumerate(DIGITAL_ITEMS):
                responses[name] = str(yn[int(have_dc[i, j])])
            for j, name in enumerate(FINANCIAL_ITEMS):
                responses[name] = str(yn[int(have_fc[i, j])])
            for j, name in enumerate(DIGITAL_FINANCIAL_ITEMS):
                responses[name] = str(yn[int(have_df[i, j])])
            for name in list(responses):
                if miss[i, field_pos[name]]:
                    responses[name] = None
            records.append(
                SurveyRecord(
                    record_id=f"{t.country.replace(' ', '')[:3].upper()}-{i:05d}",
                    country=t.country,
                    responses=responses,
                )
            )

    return make_dataset(records, codebook, provenance="Synthetic", seed=seed)

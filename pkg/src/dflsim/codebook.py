"""Survey codebook: field definitions, validation, and the bundled default instrument."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

INDEX_POINTS = 52

DOMAINS = ("Demographic", "SocioEconomic", "Digital", "Financial", "DigitalFinancial")
SCORED_DOMAINS = ("Digital", "Financial", "DigitalFinancial")
KINDS = ("Binary", "Ordinal", "Categorical", "Numeric")

COUNTRIES = (
    "Fiji",
    "PNG",
    "Samoa",
    "Solomon Islands",
    "Timor-Leste",
    "Tonga",
    "Vanuatu",
)


class CodebookError(ValueError):
    """Raised when a codebook violates its structural invariants."""


@dataclass(frozen=True)
class CodebookField:
    name: str
    domain: str
    kind: str
    points: int = 0
    modifiable: bool = False
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise CodebookError(f"field {self.name!r}: unknown domain {self.domain!r}")
        if self.kind not in KINDS:
            raise CodebookError(f"field {self.name!r}: unknown kind {self.kind!r}")
        if self.points < 0:
            raise CodebookError(f"field {self.name!r}: negative points")
        if self.points > 0 and self.kind not in ("Binary", "Ordinal"):
            raise CodebookError(
                f"field {self.name!r}: only Binary/Ordinal fields carry index points"
            )
        if self.points > 0 and self.domain not in SCORED_DOMAINS:
            raise CodebookError(
                f"field {self.name!r}: scored fields must belong to a competency domain"
            )
        if self.modifiable and self.domain not in SCORED_DOMAINS:
            raise CodebookError(
                f"field {self.name!r}: demographic and socio-economic fields are never modifiable"
            )
        if self.kind in ("Binary", "Ordinal", "Categorical") and len(self.categories) < 2:
            raise CodebookError(f"field {self.name!r}: needs at least two categories")
        if self.kind == "Binary" and len(self.categories) != 2:
            raise CodebookError(f"field {self.name!r}: Binary fields have exactly two categories")
        if len(set(self.categories)) != len(self.categories):
            raise CodebookError(f"field {self.name!r}: duplicate categories")

    @property
    def scored(self) -> bool:
        return self.points > 0

    def score_response(self, value: str | float | None) -> float:
        """Points awarded for one response; missing contributes 0."""
        if not self.scored or value is None:
            return 0.0
        idx = self.categories.index(str(value))
        if self.kind == "Binary":
            return float(self.points) if idx == 1 else 0.0
        return self.points * idx / (len(self.categories) - 1)


@dataclass(frozen=True)
class Codebook:
    name: str
    fields: tuple[CodebookField, ...] = field(default_factory=tuple)

    def __post_init__(self):
        names = [f.name for f in self.fields]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise CodebookError(f"duplicate field names: {sorted(dupes)}")
        total = sum(f.points for f in self.fields if f.domain in SCORED_DOMAINS)
        if total != INDEX_POINTS:
            raise CodebookError(
                f"scored points must sum to {INDEX_POINTS}, got {total}"
            )
        if "country" not in names:
            raise CodebookError("codebook must define a 'country' field")
        cf = self["country"]
        if cf.kind != "Categorical" or cf.domain != "Demographic":
            raise CodebookError("'country' must be a Demographic Categorical field")

    def __getitem__(self, name: str) -> CodebookField:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(f.name == name for f in self.fields)

    @property
    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    @property
    def country_categories(self) -> tuple[str, ...]:
        return self["country"].categories

    def scored_fields(self, domain: str | None = None) -> list[CodebookField]:
        return [
            f
            for f in self.fields
            if f.scored and (domain is None or f.domain == domain)
        ]

    def domain_max_points(self, domain: str) -> int:
        return sum(f.points for f in self.fields if f.domain == domain and f.scored)

    def feature_fields(self) -> list[CodebookField]:
        """Fields used as model inputs: everything in the codebook."""
        return list(self.fields)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "index_points": INDEX_POINTS,
            "fields": [
                {
                    "name": f.name,
                    "domain": f.domain,
                    "kind": f.kind,
                    "points": f.points,
                    "modifiable": f.modifiable,
                    "categories": list(f.categories),
                }
                for f in self.fields
            ],
        }


def codebook_from_dict(doc: dict) -> Codebook:
    try:
        fields = tuple(
            CodebookField(
                name=fd["name"],
                domain=fd["domain"],
                kind=fd["kind"],
                points=int(fd.get("points", 0)),
                modifiable=bool(fd.get("modifiable", False)),
                categories=tuple(fd.get("categories", ())),
            )
            for fd in doc["fields"]
        )
        return Codebook(name=doc.get("name", "unnamed"), fields=fields)
    except (KeyError, TypeError) as exc:
        raise CodebookError(f"malformed codebook document: {exc}") from exc


def load_codebook(path: str | Path) -> Codebook:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CodebookError(f"malformed codebook file {path}: {exc}") from exc
    return codebook_from_dict(doc)


def save_codebook(codebook: Codebook, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(codebook.to_dict(), indent=2, sort_keys=False) + "\n", encoding="utf-8"
    )


def _binary(name, domain):
    return CodebookField(
        name=name, domain=domain, kind="Binary", points=2, modifiable=True,
        categories=("no", "yes"),
    )


YES = "yes"
NO = "no"

# Policy levers named in the intervention catalogue; all are scored binary items.
DIGITAL_ITEMS = (
    "device_ownership",
    "smartphone_ownership",
    "internet_access",
    "frequent_app_use",
    "digital_content_creation",
    "computational_skills",
    "online_information_search",
    "digital_communication",
    "social_media_use",
)
FINANCIAL_ITEMS = (
    "expense_recording",
    "budget_management",
    "financial_optimism",
    "savings_habit",
    "price_comparison",
    "financial_goal_setting",
    "debt_awareness",
    "numeracy_confidence",
)
DIGITAL_FINANCIAL_ITEMS = (
    "digital_spending_tracking",
    "digital_autonomy",
    "cybersecurity_resilience",
    "mobile_money_use",
    "online_transfers",
    "password_memory",
    "scam_awareness",
    "dfs_confidence",
    "digital_wallet_ownership",
)

LANGUAGES = (
    "English",
    "Fijian",
    "Tok Pisin",
    "Samoan",
    "Solomon Pijin",
    "Tetum",
    "Tongan",
    "Bislama",
)


def default_codebook() -> Codebook:
    """The bundled instrument.

    The 52 index points are allocated Digital 18 / Financial 16 / DigitalFinancial 18
    across binary items worth 2 points each.  The allocation is a documented,
    configurable default: supply your own codebook file to override it.
    """
    fields: list[CodebookField] = [
        CodebookField("country", "Demographic", "Categorical", categories=COUNTRIES),
        CodebookField("gender", "Demographic", "Categorical", categories=("Female", "Male")),
        CodebookField(
            "age_group", "Demographic", "Ordinal",
            categories=("15-24", "25-34", "35-44", "45-54", "55-64", "65-74"),
        ),
        CodebookField("spoken_language", "Demographic", "Categorical", categories=LANGUAGES),
        CodebookField("area", "Demographic", "Categorical", categories=("Rural", "Urban")),
        CodebookField(
            "settlement_size", "Demographic", "Ordinal",
            categories=(
                "Fewer than 100 people",
                "100 to 3,000 people",
                "3,000 to 100,000 people",
                "More than 100,000 people",
            ),
        ),
        CodebookField(
            "household_composition", "Demographic", "Categorical",
            categories=(
                "Entirely alone",
                "With the family that brought you up",
                "With own family",
                "Other",
            ),
        ),
        CodebookField(
            "education", "SocioEconomic", "Ordinal",
            categories=(
                "No formal education",
                "Primary",
                "Lower secondary",
                "High school",
                "Tertiary",
                "Postgraduate",
            ),
        ),
        CodebookField(
            "occupation", "SocioEconomic", "Categorical",
            categories=(
                "Employed",
                "Self-employed",
                "Farming or fishing",
                "A regular overseas worker",
                "Housewife or caregiver",
                "Student",
                "Unemployed",
                "Other",
            ),
        ),
        CodebookField(
            "income_band", "SocioEconomic", "Ordinal",
            categories=(
                "No income",
                "Under $385 per fortnight",
                "Between $385 and $480 per fortnight",
                "Over $480 per fortnight",
            ),
        ),
        CodebookField("household_size", "SocioEconomic", "Numeric"),
    ]
    fields += [_binary(n, "Digital") for n in DIGITAL_ITEMS]
    fields += [_binary(n, "Financial") for n in FINANCIAL_ITEMS]
    fields += [_binary(n, "DigitalFinancial") for n in DIGITAL_FINANCIAL_ITEMS]
    return Codebook(name="pacific-dfl-default", fields=tuple(fields))

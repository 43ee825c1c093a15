"""Survey microdata: records, validation, CSV ingest/export, and summaries."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path

from .codebook import Codebook, load_codebook

MAX_REPORTED_VIOLATIONS = 20


class ValidationError(ValueError):
    """Raised when records do not conform to the codebook."""

    def __init__(self, violations: list[str], total: int | None = None):
        self.violations = violations
        self.total = total if total is not None else len(violations)
        shown = violations[:MAX_REPORTED_VIOLATIONS]
        msg = f"{self.total} validation error(s):\n" + "\n".join(f"  - {v}" for v in shown)
        if self.total > len(shown):
            msg += f"\n  ... and {self.total - len(shown)} more"
        super().__init__(msg)


@dataclass(frozen=True)
class SurveyRecord:
    record_id: str
    country: str
    responses: dict = field(default_factory=dict)

    def get(self, name: str):
        if name == "country":
            return self.country
        return self.responses.get(name)


@dataclass(frozen=True)
class Dataset:
    codebook: Codebook
    records: tuple[SurveyRecord, ...]
    provenance: str = "Ingested"  # "Ingested" | "Synthetic"
    seed: int | None = None

    def __len__(self):
        return len(self.records)

    def countries(self) -> list[str]:
        seen = []
        for r in self.records:
            if r.country not in seen:
                seen.append(r.country)
        return seen

    def fingerprint(self) -> str:
        buf = io.StringIO()
        write_dataset_stream(self, buf)
        return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()[:16]


def _check_record(record: SurveyRecord, codebook: Codebook, errors: list[str]) -> None:
    country_field = codebook["country"]
    if record.country not in country_field.categories:
        errors.append(
            f"record {record.record_id}: country {record.country!r} not in codebook vocabulary"
        )
    for name, value in record.responses.items():
        if name == "country":
            continue
        if name not in codebook:
            errors.append(f"record {record.record_id}: unknown field {name!r}")
            continue
        if value is None:
            continue
        f = codebook[name]
        if f.kind == "Numeric":
            try:
                float(value)
            except (TypeError, ValueError):
                errors.append(
                    f"record {record.record_id}: field {name!r} expects a number, got {value!r}"
                )
        elif str(value) not in f.categories:
            errors.append(
                f"record {record.record_id}: field {name!r} has out-of-vocabulary value {value!r}"
            )


def validate_records(records, codebook: Codebook) -> None:
    errors: list[str] = []
    seen_ids = set()
    for record in records:
        if record.record_id in seen_ids:
            errors.append(f"duplicate record_id {record.record_id!r}")
        seen_ids.add(record.record_id)
        _check_record(record, codebook, errors)
    if errors:
        raise ValidationError(errors)


def make_dataset(records, codebook: Codebook, provenance="Ingested", seed=None) -> Dataset:
    records = tuple(records)
    validate_records(records, codebook)
    return Dataset(codebook=codebook, records=records, provenance=provenance, seed=seed)


def load_dataset(codebook_path: str | Path, data_path: str | Path) -> Dataset:
    """Load and validate a delimited microdata file against a codebook file."""
    codebook = load_codebook(codebook_path)
    path = Path(data_path)
    if not path.exists():
        raise FileNotFoundError(data_path)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "record_id" not in header or "country" not in header:
            raise ValidationError(["header must contain record_id and country columns"])
        unknown = [h for h in header if h not in ("record_id",) and h not in codebook]
        if unknown:
            raise ValidationError([f"unknown field {h!r} in header" for h in unknown])
        for row in reader:
            responses = {}
            for name, raw in row.items():
                if name in ("record_id", "country"):
                    continue
                if raw is None or raw == "":
                    responses[name] = None  # empty cell marks a missing response
                elif codebook[name].kind == "Numeric":
                    responses[name] = float(raw)
                else:
                    responses[name] = raw
            records.append(
                SurveyRecord(
                    record_id=row["record_id"], country=row["country"], responses=responses
                )
            )
    return make_dataset(records, codebook)


def write_dataset_stream(dataset: Dataset, fh) -> None:
    names = [n for n in dataset.codebook.field_names if n != "country"]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["record_id", "country"] + names)
    for r in dataset.records:
        row = [r.record_id, r.country]
        for n in names:
            v = r.responses.get(n)
            if v is None:
                row.append("")
            elif isinstance(v, float) and v == int(v):
                row.append(str(int(v)))
            else:
                row.append(str(v))
        writer.writerow(row)


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        write_dataset_stream(dataset, fh)


@dataclass(frozen=True)
class DatasetSummary:
    total: int
    country_counts: dict
    missingness: dict  # field name -> fraction of records missing


def summarize(dataset: Dataset) -> DatasetSummary:
    counts: dict[str, int] = {}
    for r in dataset.records:
        counts[r.country] = counts.get(r.country, 0) + 1
    n = len(dataset.records)
    missing: dict[str, float] = {}
    for name in dataset.codebook.field_names:
        if name == "country":
            continue
        if n == 0:
            missing[name] = 0.0
        else:
            k = sum(1 for r in dataset.records if r.responses.get(name) is None)
            missing[name] = k / n
    return DatasetSummary(total=n, country_counts=counts, missingness=missing)

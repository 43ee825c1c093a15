"""Competency scoring: domain points and the composite 0-52 literacy index."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .codebook import Codebook, INDEX_POINTS, SCORED_DOMAINS
from .dataset import Dataset, SurveyRecord


@dataclass(frozen=True)
class CompetencyScores:
    record_id: str
    country: str
    dc_points: float
    fc_points: float
    dfc_points: float
    dc_pct: float
    fc_pct: float
    dfc_pct: float

    @property
    def dfl_points(self) -> float:
        # The composite index is additive by construction.
        return self.dc_points + self.fc_points + self.dfc_points

    @property
    def dfl_pct(self) -> float:
        return points_to_pct(self.dfl_points)


def points_to_pct(points: float, maximum: float = INDEX_POINTS) -> float:
    return points / maximum * 100.0


def pct_to_points(pct: float, maximum: float = INDEX_POINTS) -> float:
    return pct / 100.0 * maximum


def score_record(record: SurveyRecord, codebook: Codebook) -> CompetencyScores:
    """Score one respondent.  Missing scored items contribute 0 points."""
    totals = {d: 0.0 for d in SCORED_DOMAINS}
    for f in codebook.fields:
        if f.scored:
            totals[f.domain] += f.score_response(record.responses.get(f.name))
    dc, fc, dfc = totals["Digital"], totals["Financial"], totals["DigitalFinancial"]
    return CompetencyScores(
        record_id=record.record_id,
        country=record.country,
        dc_points=dc,
        fc_points=fc,
        dfc_points=dfc,
        dc_pct=points_to_pct(dc, codebook.domain_max_points("Digital")),
        fc_pct=points_to_pct(fc, codebook.domain_max_points("Financial")),
        dfc_pct=points_to_pct(dfc, codebook.domain_max_points("DigitalFinancial")),
    )


def score_dataset(dataset: Dataset) -> list[CompetencyScores]:
    return [score_record(r, dataset.codebook) for r in dataset.records]


SCORE_COLUMNS = [
    "record_id", "country",
    "dc_points", "fc_points", "dfc_points", "dfl_points",
    "dc_pct", "fc_pct", "dfc_pct", "dfl_pct",
]


def write_scores(scores: list[CompetencyScores], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORE_COLUMNS)
        for s in scores:
            w.writerow([
                s.record_id, s.country,
                repr(s.dc_points), repr(s.fc_points), repr(s.dfc_points), repr(s.dfl_points),
                repr(s.dc_pct), repr(s.fc_pct), repr(s.dfc_pct), repr(s.dfl_pct),
            ])

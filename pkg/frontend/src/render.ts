/** View models for the dashboard.
 *
 * Every number shown to the user is copied verbatim from a service payload;
 * this module never recomputes, rounds, or aggregates. Formatting to text
 * happens at the last moment in the DOM layer.
 */

import type {
  CompleteModelDoc,
  EvaluationRow,
  LeverRow,
  SimulationDoc,
  SubgroupRow,
} from "./types.js";

export interface GainCards {
  reach: number;
  reachedCount: number;
  population: number;
  populationGainPoints: number;
  populationGainPct: number;
  reachedGainPoints: number;
  reachedGainPct: number;
}

export interface SubgroupView {
  field: string;
  group: string;
  count: number;
  reach: number;
  meanGainPoints: number;
  meanGainPct: number;
}

export interface ResultView {
  runId: string;
  modelId: string;
  scenarioName: string;
  levers: { field: string; value: string }[];
  filtered: boolean;
  clip: boolean;
  cards: GainCards;
  subgroups: SubgroupView[];
  modelFingerprint: string;
  datasetFingerprint: string;
}

export function resultView(doc: SimulationDoc): ResultView {
  const r = doc.result;
  return {
    runId: doc.id,
    modelId: doc.model_id,
    scenarioName: r.scenario.name,
    levers: Object.entries(r.scenario.assignments).map(([field, value]) => ({
      field,
      value,
    })),
    filtered: r.scenario.filter !== null,
    clip: r.scenario.clip,
    cards: {
      reach: r.reach,
      reachedCount: r.reached_count,
      population: r.population,
      populationGainPoints: r.population_gain_points,
      populationGainPct: r.population_gain_pct,
      reachedGainPoints: r.reached_gain_points,
      reachedGainPct: r.reached_gain_pct,
    },
    subgroups: r.subgroups.map(subgroupView),
    modelFingerprint: r.model_fingerprint,
    datasetFingerprint: r.dataset_fingerprint,
  };
}

function subgroupView(row: SubgroupRow): SubgroupView {
  return {
    field: row.field,
    group: row.group,
    count: row.count,
    reach: row.reach,
    meanGainPoints: row.mean_gain_points,
    meanGainPct: row.mean_gain_pct,
  };
}

export interface ModelCardView {
  id: string;
  chosenFamily: string;
  evaluation: EvaluationRow[];
  leverTable: LeverRow[];
  datasetId: string;
  transparent: boolean;
}

export function modelCardView(doc: CompleteModelDoc): ModelCardView {
  return {
    id: doc.id,
    chosenFamily: doc.outcome.selection.chosen,
    evaluation: doc.outcome.evaluation,
    leverTable: doc.outcome.levers,
    datasetId: doc.dataset_id,
    transparent: doc.outcome.model.family === "Linear",
  };
}

/** Last-moment text formatting; not part of the fidelity surface. */
export function fmtShare(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

export function fmtPoints(points: number): string {
  return points.toFixed(2);
}

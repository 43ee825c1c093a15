/** Payload shapes of the simulation service, mirrored verbatim. */

export interface HealthResponse {
  status: string;
  version: string;
}

export interface DatasetListEntry {
  id: string;
  provenance: string | null;
  seed: number | null;
  fingerprint: string | null;
  records: number;
}

export interface DatasetDetail {
  id: string;
  provenance: string;
  records: number;
  country_counts: Record<string, number>;
  missingness: Record<string, number>;
  fingerprint: string;
}

export interface MeasureStats {
  mean: number;
  median: number;
  std: number;
  min: number;
  max: number;
}

export interface CountryStats {
  country: string;
  count: number;
  dfc: MeasureStats;
  dfl: MeasureStats;
}

export interface DiscriminanceRow {
  country: string;
  cv_dfc: number;
  cv_dfl: number;
  dfc_more_discriminant: boolean;
}

export interface GapRow {
  category: string;
  lowest_group: string;
  lowest_mean: number;
  highest_group: string;
  highest_mean: number;
  gap: number;
}

export interface ProfilePayload {
  country_stats: CountryStats[];
  discriminance: DiscriminanceRow[];
  gap_tables: Record<string, GapRow[]>;
  dfc_dfl_correlation: number | null;
}

export type ModelFamily = "Linear" | "RandomForest" | "GradientBoosting";

export interface EvaluationRow {
  family: ModelFamily;
  mse: number;
  rmse: number;
  mae: number;
  test_r2: number | null;
  cv_r2_mean: number | null;
  cv_r2_std: number | null;
  cv_fold_r2: (number | null)[];
}

export interface SelectionResult {
  chosen: ModelFamily;
  accuracy_survivors: ModelFamily[];
  stability_survivors: ModelFamily[];
  transparency_order: ModelFamily[];
  epsilon: number;
}

export interface LeverRow {
  field: string;
  domain: string;
  modifiable: boolean;
  role: "policy lever" | "segmentation variable";
  raw_coefficient: number;
  standardized_coefficient: number;
  relative_weight: number;
}

export interface TrainingOutcome {
  seed: number;
  dataset_fingerprint: string;
  model_fingerprint: string;
  split_counts: {
    train: number;
    test: number;
    test_by_stratum: Record<string, number>;
  };
  evaluation: EvaluationRow[];
  selection: SelectionResult;
  model: { family: ModelFamily; [key: string]: unknown };
  levers: LeverRow[];
}

export interface CompleteModelDoc {
  id: string;
  status: "complete";
  created_at: string;
  dataset_id: string;
  request: Record<string, unknown>;
  outcome: TrainingOutcome;
}

export interface PendingModelDoc {
  id: string;
  status: "training" | "failed";
  error?: string;
}

export type ModelDoc = CompleteModelDoc | PendingModelDoc;

export interface ScenarioDocument {
  name: string;
  assignments: Record<string, string>;
  filter: Record<string, string[]> | null;
  clip: boolean;
}

export interface SubgroupRow {
  field: string;
  group: string;
  count: number;
  reach: number;
  mean_gain_points: number;
  mean_gain_pct: number;
}

export interface SimulationResultPayload {
  scenario: ScenarioDocument;
  reach: number;
  population_gain_points: number;
  population_gain_pct: number;
  reached_gain_points: number;
  reached_gain_pct: number;
  population: number;
  reached_count: number;
  model_fingerprint: string;
  dataset_fingerprint: string;
  subgroups: SubgroupRow[];
}

export interface SimulationDoc {
  id: string;
  created_at: string;
  model_id: string;
  dataset_id: string;
  model_fingerprint: string;
  request: { scenario: ScenarioDocument; disaggregate_by: string[] };
  result: SimulationResultPayload;
}

export interface SimulationListEntry {
  id: string;
  model_id: string;
  scenario: string;
  created_at: string;
}

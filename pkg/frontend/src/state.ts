/** Scenario builder state: what the user has composed, before the run. */

import type { CompleteModelDoc, LeverRow, ScenarioDocument } from "./types.js";

export class DraftError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DraftError";
  }
}

/**
 * Mutable draft of a what-if scenario against one trained model.
 *
 * Only fields the model's lever table marks as modifiable may be assigned;
 * segmentation variables are available for filtering, never for assignment.
 * Nothing is submitted until the user explicitly runs the draft.
 */
export class ScenarioDraft {
  readonly model: CompleteModelDoc;
  name: string;
  clip = true;
  disaggregateBy: string[] = ["country", "gender", "area"];
  private readonly assignments = new Map<string, string>();
  private readonly filters = new Map<string, string[]>();

  constructor(model: CompleteModelDoc, name = "custom_scenario") {
    this.model = model;
    this.name = name;
  }

  /** Fields the UI may offer as intervention levers. */
  availableLevers(): LeverRow[] {
    return this.model.outcome.levers.filter((row) => row.modifiable);
  }

  /** Fields the UI may offer for population filtering. */
  availableFilterFields(): string[] {
    return this.model.outcome.levers
      .filter((row) => !row.modifiable)
      .map((row) => row.field);
  }

  setLever(field: string, value: string): void {
    if (!this.availableLevers().some((row) => row.field === field)) {
      throw new DraftError(`${field} is not a modifiable lever of this model`);
    }
    this.assignments.set(field, value);
  }

  clearLever(field: string): void {
    this.assignments.delete(field);
  }

  leverCount(): number {
    return this.assignments.size;
  }

  setFilter(field: string, values: string[]): void {
    if (!this.availableFilterFields().includes(field)) {
      throw new DraftError(`${field} is not a segmentation field of this model`);
    }
    if (values.length === 0) {
      throw new DraftError("a filter needs at least one allowed value");
    }
    this.filters.set(field, [...values]);
  }

  clearFilter(field: string): void {
    this.filters.delete(field);
  }

  /** The Run button stays disabled until at least one lever is set. */
  canSubmit(): boolean {
    return this.assignments.size > 0;
  }

  /** Serialize to the scenario document the service accepts verbatim. */
  toScenarioDocument(): ScenarioDocument {
    if (!this.canSubmit()) {
      throw new DraftError("scenario has no levers assigned");
    }
    return {
      name: this.name,
      assignments: Object.fromEntries(this.assignments),
      filter: this.filters.size === 0 ? null : Object.fromEntries(this.filters),
      clip: this.clip,
    };
  }
}

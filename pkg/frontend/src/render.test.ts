import { describe, expect, it } from "vitest";

import { resultView } from "./render.js";
import type { SimulationDoc } from "./types.js";

function fixture(): SimulationDoc {
  const scenario = {
    name: "device_access",
    assignments: { device_ownership: "yes" },
    filter: null,
    clip: true,
  };
  return {
    id: "sim-abc",
    created_at: "2026-01-02T03:04:05+00:00",
    model_id: "mdl-abc",
    dataset_id: "ds-abc",
    model_fingerprint: "mf-1",
    request: { scenario, disaggregate_by: ["country"] },
    result: {
      scenario,
      reach: 0.31740212,
      population_gain_points: 2.17394821,
      population_gain_pct: 4.18066964,
      reached_gain_points: 6.84918355,
      reached_gain_pct: 13.17150683,
      population: 505,
      reached_count: 160,
      model_fingerprint: "mf-1",
      dataset_fingerprint: "df-1",
      subgroups: [
        {
          field: "country",
          group: "Fiji",
          count: 84,
          reach: 0.29761905,
          mean_gain_points: 2.03918273,
          mean_gain_pct: 3.92150525,
        },
      ],
    },
  };
}

describe("resultView", () => {
  it("copies every number verbatim, without rounding or recomputation", () => {
    const doc = fixture();
    const view = resultView(doc);
    expect(view.cards.reach).toBe(doc.result.reach);
    expect(view.cards.populationGainPoints).toBe(doc.result.population_gain_points);
    expect(view.cards.populationGainPct).toBe(doc.result.population_gain_pct);
    expect(view.cards.reachedGainPoints).toBe(doc.result.reached_gain_points);
    expect(view.cards.reachedGainPct).toBe(doc.result.reached_gain_pct);
    expect(view.cards.population).toBe(doc.result.population);
    expect(view.cards.reachedCount).toBe(doc.result.reached_count);
    expect(view.subgroups[0]?.meanGainPoints).toBe(
      doc.result.subgroups[0]?.mean_gain_points,
    );
    expect(view.subgroups[0]?.reach).toBe(doc.result.subgroups[0]?.reach);
    expect(view.levers).toEqual([{ field: "device_ownership", value: "yes" }]);
    expect(view.runId).toBe("sim-abc");
  });
});

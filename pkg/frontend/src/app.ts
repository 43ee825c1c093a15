/** DOM wiring for the scenario explorer. */

import { OfflineError, ServiceClient, ServiceError } from "./api.js";
import { fmtPoints, fmtShare, modelCardView, resultView } from "./render.js";
import { ScenarioDraft } from "./state.js";
import type { CompleteModelDoc, SimulationDoc } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startApp(client = new ServiceClient()): void {
  const banner = el<HTMLDivElement>("offline-banner");
  const modelList = el<HTMLUListElement>("model-list");
  const builder = el<HTMLDivElement>("builder");
  const leverBox = el<HTMLDivElement>("lever-box");
  const runButton = el<HTMLButtonElement>("run-button");
  const clipToggle = el<HTMLInputElement>("clip-toggle");
  const nameInput = el<HTMLInputElement>("scenario-name");
  const errorBox = el<HTMLDivElement>("error-box");
  const dashboard = el<HTMLDivElement>("dashboard");
  const history = el<HTMLUListElement>("run-history");

  let draft: ScenarioDraft | null = null;

  function showError(message: string): void {
    errorBox.textContent = message;
    errorBox.hidden = message === "";
  }

  function handleFailure(exc: unknown): void {
    if (exc instanceof OfflineError) {
      banner.hidden = false;
      return;
    }
    banner.hidden = true;
    if (exc instanceof ServiceError) showError(exc.detail);
    else showError(String(exc));
  }

  function syncRunButton(): void {
    runButton.disabled = draft === null || !draft.canSubmit();
  }

  function renderBuilder(model: CompleteModelDoc): void {
    draft = new ScenarioDraft(model, nameInput.value || "custom_scenario");
    builder.hidden = false;
    leverBox.replaceChildren();
    for (const lever of draft.availableLevers()) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.addEventListener("change", () => {
        if (!draft) return;
        if (box.checked) draft.setLever(lever.field, "yes");
        else draft.clearLever(lever.field);
        syncRunButton();
      });
      label.append(box, ` ${lever.field} (weight ${fmtPoints(lever.relative_weight)})`);
      const item = document.createElement("div");
      item.append(label);
      leverBox.append(item);
    }
    syncRunButton();
  }

  function renderResult(doc: SimulationDoc): void {
    const view = resultView(doc);
    dashboard.replaceChildren();
    const heading = document.createElement("h3");
    heading.textContent = `${view.scenarioName} (${view.runId})`;
    const cards = document.createElement("p");
    cards.textContent =
      `reach ${fmtShare(view.cards.reach)} ` +
      `(${view.cards.reachedCount} of ${view.cards.population}); ` +
      `population gain ${fmtPoints(view.cards.populationGainPoints)} points; ` +
      `reached gain ${fmtPoints(view.cards.reachedGainPoints)} points`;
    const table = document.createElement("table");
    for (const row of view.subgroups) {
      const tr = document.createElement("tr");
      for (const cell of [
        row.field,
        row.group,
        String(row.count),
        fmtShare(row.reach),
        fmtPoints(row.meanGainPoints),
      ]) {
        const td = document.createElement("td");
        td.textContent = cell;
        tr.append(td);
      }
      table.append(tr);
    }
    dashboard.append(heading, cards, table);
  }

  async function refreshHistory(): Promise<void> {
    const runs = await client.listSimulations();
    history.replaceChildren();
    for (const run of runs) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = `${run.scenario} — ${run.created_at}`;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        client.getSimulation(run.id).then(renderResult).catch(handleFailure);
      });
      item.append(link);
      history.append(item);
    }
  }

  async function refreshModels(): Promise<void> {
    const models = await client.listModels();
    modelList.replaceChildren();
    for (const entry of models) {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.textContent = `${entry.id} [${entry.status}]`;
      button.disabled = entry.status !== "complete";
      button.addEventListener("click", async () => {
        try {
          const doc = await client.getModel(entry.id);
          if (doc.status !== "complete") return;
          showError("");
          const card = modelCardView(doc);
          if (!card.transparent) {
            // the service rejects lever extraction for opaque families;
            // surface its wording rather than inventing our own
            showError("lever extraction requires the transparent model");
          }
          renderBuilder(doc);
        } catch (exc) {
          handleFailure(exc);
        }
      });
      item.append(button);
      modelList.append(item);
    }
  }

  runButton.addEventListener("click", async () => {
    if (!draft) return;
    draft.clip = clipToggle.checked;
    draft.name = nameInput.value || "custom_scenario";
    try {
      showError("");
      const doc = await client.runScenario(
        draft.model.id,
        draft.toScenarioDocument(),
        draft.disaggregateBy,
      );
      banner.hidden = true;
      renderResult(doc);
      await refreshHistory();
    } catch (exc) {
      handleFailure(exc);
    }
  });

  client
    .health()
    .then(() => {
      banner.hidden = true;
      return Promise.all([refreshModels(), refreshHistory()]);
    })
    .catch(handleFailure);
}

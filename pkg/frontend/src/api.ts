/** Typed HTTP client for the dflsim service. */

import type {
  DatasetDetail,
  DatasetListEntry,
  HealthResponse,
  ModelDoc,
  ProfilePayload,
  ScenarioDocument,
  SimulationDoc,
  SimulationListEntry,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The service answered with a non-2xx status. */
export class ServiceError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`service returned ${status}: ${detail}`);
    this.name = "ServiceError";
    this.status = status;
    this.detail = detail;
  }
}

/** The service could not be reached at all (network failure, refused, down). */
export class OfflineError extends Error {
  constructor(cause: unknown) {
    super("service unreachable");
    this.name = "OfflineError";
    this.cause = cause;
  }
}

export interface ClientOptions {
  baseUrl?: string;
  fetchImpl?: FetchLike;
}

export class ServiceClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "http://127.0.0.1:8765").replace(/\/+$/, "");
    // bind so a bare global fetch keeps its receiver
    this.fetchImpl = options.fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (exc) {
      throw new OfflineError(exc);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: unknown };
        if (typeof payload.detail === "string") detail = payload.detail;
        else if (payload.detail !== undefined) detail = JSON.stringify(payload.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ServiceError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/health");
  }

  listDatasets(): Promise<DatasetListEntry[]> {
    return this.request<{ datasets: DatasetListEntry[] }>("GET", "/datasets").then(
      (r) => r.datasets,
    );
  }

  getDataset(id: string): Promise<DatasetDetail> {
    return this.request("GET", `/datasets/${id}`);
  }

  getProfile(id: string): Promise<ProfilePayload> {
    return this.request<{ id: string; profile: ProfilePayload }>(
      "GET",
      `/datasets/${id}/profile`,
    ).then((r) => r.profile);
  }

  createDataset(body: Record<string, unknown>): Promise<{
    id: string;
    records: number;
    country_counts: Record<string, number>;
    fingerprint: string;
  }> {
    return this.request("POST", "/datasets", body);
  }

  trainModel(body: Record<string, unknown>): Promise<{ id: string; status: string }> {
    return this.request("POST", "/models", body);
  }

  listModels(): Promise<{ id: string; status: string }[]> {
    return this.request<{ models: { id: string; status: string }[] }>(
      "GET",
      "/models",
    ).then((r) => r.models);
  }

  getModel(id: string): Promise<ModelDoc> {
    return this.request("GET", `/models/${id}`);
  }

  runScenario(
    modelId: string,
    scenario: ScenarioDocument,
    disaggregateBy?: string[],
  ): Promise<SimulationDoc> {
    const body: Record<string, unknown> = { model_id: modelId, scenario };
    if (disaggregateBy !== undefined) body.disaggregate_by = disaggregateBy;
    return this.request("POST", "/simulations", body);
  }

  listSimulations(): Promise<SimulationListEntry[]> {
    return this.request<{ simulations: SimulationListEntry[] }>(
      "GET",
      "/simulations",
    ).then((r) => r.simulations);
  }

  getSimulation(id: string): Promise<SimulationDoc> {
    return this.request("GET", `/simulations/${id}`);
  }
}

// Thin typed client for the planning API. Every dashboard number originates
// from one of these calls.

import type {
  JobRef,
  JobStatus,
  OccupancyResponse,
  PlanRequest,
  PlanResponse,
  ProjectionResponse,
  ProjectRequest,
  ScenarioRequest,
  ScenarioResponse,
  SitesResponse,
} from "./types.js";
import { isJobRef } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`API error ${status}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  getSites(): Promise<SitesResponse> {
    return this.request("GET", "/sites");
  }

  getOccupancy(siteId: string): Promise<OccupancyResponse> {
    return this.request("GET", `/sites/${encodeURIComponent(siteId)}/occupancy`);
  }

  postPlan(siteId: string, body: PlanRequest): Promise<PlanResponse> {
    return this.request("POST", `/sites/${encodeURIComponent(siteId)}/plan`, body);
  }

  postScenario(siteId: string, body: ScenarioRequest): Promise<ScenarioResponse> {
    return this.request("POST", `/sites/${encodeURIComponent(siteId)}/scenario`, body);
  }

  postProject(body: ProjectRequest): Promise<ProjectionResponse | JobRef> {
    return this.request("POST", "/project", body);
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request("GET", `/jobs/${encodeURIComponent(jobId)}`);
  }

  /** Run a projection, polling the job endpoint when it goes asynchronous. */
  async runProjection(
    body: ProjectRequest,
    pollMs = 500,
    maxPolls = 600,
  ): Promise<ProjectionResponse> {
    const first = await this.postProject(body);
    if (!isJobRef(first)) {
      return first;
    }
    for (let i = 0; i < maxPolls; i++) {
      await delay(pollMs);
      const status = await this.getJob(first.job_id);
      if (status.status === "done" && status.result) {
        return status.result;
      }
      if (status.status === "error") {
        throw new ApiError(500, status.detail ?? "projection failed");
      }
    }
    throw new ApiError(504, `projection job ${first.job_id} did not finish`);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, payload?.detail ?? payload);
    }
    return payload as T;
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

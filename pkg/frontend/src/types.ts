// Request/response shapes of the capacity-planning HTTP API.
// The UI renders these values verbatim; it performs no model arithmetic.

export interface UtilizationStats {
  mean_pct: number;
  sd_pct: number;
  pct_days_over_100: number;
  excess_mean_pct: number | null;
  excess_sd_pct: number | null;
  pct_days_under_70: number;
  shortfall_mean_pct: number | null;
  shortfall_sd_pct: number | null;
}

export interface SiteSummary {
  site_id: string;
  start: string;
  days: number;
  beds: Record<string, number>;
  rho_bar: number;
  family: string;
  kappa: number | null;
  s_max: number;
  utilization: Record<string, UtilizationStats>;
}

export interface SitesResponse {
  snapshot_id: string;
  sites: SiteSummary[];
}

export interface OccupancyResponse {
  site_id: string;
  start: string;
  rho_bar: number;
  rho: number[];
  delta: number[];
}

export interface PlanRequest {
  gamma: number;
  alpha: number;
}

export interface PlanResponse {
  site_id: string;
  gamma: number;
  alpha: number;
  beds: number;
}

export interface ScenarioRequest {
  beta_lambda?: number;
  beta_mu?: number;
  beta_sigma2?: number;
  date_range?: [number, number] | null;
  strategies?: string[];
}

export interface ScenarioResponse {
  site_id: string;
  spec: {
    beta_lambda: number;
    beta_mu: number;
    beta_sigma2: number;
    date_range: [number, number] | null;
  };
  baseline_beds: Record<string, number>;
  scenario_beds: Record<string, number>;
  occupancy: {
    baseline_mean: number;
    scenario_mean: number;
    baseline_peak: number;
    scenario_peak: number;
    delta: number[];
  };
}

export interface StrategyStats {
  median: number;
  q25: number;
  q75: number;
  mean: number;
  sd: number;
}

export interface ProjectionRow {
  site_id: string;
  year: number;
  b_average: number;
  [strategy: string]: string | number | StrategyStats;
}

export interface ProjectionResponse {
  runs: number;
  rows: ProjectionRow[];
}

export interface ProjectRequest {
  eta?: number;
  psi?: number;
  runs?: number;
  seed?: number;
  births?: Record<string, number>;
}

export interface JobRef {
  job_id: string;
  status: string;
}

export interface JobStatus {
  status: "running" | "done" | "error";
  result?: ProjectionResponse;
  detail?: string;
}

export function isJobRef(payload: ProjectionResponse | JobRef): payload is JobRef {
  return (payload as JobRef).job_id !== undefined;
}

/** Extract the per-strategy run statistics embedded in a projection row. */
export function strategyStats(row: ProjectionRow): Map<string, StrategyStats> {
  const out = new Map<string, StrategyStats>();
  for (const [key, value] of Object.entries(row)) {
    if (typeof value === "object" && value !== null && "median" in value) {
      out.set(key, value as StrategyStats);
    }
  }
  return out;
}

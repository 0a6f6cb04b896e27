// Browser-session state: the scenario form, the saved-comparison list, and
// a latest-wins guard that keeps stale in-flight responses from overwriting
// newer ones. Nothing here computes model quantities.

import type { ScenarioRequest, ScenarioResponse } from "./types.js";

export const GAMMA_CHOICES = [0.85, 1] as const;
export const ALPHA_CHOICES = [0.01, 0.05] as const;
export const BETA_RANGE: readonly [number, number] = [0, 2];

export interface ScenarioForm {
  site: string;
  betaLambda: number;
  betaMu: number;
  betaSigma2: number;
  gamma: number;
  alpha: number;
  eta: number;
  psi: number;
  runs: number;
}

export function defaultForm(site: string): ScenarioForm {
  return {
    site,
    betaLambda: 1,
    betaMu: 1,
    betaSigma2: 1,
    gamma: 1,
    alpha: 0.05,
    eta: 1,
    psi: 1,
    runs: 300,
  };
}

/** Field-level validation mirroring the API schema; empty result means valid. */
export function validateForm(form: ScenarioForm): Partial<Record<keyof ScenarioForm, string>> {
  const errors: Partial<Record<keyof ScenarioForm, string>> = {};
  const [lo, hi] = BETA_RANGE;
  for (const field of ["betaLambda", "betaMu", "betaSigma2"] as const) {
    const value = form[field];
    if (!Number.isFinite(value) || value < lo || value > hi) {
      errors[field] = `must be between ${lo} and ${hi}`;
    }
  }
  if (form.betaLambda === 0) {
    errors.betaLambda = "must be positive";
  }
  if (form.betaMu === 0) {
    errors.betaMu = "must be positive";
  }
  if (!GAMMA_CHOICES.some((g) => g === form.gamma)) {
    errors.gamma = `must be one of ${GAMMA_CHOICES.join(", ")}`;
  }
  if (!ALPHA_CHOICES.some((a) => a === form.alpha)) {
    errors.alpha = `must be one of ${ALPHA_CHOICES.join(", ")}`;
  }
  if (!Number.isFinite(form.eta)) {
    errors.eta = "must be a number";
  }
  if (!Number.isFinite(form.psi) || form.psi <= 0) {
    errors.psi = "must be positive";
  }
  if (!Number.isInteger(form.runs) || form.runs < 1) {
    errors.runs = "must be a positive integer";
  }
  return errors;
}

export function toScenarioRequest(form: ScenarioForm): ScenarioRequest {
  return {
    beta_lambda: form.betaLambda,
    beta_mu: form.betaMu,
    beta_sigma2: form.betaSigma2,
  };
}

export interface ComparisonRow {
  id: number;
  site: string;
  params: ScenarioRequest;
  beds: Record<string, number>;
  occupancyMean: number;
  occupancyPeak: number;
}

/** Append-only list of submitted scenarios; duplicates are kept as-is. */
export class ComparisonList {
  private next = 1;
  private readonly items: ComparisonRow[] = [];

  add(site: string, params: ScenarioRequest, response: ScenarioResponse): ComparisonRow {
    const row: ComparisonRow = {
      id: this.next++,
      site,
      params: { ...params },
      beds: { ...response.scenario_beds },
      occupancyMean: response.occupancy.scenario_mean,
      occupancyPeak: response.occupancy.scenario_peak,
    };
    this.items.push(row);
    return row;
  }

  get rows(): readonly ComparisonRow[] {
    return this.items;
  }

  /** Serialized form for the export feature (the only cross-session state). */
  toJSON(): string {
    return JSON.stringify(this.items, null, 1);
  }

  /**
   * Append rows from an exported JSON file. Ids are reassigned; malformed
   * entries are rejected wholesale so a bad file cannot half-import.
   */
  importJSON(text: string): number {
    const parsed: unknown = JSON.parse(text);
    if (!Array.isArray(parsed)) {
      throw new Error("scenario file must contain an array of rows");
    }
    const rows = parsed.map((entry) => {
      const row = entry as Partial<ComparisonRow>;
      if (
        typeof row.site !== "string" ||
        typeof row.params !== "object" ||
        typeof row.beds !== "object" ||
        row.beds === null ||
        typeof row.occupancyMean !== "number" ||
        typeof row.occupancyPeak !== "number"
      ) {
        throw new Error("scenario file row is malformed");
      }
      return row as ComparisonRow;
    });
    for (const row of rows) {
      this.items.push({ ...row, id: this.next++ });
    }
    return rows.length;
  }
}

/**
 * Latest-wins matcher for concurrent requests: responses apply only if no
 * newer request has already been issued and applied.
 */
export class LatestWins<T> {
  private issued = 0;
  private appliedId = 0;
  private current: T | null = null;

  issue(): number {
    return ++this.issued;
  }

  apply(requestId: number, value: T): boolean {
    if (requestId <= this.appliedId) {
      return false;
    }
    this.appliedId = requestId;
    this.current = value;
    return true;
  }

  get value(): T | null {
    return this.current;
  }
}

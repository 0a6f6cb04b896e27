// Grid builders for the variance-sensitivity view and the projection summary.
// Both just arrange API-returned numbers; the only derivation is the signed
// bed difference between two returned counts, which is presentation.

import { formatBeds, formatNumber, strategyLabel, strategyOrder } from "./format.js";
import type { ProjectionResponse, ScenarioResponse } from "./types.js";
import { strategyStats } from "./types.js";

export interface SensitivityCell {
  beta: number;
  beds: string;
  delta: string;
}

export interface SensitivityRow {
  strategy: string;
  label: string;
  cells: SensitivityCell[];
}

/**
 * Variance-multiplier grid from one scenario response per beta value.
 * The baseline column (beta = 1) comes from the responses' baseline block.
 */
export function sensitivityGrid(byBeta: Map<number, ScenarioResponse>): SensitivityRow[] {
  const betas = [...byBeta.keys()].sort((a, b) => a - b);
  if (betas.length === 0) {
    return [];
  }
  const first = byBeta.get(betas[0] as number) as ScenarioResponse;
  const strategies = strategyOrder(Object.keys(first.baseline_beds));
  return strategies.map((strategy) => ({
    strategy,
    label: strategyLabel(strategy),
    cells: betas.map((beta) => {
      const response = byBeta.get(beta) as ScenarioResponse;
      const beds = response.scenario_beds[strategy] as number;
      const base = response.baseline_beds[strategy] as number;
      const diff = beds - base;
      return {
        beta,
        beds: formatBeds(beds),
        delta: diff === 0 ? "±0" : diff > 0 ? `+${diff}` : String(diff),
      };
    }),
  }));
}

export interface ProjectionTableRow {
  site: string;
  year: number;
  bAverage: string;
  columns: { strategy: string; label: string; summary: string }[];
}

/** Projection summary rows: median [q25, q75] and mean (sd) per strategy. */
export function projectionTable(response: ProjectionResponse): ProjectionTableRow[] {
  return response.rows.map((row) => {
    const stats = strategyStats(row);
    const keys = strategyOrder([...stats.keys()]);
    return {
      site: row.site_id,
      year: row.year,
      bAverage: formatBeds(row.b_average),
      columns: keys.map((strategy) => {
        const s = stats.get(strategy)!;
        return {
          strategy,
          label: strategyLabel(strategy),
          summary:
            `${formatNumber(s.median, 0)} [${formatNumber(s.q25, 0)}, ${formatNumber(s.q75, 0)}] · ` +
            `${formatNumber(s.mean, 1)} (${formatNumber(s.sd, 1)})`,
        };
      }),
    };
  });
}

export function sensitivityHtml(rows: SensitivityRow[]): string {
  if (rows.length === 0) {
    return "<p class='empty'>No sensitivity data yet.</p>";
  }
  const betas = rows[0]!.cells.map((c) => c.beta);
  const head = `<tr><th>Strategy</th>${betas.map((b) => `<th>β=${b}</th>`).join("")}</tr>`;
  const body = rows
    .map(
      (row) =>
        `<tr data-strategy="${row.strategy}"><td>${row.label}</td>` +
        row.cells.map((c) => `<td>${c.beds} <span class="delta">${c.delta}</span></td>`).join("") +
        "</tr>",
    )
    .join("");
  return `<table class="sensitivity"><thead>${head}</thead><tbody>${body}</tbody></table>`;
}

export function projectionHtml(rows: ProjectionTableRow[]): string {
  if (rows.length === 0) {
    return "<p class='empty'>No projection yet.</p>";
  }
  const strategies = rows[0]!.columns;
  const head =
    `<tr><th>Site</th><th>Year</th><th>${strategyLabel("b_average")}</th>` +
    strategies.map((c) => `<th>${c.label}</th>`).join("") +
    "</tr>";
  const body = rows
    .map(
      (row) =>
        `<tr><td>${row.site}</td><td>${row.year}</td><td>${row.bAverage}</td>` +
        row.columns.map((c) => `<td>${c.summary}</td>`).join("") +
        "</tr>",
    )
    .join("");
  return `<table class="projection"><thead>${head}</thead><tbody>${body}</tbody></table>`;
}

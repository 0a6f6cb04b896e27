// Dashboard wiring: fetch the snapshot, keep the form state, render cards,
// chart, sensitivity grid, projection table, and the comparison list.

import { ApiClient, ApiError } from "./api.js";
import { bedCards, cardsHtml } from "./cards.js";
import { occupancyChartSvg } from "./chart.js";
import { formatNumber } from "./format.js";
import {
  ALPHA_CHOICES,
  ComparisonList,
  defaultForm,
  GAMMA_CHOICES,
  LatestWins,
  toScenarioRequest,
  validateForm,
  type ScenarioForm,
} from "./state.js";
import { projectionHtml, projectionTable, sensitivityGrid, sensitivityHtml } from "./tables.js";
import type { ScenarioResponse, SiteSummary } from "./types.js";

const SENSITIVITY_BETAS = [0, 0.2, 0.5, 0.8, 1.2, 1.5, 1.8];

const api = new ApiClient("");
const comparisons = new ComparisonList();
const preview = new LatestWins<ScenarioResponse>();

let sites: SiteSummary[] = [];
let form: ScenarioForm = defaultForm("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function currentSite(): SiteSummary | undefined {
  return sites.find((s) => s.site_id === form.site);
}

function banner(message: string | null): void {
  const node = el<HTMLDivElement>("banner");
  node.textContent = message ?? "";
  node.style.display = message ? "block" : "none";
}

function inlineError(field: string, message: string | null): void {
  const node = document.querySelector(`[data-error-for="${field}"]`);
  if (node) {
    node.textContent = message ?? "";
  }
}

function renderSiteControls(): void {
  const site = currentSite();
  const sigma = el<HTMLInputElement>("beta-sigma2");
  const hint = el<HTMLSpanElement>("sigma-hint");
  const lognormal = site?.family === "lognormal";
  sigma.disabled = !lognormal;
  sigma.title = lognormal
    ? ""
    : `LOS variance scaling needs a lognormal fit; ${site?.site_id ?? "site"} is ${site?.family ?? "unknown"}`;
  hint.textContent = sigma.title;
  if (!lognormal) {
    form.betaSigma2 = 1;
    sigma.value = "1";
    el<HTMLSpanElement>("beta-sigma2-value").textContent = "1.00";
  }
}

function renderBaseline(): void {
  const site = currentSite();
  if (!site) {
    return;
  }
  el<HTMLDivElement>("cards").innerHTML = cardsHtml(bedCards(site.beds));
  el<HTMLDivElement>("meta").textContent =
    `${site.site_id}: ${site.family}` +
    (site.kappa !== null ? ` (κ=${formatNumber(site.kappa, 2)})` : "") +
    `, horizon ${site.s_max} days, mean load ${formatNumber(site.rho_bar, 1)} beds`;
  void renderChart();
}

async function renderChart(): Promise<void> {
  const site = currentSite();
  if (!site) {
    return;
  }
  try {
    const occupancy = await api.getOccupancy(site.site_id);
    const planKey = Object.keys(site.beds).find((k) => k.includes(`g${form.gamma}`) && k.includes(`a${form.alpha}`));
    const capacity = planKey ? (site.beds[planKey] as number) : null;
    el<HTMLDivElement>("chart").innerHTML = occupancyChartSvg(occupancy.rho, {
      capacity,
      title: `${site.site_id} expected occupancy`,
    });
    banner(null);
  } catch (err) {
    banner(`Occupancy unavailable: ${describe(err)}`);
  }
}

async function previewScenario(): Promise<void> {
  const site = currentSite();
  if (!site) {
    return;
  }
  const errors = validateForm(form);
  for (const field of ["betaLambda", "betaMu", "betaSigma2"] as const) {
    inlineError(field, errors[field] ?? null);
  }
  if (Object.keys(errors).length > 0) {
    return;
  }
  const requestId = preview.issue();
  try {
    const response = await api.postScenario(site.site_id, toScenarioRequest(form));
    if (!preview.apply(requestId, response)) {
      return; // a newer preview already landed
    }
    el<HTMLDivElement>("cards").innerHTML = cardsHtml(
      bedCards(response.scenario_beds, response.baseline_beds),
    );
    el<HTMLDivElement>("scenario-occupancy").textContent =
      `mean ${formatNumber(response.occupancy.scenario_mean, 1)} beds ` +
      `(baseline ${formatNumber(response.occupancy.baseline_mean, 1)}), ` +
      `peak ${formatNumber(response.occupancy.scenario_peak, 1)} ` +
      `(baseline ${formatNumber(response.occupancy.baseline_peak, 1)})`;
    banner(null);
  } catch (err) {
    if (err instanceof ApiError && err.status === 422) {
      inlineError("betaSigma2", String(err.detail));
    } else {
      banner(`Scenario failed: ${describe(err)}`);
    }
  }
}

async function submitScenario(): Promise<void> {
  const site = currentSite();
  if (!site) {
    return;
  }
  const errors = validateForm(form);
  if (Object.keys(errors).length > 0) {
    return;
  }
  const params = toScenarioRequest(form);
  try {
    const response = await api.postScenario(site.site_id, params);
    comparisons.add(site.site_id, params, response);
    renderComparisons();
  } catch (err) {
    if (err instanceof ApiError && err.status === 422) {
      inlineError("betaSigma2", String(err.detail));
      return; // no row on rejection
    }
    banner(`Scenario failed: ${describe(err)}`);
  }
}

function renderComparisons(): void {
  const rows = comparisons.rows;
  if (rows.length === 0) {
    el<HTMLDivElement>("comparisons").innerHTML = "<p class='empty'>No saved scenarios.</p>";
    return;
  }
  const strategies = Object.keys(rows[0]!.beds);
  const head =
    "<tr><th>#</th><th>Site</th><th>βλ</th><th>βμ</th><th>βσ²</th>" +
    strategies.map((s) => `<th>${s}</th>`).join("") +
    "<th>Mean occ.</th></tr>";
  const body = rows
    .map(
      (row) =>
        `<tr data-row-id="${row.id}"><td>${row.id}</td><td>${row.site}</td>` +
        `<td>${row.params.beta_lambda}</td><td>${row.params.beta_mu}</td><td>${row.params.beta_sigma2}</td>` +
        strategies.map((s) => `<td>${row.beds[s]}</td>`).join("") +
        `<td>${formatNumber(row.occupancyMean, 1)}</td></tr>`,
    )
    .join("");
  el<HTMLDivElement>("comparisons").innerHTML =
    `<table><thead>${head}</thead><tbody>${body}</tbody></table>`;
}

async function runSensitivity(): Promise<void> {
  const site = currentSite();
  if (!site || site.family !== "lognormal") {
    el<HTMLDivElement>("sensitivity").innerHTML =
      "<p class='empty'>Variance sensitivity needs a lognormal site.</p>";
    return;
  }
  try {
    const responses = await Promise.all(
      SENSITIVITY_BETAS.map((beta) => api.postScenario(site.site_id, { beta_sigma2: beta })),
    );
    const byBeta = new Map(SENSITIVITY_BETAS.map((beta, i) => [beta, responses[i]!]));
    el<HTMLDivElement>("sensitivity").innerHTML = sensitivityHtml(sensitivityGrid(byBeta));
  } catch (err) {
    banner(`Sensitivity failed: ${describe(err)}`);
  }
}

async function runProjection(): Promise<void> {
  try {
    const result = await api.runProjection({
      eta: form.eta,
      psi: form.psi,
      runs: form.runs,
    });
    el<HTMLDivElement>("projection").innerHTML = projectionHtml(projectionTable(result));
  } catch (err) {
    banner(`Projection failed: ${describe(err)}`);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.status} ${JSON.stringify(err.detail)}`;
  }
  return err instanceof Error ? err.message : String(err);
}

function bindSlider(id: string, field: "betaLambda" | "betaMu" | "betaSigma2"): void {
  const slider = el<HTMLInputElement>(id);
  slider.addEventListener("input", () => {
    form[field] = Number(slider.value);
    el<HTMLSpanElement>(`${id}-value`).textContent = Number(slider.value).toFixed(2);
    void previewScenario();
  });
}

export async function start(): Promise<void> {
  try {
    const payload = await api.getSites();
    sites = payload.sites;
  } catch (err) {
    banner(`API unreachable: ${describe(err)}`);
    return;
  }
  if (sites.length === 0) {
    banner("Snapshot has no sites.");
    return;
  }
  form = defaultForm(sites[0]!.site_id);

  const picker = el<HTMLSelectElement>("site");
  picker.innerHTML = sites
    .map((s) => `<option value="${s.site_id}">${s.site_id}</option>`)
    .join("");
  picker.addEventListener("change", () => {
    form = defaultForm(picker.value);
    renderSiteControls();
    renderBaseline();
  });

  bindSlider("beta-lambda", "betaLambda");
  bindSlider("beta-mu", "betaMu");
  bindSlider("beta-sigma2", "betaSigma2");

  const gamma = el<HTMLSelectElement>("gamma");
  gamma.innerHTML = GAMMA_CHOICES.map((g) => `<option value="${g}">${g}</option>`).join("");
  gamma.value = String(form.gamma);
  gamma.addEventListener("change", () => {
    form.gamma = Number(gamma.value);
    void renderChart();
  });
  const alpha = el<HTMLSelectElement>("alpha");
  alpha.innerHTML = ALPHA_CHOICES.map((a) => `<option value="${a}">${a}</option>`).join("");
  alpha.value = String(form.alpha);
  alpha.addEventListener("change", () => {
    form.alpha = Number(alpha.value);
    void renderChart();
  });

  for (const [id, field] of [
    ["eta", "eta"],
    ["psi", "psi"],
    ["runs", "runs"],
  ] as const) {
    const input = el<HTMLInputElement>(id);
    input.value = String(form[field]);
    input.addEventListener("change", () => {
      form[field] = Number(input.value);
      inlineError(field, validateForm(form)[field] ?? null);
    });
  }

  el<HTMLButtonElement>("save-scenario").addEventListener("click", () => void submitScenario());
  el<HTMLButtonElement>("run-sensitivity").addEventListener("click", () => void runSensitivity());
  el<HTMLButtonElement>("run-projection").addEventListener("click", () => void runProjection());
  el<HTMLButtonElement>("export-scenarios").addEventListener("click", () => {
    const blob = new Blob([comparisons.toJSON()], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "scenarios.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });
  const importInput = el<HTMLInputElement>("import-scenarios");
  importInput.addEventListener("change", async () => {
    const file = importInput.files?.[0];
    if (!file) {
      return;
    }
    try {
      comparisons.importJSON(await file.text());
      renderComparisons();
      banner(null);
    } catch (err) {
      banner(`Import failed: ${describe(err)}`);
    } finally {
      importInput.value = "";
    }
  });

  renderSiteControls();
  renderBaseline();
  renderComparisons();
}

if (typeof document !== "undefined" && document.getElementById("site")) {
  void start();
}

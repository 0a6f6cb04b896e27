"""Births-driven forward projection of admissions, occupancy, and bed needs.

Future system-wide admissions scale a recent-history baseline by projected
births (with an elasticity) and an annual drift factor.  Site totals follow
historical shares; within-year shape comes from resampling historical daily
arrival profiles, and LOS tracks are independently resampled from historical
years.  Repeating this R times gives a distribution of bed requirements per
site, year, and strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import planning
from .errors import EmptyRuns, MissingBirths, MissingHistory, ZeroYearTotal
from .losfit import LosFamily, LosModel
from .occupancy import expected_occupancy

DAYS_PER_YEAR = 365
DEFAULT_RUNS = 300
DEFAULT_ALPHAS = (0.05, 0.01)


@dataclass(frozen=True)
class YearHistory:
    """One site-year of history: observed totals plus smoothed daily tracks."""

    admissions: float
    lambda_daily: np.ndarray
    mu_daily: np.ndarray
    sigma2_daily: np.ndarray
    mean_los: float

    def __post_init__(self):
        for name in ("lambda_daily", "mu_daily", "sigma2_daily"):
            arr = getattr(self, name)
            if len(arr) != DAYS_PER_YEAR:
                raise ValueError(f"{name} must have {DAYS_PER_YEAR} entries, got {len(arr)}")


@dataclass
class SiteHistory:
    """A site's annual records and its fixed LOS model for the horizon."""

    site_id: str
    years: dict[int, YearHistory]
    family: LosFamily
    kappa: float | None
    s_max: int


@dataclass(frozen=True)
class ProjectionConfig:
    y_future: tuple[int, int]
    y_ref_omega: tuple[int, ...]
    y_ref_nu: tuple[int, ...]
    births: dict[int, float]
    eta: float = 1.0
    psi: float = 1.0
    runs: int = DEFAULT_RUNS
    seed: int = 0
    alphas: tuple[float, ...] = DEFAULT_ALPHAS

    def __post_init__(self):
        if not self.y_ref_omega or not self.y_ref_nu:
            raise MissingHistory("reference year sets must be non-empty")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        y_min, y_max = self.y_future
        missing = [y for y in range(y_min, y_max + 1) if y not in self.births]
        if missing:
            raise MissingBirths(f"no birth projection for years {missing}")

    @property
    def future_years(self) -> list[int]:
        return list(range(self.y_future[0], self.y_future[1] + 1))


def _check_reference_years(history: dict[str, SiteHistory], years) -> None:
    for site in history.values():
        missing = [y for y in years if y not in site.years]
        if missing:
            raise MissingHistory(f"site {site.site_id} lacks reference years {missing}")


def project_admissions(config: ProjectionConfig, history: dict[str, SiteHistory]) -> dict[int, float]:
    """Projected system-wide admissions per future year.

    The baseline is the mean annual total over the recent reference years;
    each future year scales it by the births ratio to the base year raised to
    the elasticity, times the drift factor compounded from the base year.
    """
    _check_reference_years(history, config.y_ref_omega)
    totals = {
        y: sum(site.years[y].admissions for site in history.values())
        for y in config.y_ref_omega
    }
    a_base = sum(totals.values()) / len(totals)
    y0 = config.y_future[0]
    return {
        y: a_base * (config.births[y] / config.births[y0]) ** config.eta * config.psi ** (y - y0)
        for y in config.future_years
    }


def site_shares(history: dict[str, SiteHistory], y_ref_omega) -> dict[str, float]:
    """Average historical share of system admissions per site; sums to one."""
    _check_reference_years(history, y_ref_omega)
    shares = {site_id: 0.0 for site_id in history}
    for y in y_ref_omega:
        total = sum(site.years[y].admissions for site in history.values())
        if total <= 0:
            raise ZeroYearTotal(f"no admissions anywhere in reference year {y}")
        for site_id, site in history.items():
            shares[site_id] += site.years[y].admissions / total
    return {site_id: s / len(y_ref_omega) for site_id, s in shares.items()}


def resample_profile(
    site: SiteHistory,
    y_ref_nu,
    rng: np.random.Generator,
) -> tuple[int, np.ndarray]:
    """Draw a historical year and normalize its daily arrivals to a profile.

    A year with zero total arrivals degenerates to the uniform profile.
    """
    years = list(y_ref_nu)
    h = years[int(rng.integers(len(years)))]
    lam = site.years[h].lambda_daily
    total = float(lam.sum())
    if total > 0:
        return h, lam / total
    return h, np.full(DAYS_PER_YEAR, 1.0 / DAYS_PER_YEAR)


def _pooled_mean_los(site: SiteHistory, years) -> float:
    weights = np.array([site.years[y].admissions for y in years], dtype=float)
    means = np.array([site.years[y].mean_los for y in years], dtype=float)
    if weights.sum() <= 0:
        return float(means.mean())
    return float((weights * means).sum() / weights.sum())


@dataclass
class SiteYearRun:
    """One run's projected inputs and plan for a (site, year) pair."""

    site_id: str
    year: int
    arrivals_year: int
    los_year: int
    lambda_hat: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    beds: dict[str, int] = field(default_factory=dict)


def b_average_projected(
    config: ProjectionConfig,
    history: dict[str, SiteHistory],
) -> dict[tuple[str, int], int]:
    """Deterministic average-based beds per (site, year).

    Uses the projected annual admissions spread over the year and the pooled
    historical mean LOS; independent of the resampling runs.
    """
    a_hat = project_admissions(config, history)
    shares = site_shares(history, config.y_ref_omega)
    out = {}
    for site_id, site in history.items():
        e_s = _pooled_mean_los(site, config.y_ref_nu)
        for y in config.future_years:
            lam_bar = shares[site_id] * a_hat[y] / DAYS_PER_YEAR
            out[(site_id, y)] = planning.b_average(lam_bar, e_s)
    return out


def project_run(
    config: ProjectionConfig,
    history: dict[str, SiteHistory],
    run_index: int,
) -> list[SiteYearRun]:
    """One Monte Carlo projection run across all sites and future years.

    Each site gets a generator derived from (seed, run index, site position),
    so runs and sites can be computed in any order with identical results.
    Arrival profiles and LOS tracks are resampled independently; the arrival
    profile is scaled so its annual total matches the projected admissions
    exactly.
    """
    _check_reference_years(history, config.y_ref_nu)
    a_hat = project_admissions(config, history)
    shares = site_shares(history, config.y_ref_omega)
    results = []
    for site_pos, (site_id, site) in enumerate(history.items()):
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, run_index, site_pos)))
        for y in config.future_years:
            h_arr, profile = resample_profile(site, config.y_ref_nu, rng)
            h_los = list(config.y_ref_nu)[int(rng.integers(len(config.y_ref_nu)))]
            lam_hat = shares[site_id] * a_hat[y] * profile
            ref = site.years[h_los]
            model = LosModel(
                family=site.family,
                kappa=site.kappa,
                mu_t=ref.mu_daily,
                sigma2_t=ref.sigma2_daily,
                s_max=site.s_max,
                rmse=0.0,
            )
            series = expected_occupancy(lam_hat, model)
            beds = {"b_max": planning.b_max(series)}
            for alpha in config.alphas:
                beds[f"b_{alpha:g}"] = planning.b_overflow(series, 1.0, alpha)
            results.append(
                SiteYearRun(site_id, y, h_arr, h_los, lam_hat, series.rho, beds)
            )
    return results


@dataclass
class StrategySummary:
    median: float
    q25: float
    q75: float
    mean: float
    sd: float


@dataclass
class ProjectionSummary:
    """Per (site, year): deterministic average beds and run statistics."""

    b_average: dict[tuple[str, int], int]
    strategies: dict[tuple[str, int], dict[str, StrategySummary]]
    runs: int


def summarize_runs(run_results: list[list[SiteYearRun]]) -> dict[tuple[str, int], dict[str, StrategySummary]]:
    """Order statistics of bed counts across runs, per site-year-strategy.

    Quantiles interpolate linearly; the standard deviation is the population
    one over the runs.
    """
    if not run_results:
        raise EmptyRuns("no projection runs")
    collected: dict[tuple[str, int], dict[str, list[int]]] = {}
    for run in run_results:
        for item in run:
            cell = collected.setdefault((item.site_id, item.year), {})
            for name, b in item.beds.items():
                cell.setdefault(name, []).append(b)
    out = {}
    for key, cell in collected.items():
        out[key] = {}
        for name, values in cell.items():
            v = np.asarray(values, dtype=float)
            out[key][name] = StrategySummary(
                median=float(np.percentile(v, 50)),
                q25=float(np.percentile(v, 25)),
                q75=float(np.percentile(v, 75)),
                mean=float(v.mean()),
                sd=float(v.std()),
            )
    return out


def project(config: ProjectionConfig, history: dict[str, SiteHistory]) -> ProjectionSummary:
    """Full projection: R runs plus deterministic averages, summarized."""
    runs = [project_run(config, history, r) for r in range(config.runs)]
    return ProjectionSummary(
        b_average=b_average_projected(config, history),
        strategies=summarize_runs(runs),
        runs=config.runs,
    )

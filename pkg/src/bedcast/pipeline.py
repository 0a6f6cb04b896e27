"""Stage orchestration and the on-disk snapshot consumed by the CLI and API.

Each stage reads only the artifacts of earlier stages from the output
directory and writes its own, so a run is reproducible file by file:

    records.csv                      normalized admissions (ingest)
    sites/<id>/series.csv            daily counts, mean LOS, census (ingest)
    sites/<id>/meta.json             raw averages and window (ingest)
    sites/<id>/stl.json              chosen decomposition configs (decompose)
    sites/<id>/decomp_*.csv          trend/seasonal/residual series (decompose)
    sites/<id>/tracks.csv            lambda, mu, sigma2 per day (decompose)
    sites/<id>/model.json            selected LOS family and shape (fit)
    sites/<id>/survival.csv          empirical vs fitted tails (fit)
    sites/<id>/occupancy.csv         rho, rho_bar, delta per day (occupancy)
    sites/<id>/plan.json             bed counts and utilization (plan)
    sites/<id>/diagnostics.json      arrival-process checks (diagnose)
    summary.csv / summary.json       cross-site tables (plan)
    manifest.json                    config echo, seed, per-stage checksums

All writes are deterministic: no timestamps, sorted keys, repr floats.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import jsonschema

from . import decomp, diagnostics, ingest, losfit, planning, projection, scenario
from .errors import BedcastError, SchemaError
from .losfit import LosFamily, LosModel
from .occupancy import OccupancySeries, expected_occupancy

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "columns": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "site_id": {"type": "string"},
                "admit_date": {"type": "string"},
                "los_days": {"type": "string"},
            },
        },
        "gamma": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "alphas": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "minItems": 1,
        },
        "eta": {"type": "number"},
        "psi": {"type": "number", "exclusiveMinimum": 0},
        "runs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "period": {"type": "integer", "minimum": 2},
        "actual_beds": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        "births": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
        "reference_years": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega": {"type": "array", "items": {"type": "integer"}},
                "nu": {"type": "array", "items": {"type": "integer"}},
            },
        },
        "projection_years": {
            "type": "array",
            "items": {"type": "integer"},
            "minItems": 2,
            "maxItems": 2,
        },
    },
}

DEFAULTS = {
    "columns": dict(ingest.DEFAULT_SCHEMA),
    "gamma": 1.0,
    "alphas": [0.05, 0.01],
    "eta": 1.0,
    "psi": 1.0,
    "runs": 300,
    "seed": 0,
    "period": 7,
    "actual_beds": {},
    "births": {},
    "reference_years": {},
}


@dataclass
class Config:
    columns: dict
    gamma: float
    alphas: list[float]
    eta: float
    psi: float
    runs: int
    seed: int
    period: int
    actual_beds: dict[str, int]
    births: dict[int, float]
    reference_years: dict
    projection_years: tuple[int, int] | None = None

    @property
    def overflow_targets(self) -> list[tuple[float, float]]:
        return [(self.gamma, a) for a in self.alphas]


def load_config(source) -> Config:
    """Resolve a config mapping or JSON file against schema and defaults."""
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = source
    else:
        with open(source) as fh:
            raw = json.load(fh)
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise SchemaError(pointer, err.message) from None
    merged = {**DEFAULTS, **raw}
    births = {int(k): float(v) for k, v in merged["births"].items()}
    years = merged.get("projection_years")
    return Config(
        columns={**ingest.DEFAULT_SCHEMA, **merged["columns"]},
        gamma=float(merged["gamma"]),
        alphas=[float(a) for a in merged["alphas"]],
        eta=float(merged["eta"]),
        psi=float(merged["psi"]),
        runs=int(merged["runs"]),
        seed=int(merged["seed"]),
        period=int(merged["period"]),
        actual_beds=dict(merged["actual_beds"]),
        births=births,
        reference_years=merged["reference_years"],
        projection_years=(int(years[0]), int(years[1])) if years else None,
    )


# --- deterministic file helpers ---------------------------------------------


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, sort_keys=True, indent=1) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    _write_text(path, buf.getvalue())


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def update_manifest(
    out: Path,
    stage: str,
    files: list[Path],
    config: Config,
    input_path=None,
) -> None:
    manifest_path = out / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {
        "seed": config.seed,
        "out": str(out),
        "config": {
            "gamma": config.gamma,
            "alphas": config.alphas,
            "eta": config.eta,
            "psi": config.psi,
            "runs": config.runs,
            "period": config.period,
        },
        "stages": {},
    }
    if input_path is not None:
        manifest["input"] = str(input_path)
    manifest["stages"][stage] = {
        str(f.relative_to(out)): _sha256(f) for f in sorted(files)
    }
    digest = hashlib.sha256()
    for stage_files in sorted(manifest["stages"].items()):
        digest.update(json.dumps(stage_files, sort_keys=True).encode())
    manifest["snapshot_id"] = digest.hexdigest()[:16]
    write_json(manifest_path, manifest)


def _site_dir(out: Path, site_id: str) -> Path:
    return out / "sites" / site_id


def site_ids(out: Path) -> list[str]:
    root = out / "sites"
    if not root.is_dir():
        raise BedcastError(f"no ingest artifacts under {out}")
    return sorted(p.name for p in root.iterdir() if p.is_dir())


def _select_sites(out: Path, site: str | None) -> list[str]:
    ids = site_ids(out)
    if site is None:
        return ids
    if site not in ids:
        raise BedcastError(f"unknown site {site!r}; have {ids}")
    return [site]


# --- ingest stage -------------------------------------------------------------


def stage_ingest(input_path, out: Path, config: Config) -> list[str]:
    """Parse admissions, build per-site series, persist normalized records."""
    out = Path(out)
    with open(input_path, newline="") as fh:
        records = ingest.parse_admissions(fh, config.columns)
    if not records:
        raise BedcastError("no admission records in input")
    window = ingest.records_window(records)
    sites = ingest.sites_in(records)

    files = [out / "records.csv"]
    write_csv(
        out / "records.csv",
        ["site_id", "admit_date", "los_days"],
        [[r.site_id, r.admit_date.isoformat(), _fmt(r.los_days)] for r in records],
    )
    for site in sites:
        series = ingest.fill_gaps(ingest.build_daily_series(records, site, window))
        sdir = _site_dir(out, site)
        sdir.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        series.to_csv(buf)
        _write_text(sdir / "series.csv", buf.getvalue())
        site_los = [r.los_days for r in records if r.site_id == site]
        meta = {
            "site_id": site,
            "window": [window[0].isoformat(), window[1].isoformat()],
            "n_records": len(site_los),
            "lambda_bar": len(site_los) / len(series),
            "mean_los": float(np.mean(site_los)),
            "gap_days_filled": int(series.filled.sum()),
        }
        write_json(sdir / "meta.json", meta)
        files += [sdir / "series.csv", sdir / "meta.json"]
    update_manifest(out, "ingest", files, config, input_path=input_path)
    return sites


def load_series(out: Path, site: str) -> ingest.DailySiteSeries:
    with open(_site_dir(out, site) / "series.csv", newline="") as fh:
        return ingest.DailySiteSeries.from_csv(fh, site)


def load_meta(out: Path, site: str) -> dict:
    return json.loads((_site_dir(out, site) / "meta.json").read_text())


def load_records(out: Path) -> list[ingest.AdmissionRecord]:
    with open(out / "records.csv", newline="") as fh:
        return ingest.parse_admissions(fh)


# --- decompose stage -----------------------------------------------------------


def _decomp_rows(start: date, dec: decomp.Decomposition):
    for i in range(len(dec.trend)):
        yield [
            (start + timedelta(days=i)).isoformat(),
            _fmt(dec.trend[i]),
            _fmt(dec.seasonal[i]),
            _fmt(dec.residual[i]),
        ]


def stage_decompose(out: Path, config: Config, site: str | None = None) -> None:
    """Grid-search decompositions for arrivals and mean LOS; emit tracks."""
    out = Path(out)
    files = []
    for sid in _select_sites(out, site):
        series = load_series(out, sid)
        adm_cfg, adm_dec = decomp.grid_search(series.admit_count.astype(float), config.period)
        los_cfg, los_dec = decomp.grid_search(series.mean_los, config.period)
        var_track = decomp.rolling_variance(los_dec.residual)

        lam = decomp.positive_trend(adm_dec.trend)
        mu = decomp.positive_trend(los_dec.trend)
        sdir = _site_dir(out, sid)
        write_json(
            sdir / "stl.json",
            {
                "admissions": vars(adm_cfg) | {"residual_std": adm_dec.residual_std},
                "mean_los": vars(los_cfg) | {"residual_std": los_dec.residual_std},
                "rolling_window": var_track.window,
            },
        )
        header = ["date", "trend", "seasonal", "residual"]
        write_csv(sdir / "decomp_admissions.csv", header, _decomp_rows(series.start, adm_dec))
        write_csv(sdir / "decomp_los.csv", header, _decomp_rows(series.start, los_dec))
        write_csv(
            sdir / "tracks.csv",
            ["date", "lambda", "mu", "sigma2"],
            [
                [d.isoformat(), _fmt(lam[i]), _fmt(mu[i]), _fmt(var_track.sigma2[i])]
                for i, d in enumerate(series.dates)
            ],
        )
        files += [sdir / "stl.json", sdir / "decomp_admissions.csv",
                  sdir / "decomp_los.csv", sdir / "tracks.csv"]
    update_manifest(out, "decompose", files, config)


def load_tracks(out: Path, site: str) -> tuple[date, np.ndarray, np.ndarray, np.ndarray]:
    with open(_site_dir(out, site) / "tracks.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    start = date.fromisoformat(rows[0]["date"])
    lam = np.array([float(r["lambda"]) for r in rows])
    mu = np.array([float(r["mu"]) for r in rows])
    sigma2 = np.array([float(r["sigma2"]) for r in rows])
    return start, lam, mu, sigma2


# --- fit stage ------------------------------------------------------------------


def _quarter_windows(records: list[ingest.AdmissionRecord]) -> list[np.ndarray]:
    buckets: dict[tuple[int, int], list[float]] = {}
    for r in records:
        buckets.setdefault((r.admit_date.year, (r.admit_date.month - 1) // 3), []).append(r.los_days)
    return [np.asarray(v) for _, v in sorted(buckets.items())]


def _stability_cv(records: list[ingest.AdmissionRecord], family: LosFamily) -> float | None:
    if family not in losfit.SHAPE_FAMILIES:
        return None
    windows = _quarter_windows(records)
    windows = [losfit.shift_nonpositive(w)[0] for w in windows]
    try:
        return losfit.shape_stability(windows, family)
    except BedcastError:
        return None


def stage_fit(out: Path, config: Config, site: str | None = None) -> None:
    """Fit LOS families per site, select by survival RMSE, export curves."""
    out = Path(out)
    records = load_records(out)
    files = []
    for sid in _select_sites(out, site):
        site_records = [r for r in records if r.site_id == sid]
        samples = np.array([r.los_days for r in site_records])
        _, _, mu, sigma2 = load_tracks(out, sid)
        rows = losfit.compare_families(losfit.shift_nonpositive(samples)[0])
        best = losfit.best_family(rows)
        model = losfit.LosModel(
            family=best.fit.family,
            kappa=best.fit.kappa,
            mu_t=mu,
            sigma2_t=sigma2,
            s_max=max(1, int(math.ceil(best.p99))),
            rmse=best.rmse,
            kappa_cv=_stability_cv(site_records, best.fit.family),
        )
        sdir = _site_dir(out, sid)
        write_json(sdir / "model.json", model_payload(model, rows))

        km = losfit.km_survival(losfit.shift_nonpositive(samples)[0])
        horizon = len(km.prob) - 1
        grid = np.arange(horizon + 1)
        curves = {row.fit.family.value: losfit.marginal_survival(row.fit, grid) for row in rows}
        header = ["u", "empirical"] + [f.value for f in losfit.FAMILIES if f.value in curves]
        write_csv(
            sdir / "survival.csv",
            header,
            [
                [int(u), _fmt(km.prob[u])] + [_fmt(curves[name][u]) for name in header[2:]]
                for u in grid
            ],
        )
        files += [sdir / "model.json", sdir / "survival.csv"]
    update_manifest(out, "fit", files, config)


def model_payload(model: LosModel, rows: list[losfit.FamilyFit] | None = None) -> dict:
    payload = {
        "family": model.family.value,
        "kappa": model.kappa,
        "s_max": model.s_max,
        "rmse": model.rmse,
        "kappa_cv": model.kappa_cv,
    }
    if rows is not None:
        payload["comparison"] = {
            row.fit.family.value: {
                "rmse": row.rmse,
                "p99": row.p99,
                "params": row.fit.params,
                "grad_norm": row.fit.grad_norm,
                "iterations": row.fit.iterations,
            }
            for row in rows
        }
    return payload


def load_model(out: Path, site: str) -> LosModel:
    payload = json.loads((_site_dir(out, site) / "model.json").read_text())
    _, _, mu, sigma2 = load_tracks(out, site)
    return LosModel(
        family=LosFamily(payload["family"]),
        kappa=payload["kappa"],
        mu_t=mu,
        sigma2_t=sigma2,
        s_max=int(payload["s_max"]),
        rmse=float(payload["rmse"]),
        kappa_cv=payload.get("kappa_cv"),
    )


# --- occupancy stage --------------------------------------------------------------


def stage_occupancy(out: Path, config: Config, site: str | None = None) -> None:
    out = Path(out)
    files = []
    for sid in _select_sites(out, site):
        start, lam, _, _ = load_tracks(out, sid)
        model = load_model(out, sid)
        series = expected_occupancy(lam, model)
        sdir = _site_dir(out, sid)
        write_csv(
            sdir / "occupancy.csv",
            ["date", "rho", "rho_bar", "delta"],
            [
                [
                    (start + timedelta(days=i)).isoformat(),
                    _fmt(series.rho[i]),
                    _fmt(series.rho_bar),
                    _fmt(series.delta[i]),
                ]
                for i in range(len(series))
            ],
        )
        files.append(sdir / "occupancy.csv")
    update_manifest(out, "occupancy", files, config)


def load_occupancy(out: Path, site: str) -> tuple[date, OccupancySeries]:
    with open(_site_dir(out, site) / "occupancy.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    start = date.fromisoformat(rows[0]["date"])
    rho = np.array([float(r["rho"]) for r in rows])
    rho_bar = float(rows[0]["rho_bar"])
    return start, OccupancySeries(rho, rho_bar)


# --- plan stage ----------------------------------------------------------------


def _stats_payload(stats: planning.UtilizationStats) -> dict:
    return {k: v for k, v in vars(stats).items()}


def compute_plan(out: Path, config: Config, sid: str) -> dict:
    meta = load_meta(out, sid)
    series = load_series(out, sid)
    _, occ = load_occupancy(out, sid)
    beds: dict[str, int] = {
        "b_average": planning.b_average(meta["lambda_bar"], meta["mean_los"]),
        "b_max": planning.b_max(occ),
    }
    for gamma, alpha in config.overflow_targets:
        beds[overflow_key(gamma, alpha)] = planning.b_overflow(occ, gamma, alpha)
    capacities = dict(beds)
    actual = config.actual_beds.get(sid)
    if actual:
        capacities["actual"] = actual
    payload = {
        "site_id": sid,
        "beds": beds,
        "peak_product_heuristic": planning.peak_product_heuristic(
            series.admit_count, series.mean_los
        ),
        "rho_bar": occ.rho_bar,
        "utilization": {
            name: _stats_payload(planning.utilization_stats(series.census, cap))
            for name, cap in sorted(capacities.items())
        },
        "weights": meta["n_records"],
    }
    return payload


def overflow_key(gamma: float, alpha: float) -> str:
    return f"b_overflow_g{gamma:g}_a{alpha:g}"


def strategy_columns(keys) -> list[str]:
    """Canonical table order: average, overflow targets loosest first, peak."""
    def rank(key: str):
        if key == "b_average":
            return (0, 0.0, key)
        if key == "b_max":
            return (2, 0.0, key)
        alpha = 0.0
        if "_a" in key:
            try:
                alpha = -float(key.rsplit("_a", 1)[1])
            except ValueError:
                pass
        return (1, alpha, key)

    return sorted(keys, key=rank)


def stage_plan(out: Path, config: Config, site: str | None = None) -> None:
    out = Path(out)
    files = []
    payloads = []
    for sid in _select_sites(out, site):
        payload = compute_plan(out, config, sid)
        sdir = _site_dir(out, sid)
        write_json(sdir / "plan.json", payload)
        files.append(sdir / "plan.json")
        payloads.append(payload)

    if site is None and payloads:
        strategies = strategy_columns(payloads[0]["beds"])
        write_csv(
            out / "summary.csv",
            ["site", "actual"] + strategies,
            [
                [p["site_id"], config.actual_beds.get(p["site_id"], "")]
                + [p["beds"][s] for s in strategies]
                for p in payloads
            ],
        )
        aggregates = {}
        for name in payloads[0]["utilization"]:
            pairs = [
                (p["utilization"][name]["mean_pct"], p["weights"])
                for p in payloads
                if name in p["utilization"]
            ]
            mean, sd = planning.weighted_aggregate(pairs)
            aggregates[name] = {"weighted_mean_pct": mean, "weighted_sd_pct": sd}
        write_json(out / "summary.json", {"weighted_utilization": aggregates})
        files += [out / "summary.csv", out / "summary.json"]
    update_manifest(out, "plan", files, config)


# --- scenario stage ---------------------------------------------------------------


def compute_scenario(
    out: Path,
    config: Config,
    sid: str,
    spec: scenario.ScenarioSpec,
) -> dict:
    """Re-plan one site under scaled inputs; shared by CLI and API."""
    _, lam, _, _ = load_tracks(out, sid)
    model = load_model(out, sid)
    lam2, model2 = scenario.apply_scenario(lam, model, spec)
    base = expected_occupancy(lam, model)
    changed = expected_occupancy(lam2, model2)
    beds_base: dict[str, int] = {"b_max": planning.b_max(base)}
    beds_new: dict[str, int] = {"b_max": planning.b_max(changed)}
    for gamma, alpha in config.overflow_targets:
        key = overflow_key(gamma, alpha)
        beds_base[key] = planning.b_overflow(base, gamma, alpha)
        beds_new[key] = planning.b_overflow(changed, gamma, alpha)
    return {
        "site_id": sid,
        "spec": {
            "beta_lambda": spec.beta_lambda,
            "beta_mu": spec.beta_mu,
            "beta_sigma2": spec.beta_sigma2,
            "date_range": list(spec.date_range) if spec.date_range else None,
        },
        "baseline_beds": beds_base,
        "scenario_beds": beds_new,
        "occupancy": {
            "baseline_mean": float(base.rho.mean()),
            "scenario_mean": float(changed.rho.mean()),
            "baseline_peak": float(base.rho.max()),
            "scenario_peak": float(changed.rho.max()),
            "delta": [float(v) for v in (changed.rho - base.rho)],
        },
    }


def stage_scenario(
    out: Path,
    config: Config,
    sid: str,
    spec: scenario.ScenarioSpec,
    sensitivity: bool = False,
) -> dict:
    out = Path(out)
    payload = compute_scenario(out, config, sid, spec)
    sdir = _site_dir(out, sid)
    write_json(sdir / "scenario.json", payload)
    files = [sdir / "scenario.json"]
    if sensitivity:
        _, lam, _, _ = load_tracks(out, sid)
        model = load_model(out, sid)
        table = scenario.variance_sensitivity(lam, model)
        write_csv(
            sdir / "sensitivity.csv",
            ["strategy"] + [f"beta={b:g}" for b in table.betas],
            [
                [name] + [_fmt(table.pct_change[name][b]) for b in table.betas]
                for name in table.strategies
            ],
        )
        files.append(sdir / "sensitivity.csv")
    update_manifest(out, "scenario", files, config)
    return payload


# --- projection stage ----------------------------------------------------------


def _full_years(start: date, n_days: int) -> list[int]:
    end = start + timedelta(days=n_days - 1)
    years = []
    for y in range(start.year, end.year + 1):
        if date(y, 1, 1) >= start and date(y, 12, 31) <= end:
            years.append(y)
    return years


def _year_slice(track_start: date, arr: np.ndarray, year: int, fold_sum: bool) -> np.ndarray:
    lo = (date(year, 1, 1) - track_start).days
    n = (date(year, 12, 31) - date(year, 1, 1)).days + 1
    chunk = arr[lo:lo + n].astype(float)
    if n == 366:
        merged = chunk[:365].copy()
        if fold_sum:
            merged[364] += chunk[365]
        return merged
    return chunk


def build_history(out: Path, config: Config) -> dict[str, projection.SiteHistory]:
    """Assemble per-site annual histories from the fitted artifacts.

    Only complete calendar years inside the study window are usable; leap
    days fold their arrivals into the previous day so every year is 365 long.
    """
    out = Path(out)
    records = load_records(out)
    history = {}
    for sid in site_ids(out):
        start, lam, mu, sigma2 = load_tracks(out, sid)
        model = load_model(out, sid)
        years = {}
        for y in _full_years(start, len(lam)):
            year_records = [
                r for r in records if r.site_id == sid and r.admit_date.year == y
            ]
            los = [r.los_days for r in year_records]
            years[y] = projection.YearHistory(
                admissions=float(len(year_records)),
                lambda_daily=_year_slice(start, lam, y, fold_sum=True),
                mu_daily=_year_slice(start, mu, y, fold_sum=False),
                sigma2_daily=_year_slice(start, sigma2, y, fold_sum=False),
                mean_los=float(np.mean(los)) if los else 0.0,
            )
        if not years:
            raise BedcastError(f"site {sid}: no complete calendar year in the window")
        history[sid] = projection.SiteHistory(
            site_id=sid,
            years=years,
            family=model.family,
            kappa=model.kappa,
            s_max=model.s_max,
        )
    return history


def projection_config(config: Config, history: dict[str, projection.SiteHistory],
                      runs: int | None = None, seed: int | None = None) -> projection.ProjectionConfig:
    available = sorted(set.intersection(*(set(s.years) for s in history.values())))
    nu = config.reference_years.get("nu") or available
    omega = config.reference_years.get("omega") or available[-min(3, len(available)):]
    if config.projection_years:
        y_future = config.projection_years
    else:
        y0 = max(available) + 1
        y_future = (y0, y0 + 6)
    return projection.ProjectionConfig(
        y_future=y_future,
        y_ref_omega=tuple(omega),
        y_ref_nu=tuple(nu),
        births=config.births,
        eta=config.eta,
        psi=config.psi,
        runs=runs if runs is not None else config.runs,
        seed=seed if seed is not None else config.seed,
        alphas=tuple(config.alphas),
    )


def summary_payload(summary: projection.ProjectionSummary) -> dict:
    rows = []
    for (sid, year), cell in sorted(summary.strategies.items()):
        row = {
            "site_id": sid,
            "year": year,
            "b_average": summary.b_average[(sid, year)],
        }
        for name, s in sorted(cell.items()):
            row[name] = {
                "median": s.median,
                "q25": s.q25,
                "q75": s.q75,
                "mean": s.mean,
                "sd": s.sd,
            }
        rows.append(row)
    return {"runs": summary.runs, "rows": rows}


def stage_project(out: Path, config: Config, runs: int | None = None,
                  seed: int | None = None) -> dict:
    out = Path(out)
    history = build_history(out, config)
    pconfig = projection_config(config, history, runs=runs, seed=seed)
    summary = projection.project(pconfig, history)
    payload = summary_payload(summary)
    payload["config"] = {
        "y_future": list(pconfig.y_future),
        "y_ref_omega": list(pconfig.y_ref_omega),
        "y_ref_nu": list(pconfig.y_ref_nu),
        "eta": pconfig.eta,
        "psi": pconfig.psi,
        "runs": pconfig.runs,
        "seed": pconfig.seed,
    }
    write_json(out / "projection.json", payload)

    strategy_names = sorted({k for row in payload["rows"] for k in row if isinstance(row[k], dict)})
    header = ["site", "year", "b_average"]
    for name in strategy_names:
        header += [f"{name}_{stat}" for stat in ("median", "q25", "q75", "mean", "sd")]
    write_csv(
        out / "projection.csv",
        header,
        [
            [row["site_id"], row["year"], row["b_average"]]
            + [
                _fmt(row[name][stat])
                for name in strategy_names
                for stat in ("median", "q25", "q75", "mean", "sd")
            ]
            for row in payload["rows"]
        ],
    )
    update_manifest(out, "project", [out / "projection.json", out / "projection.csv"], config)
    return payload


# --- diagnostics stage -----------------------------------------------------------


def stage_diagnose(out: Path, config: Config, site: str | None = None) -> None:
    out = Path(out)
    files = []
    for sid in _select_sites(out, site):
        series = load_series(out, sid)
        gaps = diagnostics.interarrival_times(series.admit_count)
        payload = {}
        try:
            ks = diagnostics.ks_exponential(gaps)
            payload["ks_exponential"] = vars(ks)
        except BedcastError as err:
            payload["ks_exponential"] = {"error": str(err)}
        disp = diagnostics.dispersion_index(series.admit_count)
        payload["dispersion_index"] = vars(disp)
        try:
            gof = diagnostics.chi2_poisson_gof(series.admit_count)
            payload["chi2_poisson_gof"] = vars(gof)
        except BedcastError as err:
            payload["chi2_poisson_gof"] = {"error": str(err)}
        sdir = _site_dir(out, sid)
        write_json(sdir / "diagnostics.json", payload)
        files.append(sdir / "diagnostics.json")
    update_manifest(out, "diagnose", files, config)


def run_all(input_path, out: Path, config: Config) -> None:
    """Ingest through plan in one call (the common CLI path)."""
    stage_ingest(input_path, Path(out), config)
    stage_decompose(out, config)
    stage_fit(out, config)
    stage_occupancy(out, config)
    stage_plan(out, config)

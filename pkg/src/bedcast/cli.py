"""Command-line pipeline: ingest -> decompose -> fit -> occupancy -> plan,
plus scenario, projection, simulation, diagnostics, and the HTTP server.

Outputs land under --out (or $BEDCAST_OUT); every stage records checksums in
manifest.json so identical inputs reproduce identical artifacts.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import sys
from datetime import date, timedelta
from pathlib import Path

import click
import numpy as np

from . import pipeline, simulate as sim
from .errors import BedcastError
from .scenario import ScenarioSpec


def _fail_on_data_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BedcastError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)

    return wrapper


out_option = click.option(
    "--out",
    envvar="BEDCAST_OUT",
    required=True,
    type=click.Path(path_type=Path),
    help="Output directory (or set BEDCAST_OUT).",
)
config_option = click.option(
    "--config",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="JSON config file.",
)
site_option = click.option("--site", default=None, help="Restrict to one site.")


@click.group()
def main():
    """Bed-occupancy estimation and capacity planning."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@out_option
@config_option
@_fail_on_data_errors
def ingest(input_path, out, config):
    """Parse admissions and build per-site daily series."""
    sites = pipeline.stage_ingest(input_path, out, pipeline.load_config(config))
    click.echo(f"ingested {len(sites)} sites: {', '.join(sites)}")


@main.command()
@out_option
@config_option
@site_option
@_fail_on_data_errors
def decompose(out, config, site):
    """Grid-search decompositions and write smoothed tracks."""
    pipeline.stage_decompose(out, pipeline.load_config(config), site)
    click.echo("decomposition complete")


@main.command()
@out_option
@config_option
@site_option
@_fail_on_data_errors
def fit(out, config, site):
    """Fit LOS families and select the best per site."""
    pipeline.stage_fit(out, pipeline.load_config(config), site)
    for sid in pipeline.site_ids(out) if site is None else [site]:
        model = json.loads((out / "sites" / sid / "model.json").read_text())
        click.echo(
            f"{sid}: {model['family']} (kappa={model['kappa']}, "
            f"rmse={model['rmse']:.4f}, s_max={model['s_max']})"
        )


@main.command()
@out_option
@config_option
@site_option
@_fail_on_data_errors
def occupancy(out, config, site):
    """Evaluate the expected-occupancy convolution."""
    pipeline.stage_occupancy(out, pipeline.load_config(config), site)
    click.echo("occupancy series written")


@main.command()
@out_option
@config_option
@site_option
@click.option("--gamma", type=float, default=None, help="Utilization threshold in (0, 1].")
@click.option("--alpha", "alphas", type=float, multiple=True, help="Overflow risk level(s).")
@_fail_on_data_errors
def plan(out, config, site, gamma, alphas):
    """Compute bed counts for every strategy and utilization statistics."""
    cfg = pipeline.load_config(config)
    if gamma is not None:
        cfg.gamma = gamma
    if alphas:
        cfg.alphas = list(alphas)
    pipeline.stage_plan(out, cfg, site)
    for sid in [site] if site else pipeline.site_ids(out):
        payload = json.loads((out / "sites" / sid / "plan.json").read_text())
        click.echo(f"{sid}: " + json.dumps(payload["beds"], sort_keys=True))


@main.command()
@out_option
@config_option
@click.option("--site", required=True)
@click.option("--beta-lambda", type=float, default=1.0, show_default=True)
@click.option("--beta-mu", type=float, default=1.0, show_default=True)
@click.option("--beta-sigma2", type=float, default=1.0, show_default=True)
@click.option("--from-day", type=int, default=None, help="First day index of the window.")
@click.option("--to-day", type=int, default=None, help="Last day index of the window.")
@click.option("--sensitivity", is_flag=True, help="Also write the variance-multiplier table.")
@_fail_on_data_errors
def scenario(out, config, site, beta_lambda, beta_mu, beta_sigma2, from_day, to_day, sensitivity):
    """What-if multipliers on arrivals, mean LOS, or LOS variance."""
    date_range = None
    if (from_day is None) != (to_day is None):
        raise click.UsageError("--from-day and --to-day must be given together")
    if from_day is not None:
        date_range = (from_day, to_day)
    spec = ScenarioSpec(beta_lambda, beta_mu, beta_sigma2, date_range)
    payload = pipeline.stage_scenario(out, pipeline.load_config(config), site, spec, sensitivity)
    click.echo(json.dumps(payload["scenario_beds"], sort_keys=True))


@main.command()
@out_option
@config_option
@click.option("--births", type=click.Path(exists=True, path_type=Path), default=None,
              help="CSV with year,births columns (overrides config).")
@click.option("--eta", type=float, default=None)
@click.option("--psi", type=float, default=None)
@click.option("--runs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@_fail_on_data_errors
def project(out, config, births, eta, psi, runs, seed):
    """Births-driven projection of future bed requirements."""
    cfg = pipeline.load_config(config)
    if births is not None:
        with open(births, newline="") as fh:
            cfg.births = {int(r["year"]): float(r["births"]) for r in csv.DictReader(fh)}
    if eta is not None:
        cfg.eta = eta
    if psi is not None:
        cfg.psi = psi
    payload = pipeline.stage_project(out, cfg, runs=runs, seed=seed)
    click.echo(f"projection written ({payload['runs']} runs, {len(payload['rows'])} site-years)")


@main.command()
@out_option
@config_option
@site_option
@_fail_on_data_errors
def diagnose(out, config, site):
    """Arrival-process diagnostics (KS, dispersion, chi-squared GOF)."""
    pipeline.stage_diagnose(out, pipeline.load_config(config), site)
    click.echo("diagnostics written")


@main.command()
@out_option
@config_option
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@_fail_on_data_errors
def run(out, config, input_path):
    """Full pipeline: ingest, decompose, fit, occupancy, plan."""
    pipeline.run_all(input_path, out, pipeline.load_config(config))
    click.echo(f"pipeline complete under {out}")


@main.command()
@click.option("--out-file", required=True, type=click.Path(path_type=Path))
@click.option("--sites", "n_sites", type=int, default=2, show_default=True)
@click.option("--days", type=int, default=1095, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--start", default="2020-01-01", show_default=True)
@click.option("--los-family",
              type=click.Choice(["lognormal", "exponential", "weibull", "gamma"]),
              default="lognormal", show_default=True)
@_fail_on_data_errors
def simulate(out_file, n_sites, days, seed, start, los_family):
    """Generate a synthetic admissions CSV consumable by ingest."""
    start_date = date.fromisoformat(start)
    rows = synthetic_admissions(n_sites, days, seed, start_date, los_family)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    with open(out_file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site_id", "admit_date", "los_days"])
        w.writerows(rows)
    click.echo(f"wrote {len(rows)} synthetic admissions to {out_file}")


def synthetic_admissions(n_sites, days, seed, start_date, los_family="lognormal"):
    """Seasonal synthetic dataset: per-site sinusoidal arrivals, varied LOS."""
    rows = []
    for s in range(n_sites):
        rng = np.random.default_rng(np.random.SeedSequence((seed, s)))
        base = 1.5 + 0.5 * s
        lam = lambda t: base * (1 + 0.3 * math.sin(2 * math.pi * (t + 40 * s) / 365)
                                + 0.1 * math.sin(2 * math.pi * t / 7))
        counts = sim.sample_nhpp(lam, days, rng)
        mu = 8.0 + 2.0 * s
        sampler = sim.make_sampler(
            los_family,
            mu=mu,
            sigma2=(1.5 * mu) ** 2,
            kappa=1.4 if los_family in ("weibull", "gamma") else None,
        )
        arrival_days = np.repeat(np.arange(days), counts)
        stays = sampler(arrival_days, rng)
        for d, los in zip(arrival_days, stays):
            rows.append([
                f"S{s + 1}",
                (start_date + timedelta(days=int(d))).isoformat(),
                f"{max(float(los), 0.02):.3f}",
            ])
    rows.sort(key=lambda r: (r[1], r[0]))
    return rows


@main.command()
@out_option
@config_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_fail_on_data_errors
def serve(out, config, host, port):
    """Serve fitted site models and on-demand computations over HTTP."""
    import uvicorn

    from .api import build_app, load_snapshot

    app = build_app(load_snapshot(out, pipeline.load_config(config)))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()

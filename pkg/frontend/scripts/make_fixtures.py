#!/usr/bin/env python3
"""Regenerate the frontend test fixtures from the real pipeline and API.

Builds a deterministic snapshot from seeded synthetic admissions, runs the
CLI stages, captures the HTTP responses the UI consumes, and records the
CLI-side bed counts for the same three scenarios so the vitest suite can
assert exact equality:

  1. baseline plans
  2. LOS-variance multiplier 0.5
  3. overflow target gamma=0.85, alpha=0.01

Usage:  python3 frontend/scripts/make_fixtures.py
"""

import json
import tempfile
from datetime import date
from pathlib import Path

from fastapi.testclient import TestClient

from bedcast import pipeline
from bedcast.api import build_app, load_snapshot
from bedcast.cli import synthetic_admissions
from bedcast.scenario import ScenarioSpec

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SITE = "S1"


def write(name: str, payload) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / name).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print(f"wrote {name}")


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "snap"
        data = Path(tmp) / "admissions.csv"
        rows = synthetic_admissions(
            n_sites=2, days=750, seed=7, start_date=date(2020, 1, 1), los_family="lognormal"
        )
        with open(data, "w", newline="") as fh:
            fh.write("site_id,admit_date,los_days\n")
            fh.writelines(",".join(r) + "\n" for r in rows)

        config = pipeline.load_config({"gamma": 1.0, "alphas": [0.05, 0.01]})
        pipeline.run_all(data, out, config)

        # CLI-side expectations for the three acceptance scenarios
        plan = json.loads((out / "sites" / SITE / "plan.json").read_text())
        scenario_cli = pipeline.compute_scenario(out, config, SITE, ScenarioSpec(beta_sigma2=0.5))
        alt_config = pipeline.load_config({"gamma": 0.85, "alphas": [0.01]})
        alt_plan = pipeline.compute_plan(out, alt_config, SITE)
        write(
            "cli_expected.json",
            {
                "site": SITE,
                "baseline_beds": plan["beds"],
                "sigma05_beds": scenario_cli["scenario_beds"],
                "g085_a001_beds": alt_plan["beds"][pipeline.overflow_key(0.85, 0.01)],
            },
        )

        # API responses the UI renders
        client = TestClient(build_app(load_snapshot(out, config)))
        write("sites.json", client.get("/sites").json())
        write("scenario_baseline.json", client.post(f"/sites/{SITE}/scenario", json={}).json())
        write(
            "scenario_sigma05.json",
            client.post(f"/sites/{SITE}/scenario", json={"beta_sigma2": 0.5}).json(),
        )
        write(
            "plan_g085_a001.json",
            client.post(f"/sites/{SITE}/plan", json={"gamma": 0.85, "alpha": 0.01}).json(),
        )
        occupancy = client.get(f"/sites/{SITE}/occupancy").json()
        occupancy["rho"] = occupancy["rho"][:400]  # plenty for chart tests
        occupancy["delta"] = occupancy["delta"][:400]
        write("occupancy.json", occupancy)

        betas = [0.0, 0.2, 0.5, 0.8, 1.2, 1.5, 1.8]
        write(
            "scenario_by_beta.json",
            {
                str(beta): client.post(f"/sites/{SITE}/scenario", json={"beta_sigma2": beta}).json()
                for beta in betas
            },
        )
        births = {str(y): 20000 + 50 * (y - 2022) for y in range(2022, 2029)}
        write(
            "projection.json",
            client.post("/project", json={"runs": 6, "seed": 1, "births": births}).json(),
        )


if __name__ == "__main__":
    main()

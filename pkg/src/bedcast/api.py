"""HTTP service over a fitted snapshot directory.

The snapshot is immutable: every endpoint is a pure function of it and the
request body, so identical requests return identical responses.  The only
mutable state is the table of long-running projection jobs, guarded by a
lock.  All numbers served here come from the same pipeline functions the CLI
uses.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import pipeline, planning
from .errors import BedcastError, FamilyMismatch
from .scenario import ScenarioSpec

SYNC_RUN_LIMIT = 50


@dataclass
class SiteState:
    site_id: str
    start: str
    occupancy: object
    plan: dict
    model: dict


@dataclass
class Snapshot:
    out: Path
    config: pipeline.Config
    snapshot_id: str
    sites: dict[str, SiteState]


def load_snapshot(out: Path, config: pipeline.Config | None = None) -> Snapshot:
    """Materialize the artifacts the endpoints need from a pipeline run."""
    out = Path(out)
    config = config or pipeline.load_config(None)
    manifest = json.loads((out / "manifest.json").read_text())
    sites = {}
    for sid in pipeline.site_ids(out):
        start, occ = pipeline.load_occupancy(out, sid)
        plan_payload = pipeline.compute_plan(out, config, sid)
        model_payload = json.loads((out / "sites" / sid / "model.json").read_text())
        model_payload.pop("comparison", None)
        sites[sid] = SiteState(sid, start.isoformat(), occ, plan_payload, model_payload)
    return Snapshot(out, config, manifest.get("snapshot_id", ""), sites)


class PlanRequest(BaseModel):
    model_config = {"extra": "forbid"}
    gamma: float = Field(default=1.0, gt=0.0, le=1.0)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)


class ScenarioRequest(BaseModel):
    model_config = {"extra": "forbid"}
    beta_lambda: float = Field(default=1.0, gt=0.0)
    beta_mu: float = Field(default=1.0, gt=0.0)
    beta_sigma2: float = Field(default=1.0, ge=0.0)
    date_range: tuple[int, int] | None = None
    strategies: list[str] | None = None


class ProjectRequest(BaseModel):
    model_config = {"extra": "forbid"}
    eta: float | None = None
    psi: float | None = Field(default=None, gt=0.0)
    runs: int | None = Field(default=None, ge=1, le=10000)
    seed: int | None = None
    births: dict[int, float] | None = None


def build_app(snapshot: Snapshot) -> FastAPI:
    app = FastAPI(title="bedcast", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=2)

    @app.exception_handler(RequestValidationError)
    async def _schema_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(FamilyMismatch)
    async def _family_mismatch(request: Request, exc: FamilyMismatch):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(BedcastError)
    async def _data_error(request: Request, exc: BedcastError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        incident = uuid.uuid4().hex[:12]
        return JSONResponse(status_code=500, content={"detail": "internal error", "id": incident})

    def _site(site_id: str) -> SiteState:
        state = snapshot.sites.get(site_id)
        if state is None:
            raise _NotFound(site_id)
        return state

    class _NotFound(Exception):
        def __init__(self, site_id: str):
            self.site_id = site_id

    @app.exception_handler(_NotFound)
    async def _not_found(request: Request, exc: _NotFound):
        return JSONResponse(status_code=404, content={"detail": f"unknown site {exc.site_id!r}"})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "snapshot_id": snapshot.snapshot_id}

    @app.get("/sites")
    def sites():
        return {
            "snapshot_id": snapshot.snapshot_id,
            "sites": [
                {
                    "site_id": s.site_id,
                    "start": s.start,
                    "days": len(s.occupancy),
                    "beds": s.plan["beds"],
                    "rho_bar": s.plan["rho_bar"],
                    "family": s.model["family"],
                    "kappa": s.model["kappa"],
                    "s_max": s.model["s_max"],
                    "utilization": s.plan["utilization"],
                }
                for s in snapshot.sites.values()
            ],
        }

    @app.get("/sites/{site_id}/occupancy")
    def occupancy(site_id: str):
        s = _site(site_id)
        return {
            "site_id": site_id,
            "start": s.start,
            "rho_bar": s.occupancy.rho_bar,
            "rho": [float(v) for v in s.occupancy.rho],
            "delta": [float(v) for v in s.occupancy.delta],
        }

    @app.post("/sites/{site_id}/plan")
    def plan(site_id: str, body: PlanRequest):
        s = _site(site_id)
        beds = planning.b_overflow(s.occupancy, body.gamma, body.alpha)
        return {"site_id": site_id, "gamma": body.gamma, "alpha": body.alpha, "beds": beds}

    @app.post("/sites/{site_id}/scenario")
    def scenario_endpoint(site_id: str, body: ScenarioRequest):
        state = _site(site_id)
        if body.beta_sigma2 != 1.0 and state.model["family"] != "lognormal":
            raise FamilyMismatch(
                f"variance scaling requires a lognormal model, got {state.model['family']}"
            )
        spec = ScenarioSpec(body.beta_lambda, body.beta_mu, body.beta_sigma2, body.date_range)
        payload = pipeline.compute_scenario(snapshot.out, snapshot.config, site_id, spec)
        if body.strategies:
            payload["baseline_beds"] = {
                k: v for k, v in payload["baseline_beds"].items() if k in body.strategies
            }
            payload["scenario_beds"] = {
                k: v for k, v in payload["scenario_beds"].items() if k in body.strategies
            }
        return payload

    def _run_projection(body: ProjectRequest) -> dict:
        config = replace(snapshot.config)
        if body.births:
            config.births = {**snapshot.config.births, **body.births}
        if body.eta is not None:
            config.eta = body.eta
        if body.psi is not None:
            config.psi = body.psi
        history = pipeline.build_history(snapshot.out, config)
        pconfig = pipeline.projection_config(config, history, runs=body.runs, seed=body.seed)
        from .projection import project as run_project

        return pipeline.summary_payload(run_project(pconfig, history))

    @app.post("/project")
    def project_endpoint(body: ProjectRequest):
        runs = body.runs if body.runs is not None else snapshot.config.runs
        if runs <= SYNC_RUN_LIMIT:
            return _run_projection(body)
        with jobs_lock:
            job_id = f"job-{len(jobs) + 1}"
            jobs[job_id] = {"status": "running"}

        def work():
            try:
                result = _run_projection(body)
                with jobs_lock:
                    jobs[job_id] = {"status": "done", "result": result}
            except Exception as exc:  # surfaced via the job record
                with jobs_lock:
                    jobs[job_id] = {"status": "error", "detail": str(exc)}

        executor.submit(work)
        return JSONResponse(status_code=202, content={"job_id": job_id, "status": "running"})

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        with jobs_lock:
            record = jobs.get(job_id)
            if record is None:
                return JSONResponse(status_code=404, content={"detail": f"unknown job {job_id!r}"})
            return dict(record)

    return app

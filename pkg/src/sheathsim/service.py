"""HTTP service wrapping the core solvers.

Fast requests (profile, limit, simulate, entropy) run synchronously and
return their data in the response body.  Convergence studies can take
minutes, so POST /studies queues a background job and GET /studies/{id}
polls it.  The job store is in-process; job ids are a plain counter, so the
service stays free of randomness like everything else in the package.
"""

import dataclasses
import threading

import numpy as np
from fastapi import FastAPI, HTTPException

from . import diagnostics, profiles, schemas
from .config import RunConfig
from .errors import SheathsimError
from .euler_limit import FluidState, run_limit
from .euler_poisson import PotentialField, near_wall_speed_marginal, run_full
from .expansion import build_expansion, evaluate
from .grid import Grid1D

app = FastAPI(title="sheathsim", version="0.1.0")


def _config_from(req, mode: str) -> RunConfig:
    """Map a request model onto the shared RunConfig defaults."""
    cfg = RunConfig(mode=mode)
    for name in ("ion_temp", "epsilon", "wall_potential", "bc", "u_b",
                 "domain_length", "limit_cells", "interior_cells",
                 "grading_ratio", "first_cell_scale", "t_end", "samples",
                 "cfl", "well_prepared", "expansion_order"):
        if hasattr(req, name):
            setattr(cfg, name, getattr(req, name))
    if hasattr(req, "cells"):
        cfg.limit_cells = req.cells
    if hasattr(req, "initial"):
        cfg.preset = req.initial.preset
        cfg.amplitude = req.initial.amplitude
        cfg.center = req.initial.center if req.initial.center is not None \
            else cfg.domain_length / 2.0
        cfg.width = req.initial.width if req.initial.width is not None \
            else cfg.domain_length / 10.0
    return cfg


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/profile", response_model=schemas.ProfileResponse)
def profile(req: schemas.ProfileRequest):
    try:
        params = profiles.SheathParams(req.gamma, req.ion_temp,
                                       req.wall_value, tol=req.tol)
        prof = profiles.solve_leading_profile(params, nodes=req.nodes)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except SheathsimError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    return schemas.ProfileResponse(
        decay_rate=prof.decay_rate, z=prof.z.tolist(), phi=prof.phi.tolist(),
        dphi=prof.dphi.tolist(), n_layer=prof.n_layer.tolist())


@app.post("/limit", response_model=schemas.LimitResponse)
def limit(req: schemas.LimitRequest):
    cfg = _config_from(req, "limit")
    try:
        grid = cfg.limit_grid()
        run = run_limit(cfg.initial_state(grid), grid, cfg.boundary_mode(),
                        cfg.ion_temp, cfg.t_end, samples=cfg.samples,
                        cfl=cfg.cfl)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except SheathsimError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    masses = run.n @ grid.widths
    return schemas.LimitResponse(
        times=run.times.tolist(), mass=masses.tolist(),
        x=grid.centers.tolist(), final_n=run.n[-1].tolist(),
        final_u=run.u[-1].tolist())


def _prepared_state(cfg: RunConfig, grid: Grid1D):
    limit_grid = cfg.limit_grid()
    lrun = run_limit(cfg.initial_state(limit_grid), limit_grid,
                     cfg.boundary_mode(), cfg.ion_temp, cfg.t_end,
                     samples=cfg.samples, cfl=cfg.cfl)
    bundle = build_expansion(lrun, cfg.plasma_params(), cfg.expansion_order)
    fields = evaluate(bundle, 0.0, grid)
    return FluidState(n=fields.n, u=fields.u, t=0.0), bundle


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest):
    cfg = _config_from(req, "simulate")
    try:
        params = cfg.plasma_params()
        grid = cfg.full_grid()
        if cfg.well_prepared:
            if cfg.bc != "wall":
                raise ValueError("well_prepared initial data needs the wall "
                                 "boundary")
            state, _ = _prepared_state(cfg, grid)
        else:
            state = cfg.initial_state(grid)
        run = run_full(state, params, grid, cfg.t_end, samples=cfg.samples,
                       cfl=cfg.cfl)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except SheathsimError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    totals = np.array([e.total for e in run.energy])
    drift = float(np.max(np.abs(totals - totals[0])) / max(abs(totals[0] + 1.0),
                                                           1e-12))
    warned = any(near_wall_speed_marginal(
        FluidState(n=run.n[k], u=run.u[k], t=float(t)), grid, params)
        for k, t in enumerate(run.times))
    energy = [schemas.EnergySample(
        t=float(t), kinetic=e.kinetic, ion_entropy=e.ion_entropy,
        electron_term=e.electron_term, field_term=e.field_term, total=e.total)
        for t, e in zip(run.times, run.energy)]
    return schemas.SimulateResponse(
        times=run.times.tolist(), energy=energy, energy_drift=drift,
        mass_final=float(np.sum(run.n[-1] * grid.widths)),
        near_wall_speed_warning=warned, x=grid.centers.tolist(),
        final_n=run.n[-1].tolist(), final_u=run.u[-1].tolist(),
        final_phi=run.phi[-1].tolist())


@app.post("/entropy", response_model=schemas.EntropyResponse)
def entropy(req: schemas.EntropyRequest):
    cfg = _config_from(req, "entropy")
    try:
        params = cfg.plasma_params()
        grid = cfg.full_grid()
        state, bundle = _prepared_state(cfg, grid)
        run = run_full(state, params, grid, cfg.t_end, samples=cfg.samples,
                       cfl=cfg.cfl)
        values = []
        for k, t in enumerate(run.times):
            fields = evaluate(bundle, float(t), grid)
            sample = FluidState(n=run.n[k], u=run.u[k], t=float(t))
            pot = PotentialField(run.phi[k], run.dphi[k], 0, 0.0, [])
            values.append(diagnostics.relative_entropy(
                sample, pot, (fields.n, fields.u), params, grid))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except SheathsimError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    return schemas.EntropyResponse(
        times=run.times.tolist(), entropy=values,
        entropy_sup=float(np.max(values)), entropy_min=float(np.min(values)))


class _JobStore:
    def __init__(self):
        self._lock = threading.Lock()
        self._jobs = {}
        self._counter = 0

    def create(self) -> str:
        with self._lock:
            self._counter += 1
            job_id = f"job-{self._counter}"
            self._jobs[job_id] = schemas.JobStatus(id=job_id, state="queued")
            return job_id

    def set(self, job_id: str, **changes) -> None:
        with self._lock:
            self._jobs[job_id] = self._jobs[job_id].model_copy(update=changes)

    def get(self, job_id: str):
        with self._lock:
            return self._jobs.get(job_id)


_store = _JobStore()


def _run_study_job(job_id: str, req: schemas.StudyRequest) -> None:
    _store.set(job_id, state="running")
    cfg = _config_from(req, "converge")
    cfg.eps_list = list(req.eps_list)
    try:
        params_base = cfg.plasma_params(epsilon=cfg.eps_list[0])
        limit_grid = cfg.limit_grid()
        study = diagnostics.run_convergence_study(
            params_base, cfg.eps_list, cfg.t_end, cfg.samples,
            cfg.initial_state(limit_grid), limit_grid,
            interior_cells=cfg.interior_cells,
            grading_ratio=cfg.grading_ratio,
            first_cell_scale=cfg.first_cell_scale, cfl=cfg.cfl,
            jobs=req.jobs)
    except (ValueError, SheathsimError) as exc:
        _store.set(job_id, state="failed", error=str(exc))
        return
    records = [schemas.StudyRecordModel(**dataclasses.asdict(r))
               for r in study.records]
    fits = {name: schemas.RateFitModel(slope=f.slope, intercept=f.intercept,
                                       r_squared=f.r_squared,
                                       points_used=f.points_used)
            for name, f in study.fits.items()}
    _store.set(job_id, state="done",
               result=schemas.StudyResult(records=records, fits=fits))


@app.post("/studies", response_model=schemas.JobStatus, status_code=202)
def submit_study(req: schemas.StudyRequest):
    job_id = _store.create()
    worker = threading.Thread(target=_run_study_job, args=(job_id, req),
                              daemon=True)
    worker.start()
    return _store.get(job_id)


@app.get("/studies/{job_id}", response_model=schemas.JobStatus)
def study_status(job_id: str):
    status = _store.get(job_id)
    if status is None:
        raise HTTPException(status_code=404, detail="unknown job id")
    return status

"""One function per run mode: solve, write CSVs, return summary numbers.

Every pipeline takes a validated RunConfig and an output directory, writes
its files atomically, and returns a dict of headline values for the CLI's
one-line summary.  Nothing here prints; the CLI owns the terminal.
"""

import os

import numpy as np

from . import profiles
from .config import RunConfig
from .csvio import write_csv, write_metadata, write_rows
from .diagnostics import (STUDY_COLUMNS, StudyAborted, relative_entropy,
                          run_convergence_study)
from .euler_limit import FluidState, run_limit
from .euler_poisson import PotentialField, near_wall_speed_marginal, run_full
from .expansion import build_expansion, evaluate
from .grid import Grid1D


def _ensure_dir(outdir: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    return outdir


def run_profile_pipeline(cfg: RunConfig, outdir: str) -> dict:
    """Leading-order layer profile to CSV."""
    _ensure_dir(outdir)
    params = profiles.SheathParams(cfg.gamma, cfg.ion_temp, cfg.wall_value,
                                   tol=cfg.layer_tol)
    prof = profiles.solve_leading_profile(params, nodes=cfg.layer_nodes)
    write_csv(os.path.join(outdir, "profile.csv"),
              ["z", "phi", "dphi", "n_layer"],
              [prof.z, prof.phi, prof.dphi, prof.n_layer])
    write_metadata(os.path.join(outdir, "profile_meta.json"),
                   {"gamma": cfg.gamma, "ion_temp": cfg.ion_temp,
                    "wall_value": cfg.wall_value,
                    "decay_rate": prof.decay_rate,
                    "z_max": float(prof.z[-1]), "nodes": cfg.layer_nodes})
    return {"decay_rate": prof.decay_rate, "z_max": float(prof.z[-1])}


def run_limit_pipeline(cfg: RunConfig, outdir: str) -> dict:
    """Quasineutral-limit run: per-sample snapshots plus a mass series."""
    _ensure_dir(outdir)
    grid = cfg.limit_grid()
    run = run_limit(cfg.initial_state(grid), grid, cfg.boundary_mode(),
                    cfg.ion_temp, cfg.t_end, samples=cfg.samples, cfl=cfg.cfl)
    for k in range(run.times.size):
        phi = -np.log(run.n[k])
        write_csv(os.path.join(outdir, f"limit_{k:03d}.csv"),
                  ["x", "n", "u", "phi"],
                  [grid.centers, run.n[k], run.u[k], phi])
    masses = run.n @ grid.widths
    write_csv(os.path.join(outdir, "mass.csv"), ["t", "mass"],
              [run.times, masses])
    write_metadata(os.path.join(outdir, "limit_meta.json"),
                   {"ion_temp": cfg.ion_temp, "bc": cfg.bc,
                    "t_end": cfg.t_end, "samples": cfg.samples,
                    "cells": grid.n_cells,
                    "mass_initial": float(masses[0]),
                    "mass_final": float(masses[-1])})
    return {"t_end": cfg.t_end, "mass_final": float(masses[-1]),
            "mass_drift": float(masses[-1] - masses[0])}


def _prepared_initial(cfg: RunConfig, grid: Grid1D):
    """Initial data from the asymptotic ansatz at t = 0 (wall mode only)."""
    limit_grid = cfg.limit_grid()
    limit_run = run_limit(cfg.initial_state(limit_grid), limit_grid,
                          cfg.boundary_mode(), cfg.ion_temp, cfg.t_end,
                          samples=cfg.samples, cfl=cfg.cfl)
    bundle = build_expansion(limit_run, cfg.plasma_params(),
                             cfg.expansion_order, layer_nodes=cfg.layer_nodes,
                             tol=cfg.layer_tol)
    fields = evaluate(bundle, 0.0, grid)
    return FluidState(n=fields.n, u=fields.u, t=0.0), bundle


def run_simulate_pipeline(cfg: RunConfig, outdir: str) -> dict:
    """Coupled run: snapshots, energy series, mass bookkeeping."""
    _ensure_dir(outdir)
    params = cfg.plasma_params()
    grid = cfg.full_grid()
    if cfg.well_prepared:
        if cfg.bc != "wall":
            raise ValueError("well_prepared initial data needs the wall "
                             "boundary")
        initial, _ = _prepared_initial(cfg, grid)
    else:
        initial = cfg.initial_state(grid)
    run = run_full(initial, params, grid, cfg.t_end, samples=cfg.samples,
                   cfl=cfg.cfl)
    warned = False
    for k, t in enumerate(run.times):
        write_csv(os.path.join(outdir, f"snapshot_{k:03d}.csv"),
                  ["x", "n", "u", "phi", "dphi", "e_minus_phi"],
                  [grid.centers, run.n[k], run.u[k], run.phi[k], run.dphi[k],
                   np.exp(-run.phi[k])])
        state = FluidState(n=run.n[k], u=run.u[k], t=float(t))
        warned = warned or near_wall_speed_marginal(state, grid, params)
    write_csv(os.path.join(outdir, "energy.csv"),
              ["t", "kinetic", "ion_entropy", "electron_term", "field_term",
               "total"],
              [run.times,
               [e.kinetic for e in run.energy],
               [e.ion_entropy for e in run.energy],
               [e.electron_term for e in run.energy],
               [e.field_term for e in run.energy],
               [e.total for e in run.energy]])
    write_csv(os.path.join(outdir, "mass_steps.csv"),
              ["t", "mass", "boundary_flux"],
              [run.step_times, run.step_mass, run.step_boundary_flux])
    totals = np.array([e.total for e in run.energy])
    scale = max(abs(totals[0] + 1.0), 1e-12)
    drift = float(np.max(np.abs(totals - totals[0])) / scale)
    write_metadata(os.path.join(outdir, "simulate_meta.json"),
                   {"ion_temp": cfg.ion_temp, "epsilon": cfg.epsilon,
                    "wall_potential": cfg.wall_potential, "bc": cfg.bc,
                    "t_end": cfg.t_end, "cells": grid.n_cells,
                    "energy_drift": drift,
                    "near_wall_speed_warning": warned})
    return {"energy_drift": drift, "near_wall_speed_warning": warned,
            "mass_final": float(run.step_mass[-1]) if run.step_mass.size
            else float(np.sum(initial.n * grid.widths))}


def run_converge_pipeline(cfg: RunConfig, outdir: str, jobs: int = 1) -> dict:
    """Epsilon sweep; partial results are still written if a run fails."""
    _ensure_dir(outdir)
    params_base = cfg.plasma_params(epsilon=cfg.eps_list[0])
    limit_grid = cfg.limit_grid()
    initial = cfg.initial_state(limit_grid)

    def write_records(records, aborted, message=""):
        write_csv(os.path.join(outdir, "study.csv"),
                  ["epsilon"] + list(STUDY_COLUMNS),
                  [[r.epsilon for r in records]]
                  + [[r.column(c) for r in records] for c in STUDY_COLUMNS])
        write_metadata(os.path.join(outdir, "study_meta.json"),
                       {"eps_list": cfg.eps_list, "t_end": cfg.t_end,
                        "samples": cfg.samples, "ion_temp": cfg.ion_temp,
                        "wall_potential": cfg.wall_potential,
                        "interior_cells": cfg.interior_cells,
                        "limit_cells": cfg.limit_cells,
                        "aborted": aborted, "abort_message": message})

    try:
        study = run_convergence_study(
            params_base, cfg.eps_list, cfg.t_end, cfg.samples, initial,
            limit_grid, interior_cells=cfg.interior_cells,
            grading_ratio=cfg.grading_ratio,
            first_cell_scale=cfg.first_cell_scale, cfl=cfg.cfl,
            layer_nodes=cfg.layer_nodes, jobs=jobs)
    except StudyAborted as exc:
        write_records(exc.records, True, str(exc))
        raise
    write_records(study.records, False)
    write_rows(os.path.join(outdir, "fits.csv"),
               ["column", "slope", "intercept", "r2"],
               [[name, fit.slope, fit.intercept, fit.r_squared]
                for name, fit in study.fits.items()])
    return {"l2_n_slope": study.fits["l2_n"].slope,
            "l2_u_slope": study.fits["l2_u"].slope,
            "linf_n_bl_slope": study.fits["linf_n_bl"].slope,
            "runs": len(study.records)}


def run_entropy_pipeline(cfg: RunConfig, outdir: str) -> dict:
    """Relative-entropy series of a well-prepared coupled run."""
    _ensure_dir(outdir)
    params = cfg.plasma_params()
    grid = cfg.full_grid()
    initial, bundle = _prepared_initial(cfg, grid)
    run = run_full(initial, params, grid, cfg.t_end, samples=cfg.samples,
                   cfl=cfg.cfl)
    values = []
    for k, t in enumerate(run.times):
        fields = evaluate(bundle, float(t), grid)
        state = FluidState(n=run.n[k], u=run.u[k], t=float(t))
        pot = PotentialField(run.phi[k], run.dphi[k], 0, 0.0, [])
        values.append(relative_entropy(state, pot, (fields.n, fields.u),
                                       params, grid))
    write_csv(os.path.join(outdir, "entropy.csv"), ["t", "entropy"],
              [run.times, values])
    write_metadata(os.path.join(outdir, "entropy_meta.json"),
                   {"epsilon": cfg.epsilon, "ion_temp": cfg.ion_temp,
                    "wall_potential": cfg.wall_potential,
                    "expansion_order": cfg.expansion_order,
                    "t_end": cfg.t_end,
                    "entropy_sup": float(np.max(values)),
                    "entropy_min": float(np.min(values))})
    return {"entropy_sup": float(np.max(values)),
            "entropy_min": float(np.min(values))}

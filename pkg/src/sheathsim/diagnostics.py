"""Error norms, rate fits, relative entropy, and the epsilon sweep.

The convergence study is the toolkit's headline experiment: run the coupled
solver for a decreasing list of epsilons from well-prepared initial data,
measure distances to the quasineutral limit and to the layer-corrected
approximation at shared sample times, and fit log error against log epsilon.
"""

import dataclasses
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .euler_limit import FluidState, LimitRun, run_limit
from .euler_poisson import PlasmaParams, PotentialField, run_full
from .expansion import build_expansion, evaluate, quadratic_interp
from .grid import Grid1D

ERROR_FLOOR = 1e-14
STUDY_COLUMNS = ("l2_n", "l2_u", "linf_n_bl", "linf_phi_bl", "entropy_sup")
FIRST_CELL_SCALE = 1.0 / 24.0


@dataclass(frozen=True)
class ErrorRecord:
    """Per-epsilon sup-in-time distances of one coupled run.

    l2 columns compare against the interpolated limit fields alone; linf
    columns subtract the layer corrector as well; entropy_sup is the largest
    relative entropy against the order-1 approximation.
    """

    epsilon: float
    l2_n: float
    l2_u: float
    linf_n_bl: float
    linf_phi_bl: float
    entropy_sup: float

    def column(self, name: str) -> float:
        if name not in STUDY_COLUMNS:
            raise KeyError(name)
        return getattr(self, name)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int


def fit_rate(points) -> RateFit:
    """Least squares of log error against log epsilon.

    Errors at or below the round-off floor are dropped with a warning; at
    least three usable points must remain and the epsilons must be distinct.
    """
    eps = np.array([p[0] for p in points], dtype=float)
    err = np.array([p[1] for p in points], dtype=float)
    if eps.size < 3:
        raise ValueError("rate fit needs at least 3 points")
    if np.any(eps <= 0.0):
        raise ValueError("epsilon values must be positive")
    keep = err > ERROR_FLOOR
    if not np.all(keep):
        warnings.warn(f"dropping {int(np.sum(~keep))} error value(s) at the "
                      "round-off floor from the rate fit")
        eps, err = eps[keep], err[keep]
    if eps.size < 3:
        raise ValueError("fewer than 3 points above the round-off floor")
    if np.unique(eps).size != eps.size:
        raise ValueError("duplicate epsilon values make the fit degenerate")
    lx = np.log(eps)
    ly = np.log(err)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(float(slope), float(intercept), float(r2), int(eps.size))


def discrete_norms(a: np.ndarray, b: np.ndarray, grid: Grid1D):
    """Cell-weighted L2 distance and the max-norm distance of two fields."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (grid.n_cells,) or b.shape != (grid.n_cells,):
        raise ValueError("fields do not live on the given grid")
    diff = a - b
    l2 = float(np.sqrt(np.sum(diff * diff * grid.widths)))
    linf = float(np.max(np.abs(diff)))
    return l2, linf


def relative_entropy(state: FluidState, field: PotentialField, bundle_eval,
                     params: PlasmaParams, grid: Grid1D) -> float:
    """Bregman-type distance of a solution from a smooth reference pair.

    Four quadratures: relative kinetic energy, the ion entropy Bregman
    gap, the same gap for the electron density e^(-phi), and the scaled
    field energy.  The first three integrands are pointwise nonnegative,
    so the total is a genuine (asymmetric) distance.
    """
    n_app, u_app = bundle_eval
    n_app = np.asarray(n_app, dtype=float)
    u_app = np.asarray(u_app, dtype=float)
    n = state.n
    if np.any(n <= 0.0) or np.any(n_app <= 0.0):
        raise ValueError("relative entropy needs positive densities")
    w = grid.widths
    T = params.ion_temp
    kinetic = 0.5 * np.sum(n * (state.u - u_app) ** 2 * w)
    ion = T * np.sum((n * np.log(n / n_app) - n + n_app) * w)
    electrons = np.exp(-field.phi)
    elec = np.sum((electrons * np.log(electrons / n_app) - electrons + n_app) * w)
    field_term = 0.5 * params.epsilon ** 2 * np.sum(field.dphi ** 2 * w)
    return float(kinetic + ion + elec + field_term)


@dataclass(frozen=True)
class StudyTask:
    """Picklable work unit for one epsilon of the sweep."""

    limit_run: LimitRun
    ion_temp: float
    wall_potential: float
    domain_length: float
    epsilon: float
    t_end: float
    samples: int
    interior_cells: int
    grading_ratio: float
    first_cell_scale: float
    cfl: float
    layer_nodes: int


def run_single_epsilon(task: StudyTask) -> ErrorRecord:
    """Coupled run at one epsilon, measured against the shared limit run."""
    params = PlasmaParams(ion_temp=task.ion_temp, epsilon=task.epsilon,
                          wall_potential=task.wall_potential,
                          domain_length=task.domain_length)
    bundle1 = build_expansion(task.limit_run, params, 1,
                              layer_nodes=task.layer_nodes)
    bundle0 = dataclasses.replace(bundle1, order=0)
    grid = Grid1D.graded(task.domain_length,
                         first_width=task.epsilon * task.first_cell_scale,
                         ratio=task.grading_ratio,
                         interior_width=task.domain_length / task.interior_cells)
    prepared = evaluate(bundle1, float(bundle1.times[0]), grid)
    state = FluidState(n=prepared.n, u=prepared.u, t=float(bundle1.times[0]))
    full = run_full(state, params, grid, task.t_end, samples=task.samples,
                    cfl=task.cfl)

    limit_centers = task.limit_run.grid.centers
    sup = {name: 0.0 for name in STUDY_COLUMNS}
    for k, t in enumerate(full.times):
        kl = task.limit_run.sample_index(float(t))
        n0 = quadratic_interp(limit_centers, task.limit_run.n[kl], grid.centers)
        u0 = quadratic_interp(limit_centers, task.limit_run.u[kl], grid.centers)
        l2_n, _ = discrete_norms(full.n[k], n0, grid)
        l2_u, _ = discrete_norms(full.u[k], u0, grid)
        ev0 = evaluate(bundle0, float(t), grid)
        _, linf_n = discrete_norms(full.n[k], ev0.n, grid)
        _, linf_phi = discrete_norms(full.phi[k], ev0.phi, grid)
        ev1 = evaluate(bundle1, float(t), grid)
        sample_state = FluidState(n=full.n[k], u=full.u[k], t=float(t))
        sample_field = PotentialField(full.phi[k], full.dphi[k], 0, 0.0, [])
        ent = relative_entropy(sample_state, sample_field, (ev1.n, ev1.u),
                               params, grid)
        sup["l2_n"] = max(sup["l2_n"], l2_n)
        sup["l2_u"] = max(sup["l2_u"], l2_u)
        sup["linf_n_bl"] = max(sup["linf_n_bl"], linf_n)
        sup["linf_phi_bl"] = max(sup["linf_phi_bl"], linf_phi)
        sup["entropy_sup"] = max(sup["entropy_sup"], ent)
    return ErrorRecord(task.epsilon, sup["l2_n"], sup["l2_u"],
                       sup["linf_n_bl"], sup["linf_phi_bl"],
                       sup["entropy_sup"])


@dataclass
class ConvergenceStudy:
    records: list
    fits: dict


class StudyAborted(SolverError):
    """A per-epsilon run failed; completed records ride along."""

    def __init__(self, message: str, records):
        super().__init__(message)
        self.records = records


def run_convergence_study(params_base: PlasmaParams, eps_list, t_end: float,
                          samples: int, initial: FluidState,
                          limit_grid: Grid1D, *, interior_cells: int = 256,
                          grading_ratio: float = 1.1,
                          first_cell_scale: float = FIRST_CELL_SCALE,
                          cfl: float = 0.4, layer_nodes: int = 4097,
                          jobs: int = 1) -> ConvergenceStudy:
    """Shared limit run, one coupled run per epsilon, rate fit per column.

    Initial data for every coupled run is the order-1 approximation at the
    initial time, so the runs start on the asymptotic ansatz.  With jobs > 1
    the per-epsilon runs execute in separate processes; aggregation is
    sorted by decreasing epsilon either way, so output is deterministic.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise ValueError("a study needs at least 3 epsilon values")
    if any(e <= 0.0 for e in eps):
        raise ValueError("epsilon values must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon list must be strictly decreasing")
    if params_base.bc.kind != "wall":
        raise ValueError("the convergence study runs in wall mode")

    limit_run = run_limit(initial, limit_grid, params_base.bc,
                          params_base.ion_temp, t_end, samples=samples,
                          cfl=cfl)
    tasks = [StudyTask(limit_run, params_base.ion_temp,
                       params_base.wall_potential, params_base.domain_length,
                       e, t_end, samples, interior_cells, grading_ratio,
                       first_cell_scale, cfl, layer_nodes)
             for e in eps]

    records = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for rec in pool.map(run_single_epsilon, tasks):
                    records.append(rec)
        else:
            for task in tasks:
                records.append(run_single_epsilon(task))
    except SolverError as exc:
        done = sorted(records, key=lambda r: -r.epsilon)
        raise StudyAborted(
            f"study aborted after {len(done)} of {len(tasks)} runs: {exc}",
            done) from exc

    records.sort(key=lambda r: -r.epsilon)
    fits = {}
    for name in STUDY_COLUMNS:
        fits[name] = fit_rate([(r.epsilon, r.column(name)) for r in records])
    return ConvergenceStudy(records, fits)

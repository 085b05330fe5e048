"""Two-scale approximations: interior fields plus wall-layer correctors.

An approximation of order K combines interior fields of the limit system
with layer tabulations in the stretched coordinate z = x / eps:

    n ~ n0(t,x) + N0(t,z) + eps * (n1(t,x) + N1(t,z))
    u ~ u0(t,x)           + eps * (u1(t,x) + U1(t,z))
    phi ~ phi0(t,x) + P0(t,z) + eps * (phi1(t,x) + P1(t,z))

with phi0 = -log(n0) and phi1 = -n1/n0 from the neutrality relations.  The
layer pieces per time sample come from the profiles module; the first-order
interior pair (n1, u1) solves the linearization of the limit system around
(n0, u0), driven through the wall by the mass the layer swallows or releases
as its amplitude follows the wall density.

The first-order sources are derived for the one-dimensional wall problem
(u0 = 0 at the wall); docs/first_order_sources.md records the formulas in
the notation of this module.  Outflow runs are rejected here.
"""

from dataclasses import dataclass

import numpy as np

from . import fv, profiles
from .errors import SolverError
from .euler_limit import LimitRun
from .euler_poisson import PlasmaParams
from .grid import Grid1D

LAYER_NODES = 4097


def quadratic_interp(xs: np.ndarray, fs: np.ndarray, xt: np.ndarray) -> np.ndarray:
    """Piecewise-parabolic interpolation through cell-center samples.

    Each target uses the three-point Lagrange stencil around its interval,
    clamped at the ends, so values slightly outside the sample range (the
    wall face in particular) are quadratic extrapolations.  This routine is
    the single source of truth for interior-field evaluation, which makes
    wall matching of built bundles exact by construction.
    """
    xs = np.asarray(xs, dtype=float)
    xt = np.atleast_1d(np.asarray(xt, dtype=float))
    start = np.clip(np.searchsorted(xs, xt) - 1, 0, xs.size - 3)
    x0, x1, x2 = xs[start], xs[start + 1], xs[start + 2]
    f0, f1, f2 = fs[start], fs[start + 1], fs[start + 2]
    w0 = (xt - x1) * (xt - x2) / ((x0 - x1) * (x0 - x2))
    w1 = (xt - x0) * (xt - x2) / ((x1 - x0) * (x1 - x2))
    w2 = (xt - x0) * (xt - x1) / ((x2 - x0) * (x2 - x1))
    return w0 * f0 + w1 * f1 + w2 * f2


@dataclass
class ExpansionBundle:
    """Interior fields and layer tabulations of a built approximation."""

    order: int
    epsilon: float
    ion_temp: float
    wall_potential: float
    limit_run: LimitRun
    times: np.ndarray
    phi0_field: np.ndarray          # (samples, cells)
    z: np.ndarray                   # shared layer grid
    layer_phi0: np.ndarray          # (samples, nodes)
    layer_n0: np.ndarray
    gamma: np.ndarray               # wall density series
    psi: np.ndarray                 # wall layer amplitude series
    n1_field: np.ndarray | None = None
    u1_field: np.ndarray | None = None
    phi1_field: np.ndarray | None = None
    layer_phi1: np.ndarray | None = None
    layer_n1: np.ndarray | None = None
    layer_u1: np.ndarray | None = None
    psi1: np.ndarray | None = None
    boundary_u1: np.ndarray | None = None

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


@dataclass
class EvaluatedFields:
    """Approximation evaluated at a set of points, with the layer split off."""

    n: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    n_layer_part: np.ndarray
    phi_layer_part: np.ndarray


@dataclass
class ResidualReport:
    """Discrete L2 norms of the three model-equation residuals."""

    r_n_norm: float
    r_u_norm: float
    r_phi_norm: float
    epsilon: float


def _extrapolate_to_wall(centers: np.ndarray, values: np.ndarray) -> float:
    return float(quadratic_interp(centers, values, np.array([0.0]))[0])


def _time_derivative(series: np.ndarray, dt: float) -> np.ndarray:
    """Second-order time differencing along axis 0 of stacked samples."""
    out = np.empty_like(series)
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    out[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return out


def build_expansion(limit_run: LimitRun, params: PlasmaParams, order: int,
                    layer_nodes: int = LAYER_NODES,
                    tol: float = profiles.DEFAULT_TOL) -> ExpansionBundle:
    """Build the order-0 or order-1 approximation from a stored limit run."""
    if order not in (0, 1):
        raise ValueError("expansion order must be 0 or 1")
    if limit_run.bc.kind != "wall":
        raise ValueError("expansion is defined for wall boundary runs only")
    times = limit_run.times
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("limit run times must be strictly increasing")
    if np.any(limit_run.n <= 0.0):
        raise ValueError("limit run contains vacuum samples")
    if abs(limit_run.ion_temp - params.ion_temp) > 1e-14:
        raise ValueError("limit run and params disagree on ion_temp")

    centers = limit_run.grid.centers
    T = params.ion_temp
    n_samples = times.size
    dt = float(times[1] - times[0])

    phi0_field = -np.log(limit_run.n)
    phi0_trace = np.array([_extrapolate_to_wall(centers, phi0_field[k])
                           for k in range(n_samples)])
    gamma = np.exp(-phi0_trace)
    psi = params.wall_potential - phi0_trace

    rates = np.sqrt(gamma * (1.0 + 1.0 / T))
    z_max = profiles.MAX_SCALED_WALL / float(np.min(rates))
    prof_list = []
    for k in range(n_samples):
        p = profiles.SheathParams(float(gamma[k]), T, float(psi[k]),
                                  z_max=z_max, tol=tol)
        prof_list.append(profiles.solve_leading_profile(p, nodes=layer_nodes))
    z = prof_list[0].z
    layer_phi0 = np.stack([p.phi for p in prof_list])
    layer_n0 = np.stack([p.n_layer for p in prof_list])

    bundle = ExpansionBundle(order, params.epsilon, T, params.wall_potential,
                             limit_run, times, phi0_field, z, layer_phi0,
                             layer_n0, gamma, psi)
    if order == 0:
        return bundle

    # --- first-order layer mass source and induced interior wall velocity ---
    du0_trace = np.empty(n_samples)
    dn0_trace = np.empty(n_samples)
    for k in range(n_samples):
        du0 = np.gradient(limit_run.u[k], centers)
        dn0 = np.gradient(limit_run.n[k], centers)
        du0_trace[k] = _extrapolate_to_wall(centers, du0)
        dn0_trace[k] = _extrapolate_to_wall(centers, dn0)
    dphi0_trace = -dn0_trace / gamma

    dt_layer_n0 = _time_derivative(layer_n0, dt)
    mass_source = np.empty_like(layer_n0)
    boundary_u1 = np.empty(n_samples)
    layer_u1 = np.empty_like(layer_n0)
    for k in range(n_samples):
        prof = prof_list[k]
        # d/dz of (z * N0) from the tabulated branch slope, no differencing
        dn0_dz = (gamma[k] / T) * np.exp(prof.phi / T) * prof.dphi
        mass_source[k] = -dt_layer_n0[k] - du0_trace[k] * (prof.n_layer + z * dn0_dz)
        u_layer, trace = profiles.layer_velocity_corrector(
            prof, lambda zz, k=k: -np.interp(zz, z, mass_source[k]))
        layer_u1[k] = u_layer
        boundary_u1[k] = trace

    # --- first-order interior fields ---
    n1_field, u1_field = _solve_first_order_interior(limit_run, boundary_u1)
    phi1_field = -n1_field / limit_run.n
    psi1 = np.array([-_extrapolate_to_wall(centers, phi1_field[k])
                     for k in range(n_samples)])

    # --- first-order layer potential and density ---
    layer_phi1 = np.empty_like(layer_phi0)
    layer_n1 = np.empty_like(layer_phi0)
    for k in range(n_samples):
        prof = prof_list[k]
        total = prof.n_layer + gamma[k]            # layer-total ion density
        wall_phi1 = -psi1[k]
        wall_n1 = gamma[k] * psi1[k]
        dtotal_dz = (gamma[k] / T) * np.exp(prof.phi / T) * prof.dphi
        decaying_f3 = T * dn0_trace[k] * (
            (1.0 / total - 1.0 / gamma[k]) - z * dtotal_dz / total**2)
        cums = profiles.cumulative_trapezoid(decaying_f3, z)
        j3 = cums[-1] - cums
        forcing = (gamma[k] * np.expm1(-prof.phi) * (wall_phi1 + z * dphi0_trace[k])
                   + prof.n_layer * wall_n1 / gamma[k]
                   + total * j3 / T)
        problem = profiles.CorrectorProblem(prof,
                                            lambda zz, f=forcing: np.interp(zz, z, f),
                                            float(psi1[k]), z_max,
                                            grid_cells=layer_nodes - 1)
        solution = profiles.solve_linear_corrector(problem,
                                                   prof_list[k].params)
        layer_phi1[k] = solution.phi
        layer_n1[k] = (wall_n1 / gamma[k]) * prof.n_layer \
            + total * (solution.phi + j3) / T

    bundle.n1_field = n1_field
    bundle.u1_field = u1_field
    bundle.phi1_field = phi1_field
    bundle.layer_phi1 = layer_phi1
    bundle.layer_n1 = layer_n1
    bundle.layer_u1 = layer_u1
    bundle.psi1 = psi1
    bundle.boundary_u1 = boundary_u1
    return bundle


def _solve_first_order_interior(limit_run: LimitRun, boundary_u1: np.ndarray,
                                cfl: float = 0.4):
    """March the linearized limit system between stored samples.

    The pair (n1, u1) obeys a conservative linear system whose fluxes carry
    the frozen background (n0, u0); the background and the boundary forcing
    are interpolated linearly in time between samples.  Discretization
    mirrors the nonlinear solver: minmod MUSCL, a local Lax-Friedrichs flux
    and the two-stage strong-stability-preserving Runge-Kutta step.
    """
    grid = limit_run.grid
    csq = limit_run.ion_temp + 1.0
    c = np.sqrt(csq)
    times = limit_run.times
    positions = fv.pad_positions(grid.centers, grid.length)
    widths = grid.widths

    def background(t):
        k = min(int(np.searchsorted(times, t, side="right")) - 1, times.size - 2)
        k = max(k, 0)
        theta = (t - times[k]) / (times[k + 1] - times[k])
        n0 = (1.0 - theta) * limit_run.n[k] + theta * limit_run.n[k + 1]
        u0 = (1.0 - theta) * limit_run.u[k] + theta * limit_run.u[k + 1]
        g = (1.0 - theta) * boundary_u1[k] + theta * boundary_u1[k + 1]
        return n0, u0, float(g)

    def rate(n1, u1, t):
        n0, u0, g = background(t)
        n0_pad = fv.pad_wall(n0, flip=False)
        u0_pad = fv.pad_wall(u0, flip=True)
        n1_pad = np.concatenate(([n1[1], n1[0]], n1, [n1[-1], n1[-2]]))
        u1_pad = np.concatenate(([2.0 * g - u1[1], 2.0 * g - u1[0]], u1,
                                 [-u1[-1], -u1[-2]]))
        n1_l, n1_r = fv.muscl_faces(n1_pad, positions)
        u1_l, u1_r = fv.muscl_faces(u1_pad, positions)
        n0_f = 0.5 * (n0_pad[1:-2] + n0_pad[2:-1])
        u0_f = 0.5 * (u0_pad[1:-2] + u0_pad[2:-1])

        def flux(n1_s, u1_s):
            f0 = u0_f * n1_s + n0_f * u1_s
            f1 = u0_f * u1_s + csq * n1_s / n0_f
            return f0, f1

        f0_l, f1_l = flux(n1_l, u1_l)
        f0_r, f1_r = flux(n1_r, u1_r)
        alpha = np.abs(u0_f) + c
        f0 = 0.5 * (f0_l + f0_r) - 0.5 * alpha * (n1_r - n1_l)
        f1 = 0.5 * (f1_l + f1_r) - 0.5 * alpha * (u1_r - u1_l)
        return -(f0[1:] - f0[:-1]) / widths, -(f1[1:] - f1[:-1]) / widths

    n_samples = times.size
    cells = grid.n_cells
    n1_hist = np.zeros((n_samples, cells))
    u1_hist = np.zeros((n_samples, cells))
    n1 = np.zeros(cells)
    u1 = np.zeros(cells)
    speed = float(np.max(np.abs(limit_run.u)) + c)
    dt_cfl = cfl * float(np.min(widths)) / speed
    for k in range(n_samples - 1):
        t = float(times[k])
        target = float(times[k + 1])
        while t < target - 1e-14 * max(1.0, target):
            dt = min(dt_cfl, target - t)
            dn1, du1 = rate(n1, u1, t)
            n1_s = n1 + dt * dn1
            u1_s = u1 + dt * du1
            dn2, du2 = rate(n1_s, u1_s, t + dt)
            n1 = n1 + 0.5 * dt * (dn1 + dn2)
            u1 = u1 + 0.5 * dt * (du1 + du2)
            t += dt
        n1_hist[k + 1] = n1
        u1_hist[k + 1] = u1
    return n1_hist, u1_hist


def _time_bracket(bundle: ExpansionBundle, t: float):
    times = bundle.times
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise ValueError(f"t = {t} outside the bundle window "
                         f"[{times[0]}, {times[-1]}]")
    k = min(int(np.searchsorted(times, t, side="right")) - 1, times.size - 2)
    k = max(k, 0)
    theta = (t - times[k]) / (times[k + 1] - times[k])
    theta = min(max(theta, 0.0), 1.0)
    return k, theta


def evaluate_at(bundle: ExpansionBundle, t: float, x: np.ndarray) -> EvaluatedFields:
    """Evaluate the approximation at arbitrary points of [0, L].

    Interior fields are parabolic in x and linear in t; layer tabulations are
    linear in z = x/eps and in t, and vanish beyond the tabulated range.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, theta = _time_bracket(bundle, t)
    centers = bundle.limit_run.grid.centers
    eps = bundle.epsilon
    z_pts = x / eps

    def interior(field):
        a = quadratic_interp(centers, field[k], x)
        if theta == 0.0:
            return a
        b = quadratic_interp(centers, field[k + 1], x)
        return (1.0 - theta) * a + theta * b

    def layer(tab):
        a = np.interp(z_pts, bundle.z, tab[k], right=0.0)
        if theta == 0.0:
            return a
        b = np.interp(z_pts, bundle.z, tab[k + 1], right=0.0)
        return (1.0 - theta) * a + theta * b

    n = interior(bundle.limit_run.n)
    u = interior(bundle.limit_run.u)
    phi = interior(bundle.phi0_field)
    n_layer = layer(bundle.layer_n0)
    phi_layer = layer(bundle.layer_phi0)
    if bundle.order >= 1:
        n = n + eps * interior(bundle.n1_field)
        u = u + eps * (interior(bundle.u1_field) + layer(bundle.layer_u1))
        phi = phi + eps * interior(bundle.phi1_field)
        n_layer = n_layer + eps * layer(bundle.layer_n1)
        phi_layer = phi_layer + eps * layer(bundle.layer_phi1)
    return EvaluatedFields(n + n_layer, u, phi + phi_layer, n_layer, phi_layer)


def evaluate(bundle: ExpansionBundle, t: float, grid: Grid1D) -> EvaluatedFields:
    """Evaluate the approximation at the cell centers of a grid."""
    return evaluate_at(bundle, t, grid.centers)


def residual(bundle: ExpansionBundle, params: PlasmaParams, grid: Grid1D,
             t: float) -> ResidualReport:
    """Apply the discrete coupled-model operator to the evaluated bundle.

    Time derivatives use centered differencing across the sample spacing, so
    t must sit at least one spacing away from the window ends.  Spatial
    derivatives are centered three-point formulas on the grid's interior
    cells; the momentum balance differences T*log(n) - phi as one field so
    the dominant layer content cancels pointwise rather than numerically.
    """
    dt = float(bundle.times[1] - bundle.times[0])
    if t - dt < bundle.times[0] - 1e-12 or t + dt > bundle.t_end + 1e-12:
        raise ValueError("t too close to the bundle window ends for "
                         "centered time differencing")
    x = grid.centers
    now = evaluate_at(bundle, t, x)
    fwd = evaluate_at(bundle, t + dt, x)
    bwd = evaluate_at(bundle, t - dt, x)
    dt_n = (fwd.n - bwd.n) / (2.0 * dt)
    dt_u = (fwd.u - bwd.u) / (2.0 * dt)

    d_l = x[1:-1] - x[:-2]
    d_r = x[2:] - x[1:-1]

    def d1(f):
        return (d_l**2 * f[2:] - d_r**2 * f[:-2]
                + (d_r**2 - d_l**2) * f[1:-1]) / (d_l * d_r * (d_l + d_r))

    def d2(f):
        return 2.0 * (d_l * f[2:] + d_r * f[:-2]
                      - (d_l + d_r) * f[1:-1]) / (d_l * d_r * (d_l + d_r))

    T = params.ion_temp
    eps_sq = params.epsilon ** 2
    r_mass = dt_n[1:-1] + d1(now.n * now.u)
    r_mom = dt_u[1:-1] + now.u[1:-1] * d1(now.u) + d1(T * np.log(now.n) - now.phi)
    r_poisson = eps_sq * d2(now.phi) + np.exp(-now.phi[1:-1]) - now.n[1:-1]

    w = grid.widths[1:-1]

    def l2(r):
        return float(np.sqrt(np.sum(r * r * w)))

    return ResidualReport(l2(r_mass), l2(r_mom), l2(r_poisson),
                          params.epsilon)


def export_bundle(bundle: ExpansionBundle, grid: Grid1D, outdir: str) -> list:
    """Write one CSV per stored sample time; returns the file paths."""
    import os

    from .csvio import write_csv

    paths = []
    for k, t in enumerate(bundle.times):
        fields = evaluate(bundle, float(t), grid)
        path = os.path.join(outdir, f"bundle_{k:03d}.csv")
        write_csv(path,
                  ["x", "n_a", "u_a", "phi_a", "n_layer_part", "phi_layer_part"],
                  [grid.centers, fields.n, fields.u, fields.phi,
                   fields.n_layer_part, fields.phi_layer_part])
        paths.append(path)
    return paths

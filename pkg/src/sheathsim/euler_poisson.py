"""Coupled ion fluid / electron potential solver on [0, L].

The ion fluid carries pressure T * n and a momentum source n * dphi/dx; the
potential solves the semilinear elliptic balance

    eps**2 * phi'' + exp(-phi) = n,    phi(0) = phi_b,  phi(L) = -log(n(L)),

which is quasineutral at the interior scale and develops a wall layer of
width eps.  The right condition matches the neutral branch, so layer-free
states satisfy it exactly.  The elliptic solve is a damped Newton iteration
on a cell-centered three-point Laplacian; the Jacobian is tridiagonal and
negative definite, so plain banded factorization applies.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import fv
from .errors import NewtonError, VacuumError
from .euler_limit import (BoundaryMode, FluidState, _divergence, stable_dt)
from .grid import Grid1D

NEWTON_MAX_ITS = 50
NEWTON_MAX_BACKTRACKS = 30
MIN_EPS_PER_DOMAIN = 20.0
# near-wall speeds beyond this fraction of the sonic value flag marginal data
NEAR_WALL_SPEED_FACTOR = np.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class PlasmaParams:
    """Physical parameters of the coupled model."""

    ion_temp: float
    epsilon: float
    wall_potential: float
    bc: BoundaryMode = BoundaryMode()
    domain_length: float = 1.0

    def __post_init__(self):
        if not self.ion_temp > 0.0:
            raise ValueError("ion_temp must be positive")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.domain_length < MIN_EPS_PER_DOMAIN * self.epsilon:
            raise ValueError(
                f"domain length must be at least {MIN_EPS_PER_DOMAIN} * epsilon")
        self.bc.check_subsonic(self.ion_temp)


@dataclass
class PotentialField:
    """Cell-centered potential with derivative and Newton diagnostics."""

    phi: np.ndarray
    dphi: np.ndarray
    newton_iterations: int
    newton_residual: float
    residual_history: np.ndarray


def _spacings(positions: np.ndarray, length: float):
    """Distances from each cell center to its neighbors (anchors at 0, L)."""
    left = np.concatenate(([0.0], positions))
    right = np.concatenate((positions, [length]))
    return positions - left[:-1], right[1:] - positions


def _laplacian_bands(d_l, d_r):
    """Three-point second-difference coefficients with Dirichlet anchors."""
    lower = 2.0 / (d_l * (d_l + d_r))
    upper = 2.0 / (d_r * (d_l + d_r))
    diag = -2.0 / (d_l * d_r)
    return lower, diag, upper


def _apply_laplacian(d_l, d_r, phi, phi_left, phi_right):
    """Flux-difference form of the banded operator.

    Identical to applying the three-point coefficients, but the neighbor
    differences happen before any 1/h^2-sized product, so the residual of a
    near-converged field is not drowned in rounding noise on fine meshes.
    """
    padded = np.concatenate(([phi_left], phi, [phi_right]))
    flux_in = (padded[1:-1] - padded[:-2]) / d_l
    flux_out = (padded[2:] - padded[1:-1]) / d_r
    return 2.0 * (flux_out - flux_in) / (d_l + d_r)


def gradient_with_anchors(positions: np.ndarray, values: np.ndarray,
                          left: tuple, right: tuple) -> np.ndarray:
    """Second-order derivative at cell centers, anchored Dirichlet ends.

    Interior centers use the centered nonuniform formula; the first and last
    center use the quadratic through the adjacent boundary anchor.
    """
    x = np.concatenate(([left[0]], positions, [right[0]]))
    f = np.concatenate(([left[1]], values, [right[1]]))
    d_l = x[1:-1] - x[:-2]
    d_r = x[2:] - x[1:-1]
    return (d_l * d_l * f[2:] - d_r * d_r * f[:-2]
            + (d_r * d_r - d_l * d_l) * f[1:-1]) / (d_l * d_r * (d_l + d_r))


def solve_poisson(n: np.ndarray, params: PlasmaParams, grid: Grid1D,
                  phi_init: np.ndarray | None = None) -> PotentialField:
    """Damped Newton solve of the potential balance for a given density.

    Starts from the neutral guess -log(n) unless an initial field is given.
    The max-norm residual is required to decrease at every accepted iterate;
    convergence means max|residual| <= 1e-10 * max(1, max(n)).
    """
    n = np.asarray(n, dtype=float)
    if n.shape != grid.centers.shape:
        raise ValueError("density and grid sizes differ")
    if np.any(n <= 0.0):
        raise VacuumError("density must be positive for the potential solve")
    eps_sq = params.epsilon ** 2
    phi_left = params.wall_potential
    phi_right = -np.log(n[-1])
    d_l, d_r = _spacings(grid.centers, grid.length)
    lower, diag, upper = _laplacian_bands(d_l, d_r)

    phi = (-np.log(n)).copy() if phi_init is None else np.asarray(phi_init, dtype=float).copy()
    tol = 1e-10 * max(1.0, float(np.max(n)))

    def residual(field):
        return eps_sq * _apply_laplacian(d_l, d_r, field,
                                         phi_left, phi_right) + np.exp(-field) - n

    res = residual(phi)
    res_norm = float(np.max(np.abs(res)))
    history = [res_norm]
    iterations = 0
    bands = np.zeros((3, grid.n_cells))
    while res_norm > tol:
        if iterations >= NEWTON_MAX_ITS:
            raise NewtonError(
                f"potential solve stalled at residual {res_norm:.3e} "
                f"after {iterations} iterations")
        bands[0, 1:] = eps_sq * upper[:-1]
        bands[1, :] = eps_sq * diag - np.exp(-phi)
        bands[2, :-1] = eps_sq * lower[1:]
        delta = solve_banded((1, 1), bands, -res)
        alpha = 1.0
        for _ in range(NEWTON_MAX_BACKTRACKS):
            trial = phi + alpha * delta
            trial_res = residual(trial)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm:
                break
            alpha *= 0.5
        else:
            raise NewtonError("potential line search failed to reduce residual")
        phi, res, res_norm = trial, trial_res, trial_norm
        history.append(res_norm)
        iterations += 1

    dphi = gradient_with_anchors(grid.centers, phi,
                                 (0.0, phi_left), (grid.length, phi_right))
    return PotentialField(phi, dphi, iterations, res_norm, np.array(history))


@dataclass
class EnergyReport:
    kinetic: float
    ion_entropy: float
    electron_term: float
    field_term: float

    @property
    def total(self) -> float:
        return self.kinetic + self.ion_entropy + self.electron_term + self.field_term


def energy_functional(state: FluidState, potential: PotentialField,
                      params: PlasmaParams, grid: Grid1D) -> EnergyReport:
    """Total energy split into its four contributions (midpoint quadrature)."""
    w = grid.widths
    n, u = state.n, state.u
    phi, dphi = potential.phi, potential.dphi
    kinetic = 0.5 * float(np.sum(n * u * u * w))
    ion_entropy = params.ion_temp * float(np.sum(n * (np.log(n) - 1.0) * w))
    electron = float(np.sum((1.0 - phi) * np.exp(-phi) * w))
    field = 0.5 * params.epsilon ** 2 * float(np.sum(dphi * dphi * w))
    return EnergyReport(kinetic, ion_entropy, electron, field)


def quasineutrality_residual(state: FluidState, potential: PotentialField,
                             grid: Grid1D, exclusion: float) -> float:
    """max |n - exp(-phi)| over cells with center x > exclusion."""
    keep = grid.centers > exclusion
    if not np.any(keep):
        raise ValueError("exclusion removes every cell")
    return float(np.max(np.abs(state.n[keep] - np.exp(-potential.phi[keep]))))


def check_layer_resolution(grid: Grid1D, epsilon: float) -> None:
    inside = int(np.sum(grid.centers < 5.0 * epsilon))
    if inside < 8:
        raise ValueError("grid does not resolve the wall layer "
                         f"({inside} cells inside 5 * epsilon)")


def near_wall_speed_marginal(state: FluidState, grid: Grid1D,
                             params: PlasmaParams) -> bool:
    """True when the near-wall flow speed crowds the sonic value."""
    near = grid.centers < 5.0 * params.epsilon
    if not np.any(near):
        return False
    limit = NEAR_WALL_SPEED_FACTOR * np.sqrt(params.ion_temp)
    return bool(np.max(np.abs(state.u[near])) > limit)


def step_full(state: FluidState, params: PlasmaParams, grid: Grid1D, dt: float,
              phi_hint: np.ndarray | None = None):
    """One SSP-RK2 step of the coupled system.

    The potential is re-solved at every stage and enters the momentum update
    as the source n * dphi.  Returns (state, potential, flux_left, flux_right)
    where the potential belongs to the *starting* stage (callers wanting the
    field of the new state re-solve once per sample).
    """
    csq = params.ion_temp

    pot1 = solve_poisson(state.n, params, grid, phi_init=phi_hint)
    dn1, dm1, fl1, fr1 = _divergence(state, grid, params.bc, csq)
    n1 = state.n + dt * dn1
    m1 = state.n * state.u + dt * (dm1 + state.n * pot1.dphi)
    if not np.all(n1 > fv.VACUUM_FLOOR):
        raise VacuumError(f"vacuum formation at t = {state.t:.6g}")
    stage = FluidState(n1, m1 / n1, state.t + dt)

    pot2 = solve_poisson(stage.n, params, grid, phi_init=pot1.phi)
    dn2, dm2, fl2, fr2 = _divergence(stage, grid, params.bc, csq)
    n_new = state.n + 0.5 * dt * (dn1 + dn2)
    m_new = state.n * state.u + 0.5 * dt * (
        dm1 + state.n * pot1.dphi + dm2 + stage.n * pot2.dphi)
    if not np.all(n_new > fv.VACUUM_FLOOR):
        raise VacuumError(f"vacuum formation at t = {state.t:.6g}")
    new = FluidState(n_new, m_new / n_new, state.t + dt)
    flux_left = 0.5 * dt * (fl1 + fl2)
    flux_right = 0.5 * dt * (fr1 + fr2)
    return new, pot1, flux_left, flux_right


@dataclass
class FullRun:
    """Stored samples and step-level bookkeeping of a coupled run."""

    grid: Grid1D
    params: PlasmaParams
    times: np.ndarray
    n: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    energy: list = field(default_factory=list)
    step_times: np.ndarray | None = None
    step_mass: np.ndarray | None = None
    step_boundary_flux: np.ndarray | None = None

    def sample_index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a stored sample time")
        return k


def run_full(initial: FluidState, params: PlasmaParams, grid: Grid1D,
             t_end: float, samples: int = 20,
             cfl: float = 0.4) -> FullRun:
    """Advance the coupled system to t_end with uniformly spaced samples.

    Also records, per time step, the total mass after the step and the
    time-integrated boundary mass flux over the step, so mass bookkeeping can
    be audited exactly.
    """
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    check_layer_resolution(grid, params.epsilon)
    sample_times = np.linspace(0.0, t_end, samples)
    state = initial.copy()
    state.t = 0.0
    csq = params.ion_temp

    n_hist = np.empty((samples, grid.n_cells))
    u_hist = np.empty((samples, grid.n_cells))
    phi_hist = np.empty((samples, grid.n_cells))
    dphi_hist = np.empty((samples, grid.n_cells))
    energies = []

    pot = solve_poisson(state.n, params, grid)
    n_hist[0], u_hist[0] = state.n, state.u
    phi_hist[0], dphi_hist[0] = pot.phi, pot.dphi
    energies.append(energy_functional(state, pot, params, grid))

    step_times, step_mass, step_flux = [], [], []
    phi_hint = pot.phi
    next_sample = 1
    while next_sample < samples:
        target = sample_times[next_sample]
        dt = min(stable_dt(state, grid, csq, cfl), target - state.t)
        state, pot, flux_l, flux_r = step_full(state, params, grid, dt,
                                               phi_hint=phi_hint)
        phi_hint = pot.phi
        step_times.append(state.t)
        step_mass.append(float(np.sum(state.n * grid.widths)))
        step_flux.append(flux_l - flux_r)
        if state.t >= target - 1e-14 * max(1.0, target):
            state.t = target
            final_pot = solve_poisson(state.n, params, grid, phi_init=phi_hint)
            n_hist[next_sample], u_hist[next_sample] = state.n, state.u
            phi_hist[next_sample] = final_pot.phi
            dphi_hist[next_sample] = final_pot.dphi
            energies.append(energy_functional(state, final_pot, params, grid))
            next_sample += 1
    return FullRun(grid, params, sample_times, n_hist, u_hist, phi_hist,
                   dphi_hist, energies, np.array(step_times),
                   np.array(step_mass), np.array(step_flux))

"""Charge-neutral limit fluid solver on [0, L].

The limit of the coupled ion/potential model is an isothermal Euler system
whose effective sound speed squared is T + 1: the ion pressure plus the
electron response folded in through the neutrality relation n = exp(-phi).
Discretization: HLL fluxes with minmod-limited MUSCL reconstruction and a
two-stage strong-stability-preserving Runge-Kutta step.

x = 0 carries the physical boundary (impermeable wall or subsonic outflow);
x = L truncates the half line and is treated as a mirror wall.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fv
from .errors import SolverError, VacuumError
from .grid import Grid1D

DEFAULT_CFL = 0.4


@dataclass(frozen=True)
class BoundaryMode:
    """Boundary treatment at x = 0.

    kind 'wall' reflects (u -> -u); kind 'outflow' pins the face velocity to
    u_b < 0 and extrapolates the density at zeroth order.  The outflow value
    must be subsonic for the system being solved, which is checked by the
    caller because the admissible window depends on the sound speed.
    """

    kind: str = "wall"
    u_b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("wall", "outflow"):
            raise ValueError("boundary kind must be 'wall' or 'outflow'")
        if self.kind == "outflow" and not self.u_b < 0.0:
            raise ValueError("outflow velocity must be negative")

    def check_subsonic(self, csq: float) -> None:
        if self.kind == "outflow" and not -np.sqrt(csq) < self.u_b:
            raise ValueError(
                f"outflow velocity {self.u_b} not subsonic for sound speed "
                f"{np.sqrt(csq):.6g}")


@dataclass
class FluidState:
    """Cell-centered primitive state at a given time."""

    n: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def copy(self) -> "FluidState":
        return FluidState(self.n.copy(), self.u.copy(), self.t)


def limit_flux(left, right, ion_temp: float):
    """HLL interface flux of the limit system for primitive states (n, u)."""
    csq = ion_temp + 1.0
    n_l, u_l = left
    n_r, u_r = right
    f0, f1 = fv.hll_flux(np.asarray(n_l, dtype=float), np.asarray(u_l, dtype=float),
                         np.asarray(n_r, dtype=float), np.asarray(u_r, dtype=float),
                         csq)
    return f0, f1


def _pad(state: FluidState, bc: BoundaryMode):
    if bc.kind == "wall":
        n_pad = fv.pad_wall(state.n, flip=False)
        u_pad = fv.pad_wall(state.u, flip=True)
    else:
        n_pad = fv.pad_left_outflow_right_wall(state.n, False, None)
        u_pad = fv.pad_left_outflow_right_wall(state.u, True, bc.u_b)
    return n_pad, u_pad


def _face_fluxes(state: FluidState, grid: Grid1D, bc: BoundaryMode, csq: float):
    n_pad, u_pad = _pad(state, bc)
    positions = fv.pad_positions(grid.centers, grid.length)
    n_left, n_right = fv.muscl_faces(n_pad, positions)
    u_left, u_right = fv.muscl_faces(u_pad, positions)
    return fv.hll_flux(n_left, u_left, n_right, u_right, csq)


def _divergence(state: FluidState, grid: Grid1D, bc: BoundaryMode, csq: float):
    """Conservative update rates for (n, n*u) plus boundary mass fluxes."""
    f0, f1 = _face_fluxes(state, grid, bc, csq)
    dn = -(f0[1:] - f0[:-1]) / grid.widths
    dm = -(f1[1:] - f1[:-1]) / grid.widths
    return dn, dm, float(f0[0]), float(f0[-1])


def stable_dt(state: FluidState, grid: Grid1D, csq: float,
              cfl: float = DEFAULT_CFL) -> float:
    speed = float(np.max(np.abs(state.u)) + np.sqrt(csq))
    return cfl * float(np.min(grid.widths)) / speed


def _check_positive(n: np.ndarray, t: float) -> None:
    if not np.all(n > fv.VACUUM_FLOOR):
        raise VacuumError(f"vacuum formation at t = {t:.6g} "
                          f"(min density {float(np.min(n)):.3e})")


def step_limit(state: FluidState, grid: Grid1D, bc: BoundaryMode,
               ion_temp: float, dt: float):
    """One SSP-RK2 step of the limit system.

    Returns the updated state and the time-integrated mass flux through the
    x=0 and x=L faces over the step (positive means into the domain at x=0).
    """
    if ion_temp < 0.0:
        raise ValueError("ion_temp must be nonnegative")
    csq = ion_temp + 1.0
    bc.check_subsonic(csq)

    dn1, dm1, fl1, fr1 = _divergence(state, grid, bc, csq)
    n1 = state.n + dt * dn1
    m1 = state.n * state.u + dt * dm1
    _check_positive(n1, state.t)
    stage = FluidState(n1, m1 / n1, state.t + dt)

    dn2, dm2, fl2, fr2 = _divergence(stage, grid, bc, csq)
    n_new = state.n + 0.5 * dt * (dn1 + dn2)
    m_new = state.n * state.u + 0.5 * dt * (dm1 + dm2)
    _check_positive(n_new, state.t)
    new = FluidState(n_new, m_new / n_new, state.t + dt)
    flux_left = 0.5 * dt * (fl1 + fl2)
    flux_right = 0.5 * dt * (fr1 + fr2)
    return new, flux_left, flux_right


def boundary_trace(state: FluidState, grid: Grid1D):
    """Linear extrapolation of (n, u) from the first two cells to x = 0.

    Second-order accurate for smooth fields; exact on linear data.  Aborts if
    the extrapolated density is not positive.
    """
    x0, x1 = grid.centers[:2]
    theta = x0 / (x1 - x0)
    gamma = float(state.n[0] - theta * (state.n[1] - state.n[0]))
    u_trace = float(state.u[0] - theta * (state.u[1] - state.u[0]))
    if gamma <= 0.0:
        raise SolverError("extrapolated wall density is not positive")
    return gamma, u_trace


@dataclass
class LimitRun:
    """Stored time samples of a limit-system run."""

    grid: Grid1D
    ion_temp: float
    bc: BoundaryMode
    times: np.ndarray
    n: np.ndarray  # (samples, cells)
    u: np.ndarray
    mass_series: list = field(default_factory=list)

    def sample_index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a stored sample time")
        return k


def run_limit(initial: FluidState, grid: Grid1D, bc: BoundaryMode,
              ion_temp: float, t_end: float, samples: int = 20,
              cfl: float = DEFAULT_CFL) -> LimitRun:
    """Advance the limit system to t_end, storing uniformly spaced samples."""
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    csq = ion_temp + 1.0
    bc.check_subsonic(csq)
    sample_times = np.linspace(0.0, t_end, samples)
    state = initial.copy()
    state.t = 0.0

    n_hist = np.empty((samples, grid.n_cells))
    u_hist = np.empty((samples, grid.n_cells))
    n_hist[0] = state.n
    u_hist[0] = state.u
    next_sample = 1
    while next_sample < samples:
        target = sample_times[next_sample]
        dt = min(stable_dt(state, grid, csq, cfl), target - state.t)
        state, _, _ = step_limit(state, grid, bc, ion_temp, dt)
        if state.t >= target - 1e-14 * max(1.0, target):
            state.t = target
            n_hist[next_sample] = state.n
            u_hist[next_sample] = state.u
            next_sample += 1
    return LimitRun(grid, ion_temp, bc, sample_times, n_hist, u_hist)

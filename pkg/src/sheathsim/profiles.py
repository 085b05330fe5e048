"""Sheath boundary-layer profiles in the stretched wall coordinate z.

The leading-order layer potential solves the planar sheath equation

    phi'' + gamma * (exp(-phi) - exp(phi / T)) = 0,    phi(0) = psi,  phi -> 0,

whose decaying solutions form the stable manifold of the saddle at the origin
of the (phi, phi') phase plane.  The conserved energy of that system is

    H(p, phi) = p**2 / 2 - gamma * (exp(-phi) + T * exp(phi / T) - 1 - T)

and the decaying branch satisfies H = 0, which pins the slope as an explicit
function of phi.  We integrate that first-order reduction; a shooting solver
for the second-order form is kept in the test suite as an independent check.

First-order corrections in the layer solve the linearization of the sheath
equation around the leading profile, a two-point boundary value problem with
exponentially decaying forcing.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .errors import SolverError

# exp(|phi|/min(1,T)) beyond this is outside the supported sheath regime
MAX_SCALED_WALL = 40.0

DEFAULT_TOL = 1e-10
DEFAULT_NODES = 4097
# switch to the series form of the potential well below this scaled amplitude
_SERIES_CUT = 1e-3


@dataclass(frozen=True)
class SheathParams:
    """Parameters of the leading-order layer problem.

    gamma       ion density just outside the layer (coefficient of the
                nonlinearity), > 0
    ion_temp    ion-to-electron temperature ratio, > 0
    wall_value  potential jump the layer has to bridge at z = 0
    z_max       truncation of the half line; 0 means choose 40 / decay_rate
    tol         relative tolerance of the profile integration
    """

    gamma: float
    ion_temp: float
    wall_value: float
    z_max: float = 0.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.ion_temp > 0.0:
            raise ValueError("ion_temp must be positive")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if abs(self.wall_value) / min(1.0, self.ion_temp) > MAX_SCALED_WALL:
            raise ValueError("wall potential out of supported range")
        if self.z_max == 0.0:
            object.__setattr__(self, "z_max", MAX_SCALED_WALL / self.decay_rate)
        elif not self.z_max > 0.0:
            raise ValueError("z_max must be positive")

    @property
    def decay_rate(self) -> float:
        """Linearized decay rate of the profile, sqrt(gamma * (1 + 1/T))."""
        return float(np.sqrt(self.gamma * (1.0 + 1.0 / self.ion_temp)))


def s_nonlinearity(phi, ion_temp):
    """Charge imbalance exp(-phi) - exp(phi/T) driving the layer equation."""
    phi = np.asarray(phi, dtype=float)
    return np.exp(-phi) - np.exp(phi / ion_temp)


def s_derivative(phi, ion_temp):
    """d/dphi of s_nonlinearity; strictly negative for all phi."""
    phi = np.asarray(phi, dtype=float)
    return -np.exp(-phi) - np.exp(phi / ion_temp) / ion_temp


def _potential_well(phi, ion_temp):
    """exp(-phi) + T*exp(phi/T) - 1 - T, evaluated without cancellation.

    The expm1 form is accurate down to |phi| ~ 1e-8; below that the leading
    quadratic would drown in the rounding of the two opposite linear parts, so
    a short Taylor series in phi takes over.  Nonnegative up to round-off.
    """
    phi = np.asarray(phi, dtype=float)
    T = ion_temp
    direct = np.expm1(-phi) + T * np.expm1(phi / T)
    c2 = (1.0 + 1.0 / T) / 2.0
    c3 = (1.0 / T**2 - 1.0) / 6.0
    c4 = (1.0 + 1.0 / T**3) / 24.0
    c5 = (1.0 / T**4 - 1.0) / 120.0
    c6 = (1.0 + 1.0 / T**5) / 720.0
    series = phi * phi * (c2 + phi * (c3 + phi * (c4 + phi * (c5 + phi * c6))))
    small = np.abs(phi) < _SERIES_CUT * min(1.0, T)
    return np.where(small, series, direct)


def hamiltonian(p, phi, params: SheathParams):
    """Phase-plane energy; zero along the decaying branch."""
    p = np.asarray(p, dtype=float)
    return 0.5 * p * p - params.gamma * _potential_well(phi, params.ion_temp)


def stable_manifold_slope(phi, params: SheathParams):
    """Slope dphi/dz of the decaying branch as a function of phi.

    Solves H(p, phi) = 0 for p with the sign that makes phi decay: opposite
    to phi itself.  The radicand is clamped at zero against round-off.
    """
    phi = np.asarray(phi, dtype=float)
    well = np.maximum(_potential_well(phi, params.ion_temp), 0.0)
    return -np.sign(phi) * np.sqrt(2.0 * params.gamma * well)


def density_layer(phi, gamma, ion_temp):
    """Ion density carried by the layer, gamma * (exp(phi/T) - 1) > -gamma."""
    phi = np.asarray(phi, dtype=float)
    return gamma * np.expm1(phi / ion_temp)


@dataclass(frozen=True)
class SheathProfile:
    """Tabulated layer profile on a uniform z grid.

    phi carries the potential, dphi its z-derivative on the decaying branch,
    n_layer the layer part of the ion density.  decay_rate repeats the
    linearized rate for convenience of callers fitting tails.
    """

    z: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    n_layer: np.ndarray
    decay_rate: float
    params: SheathParams

    def validate(self, tol_scale: float = 10.0) -> None:
        """Check the tabulation invariants; raise ValueError on violation."""
        psi = self.params.wall_value
        tol = self.params.tol
        if self.phi[0] != psi:
            raise ValueError("profile does not start at the wall value")
        if abs(self.phi[-1]) > tol_scale * tol:
            raise ValueError("profile has not decayed at z_max")
        diffs = np.diff(self.phi)
        if psi > 0.0 and np.any(diffs > 0.0):
            raise ValueError("profile not monotone nonincreasing")
        if psi < 0.0 and np.any(diffs < 0.0):
            raise ValueError("profile not monotone nondecreasing")
        if np.any(np.sign(self.phi) * np.sign(psi) < 0.0):
            raise ValueError("profile changes sign")
        if np.any(self.n_layer + self.params.gamma <= 0.0):
            raise ValueError("total layer density not positive")


def solve_leading_profile(params: SheathParams, nodes: int = DEFAULT_NODES) -> SheathProfile:
    """Integrate the decaying branch from the wall and tabulate it.

    Uses an adaptive high-order Runge-Kutta scheme on dphi/dz =
    stable_manifold_slope(phi) with pure relative error control, so the
    exponential tail keeps relative accuracy all the way down to the last
    node.  Returns the profile resampled on `nodes` uniform points.
    """
    if nodes < 2:
        raise ValueError("need at least two tabulation nodes")
    z = np.linspace(0.0, params.z_max, nodes)
    psi = params.wall_value
    if psi == 0.0:
        zero = np.zeros_like(z)
        return SheathProfile(z, zero, zero.copy(), zero.copy(),
                             params.decay_rate, params)

    def rhs(_z, y):
        return stable_manifold_slope(y, params)

    sol = solve_ivp(rhs, (0.0, params.z_max), [psi], method="DOP853",
                    rtol=params.tol, atol=0.0, dense_output=True)
    if not sol.success:
        raise SolverError(f"profile integration failed: {sol.message}")
    phi = sol.sol(z)[0]
    phi[0] = psi
    # keep the tabulation on the correct side of zero and monotone; the
    # corrections are at interpolation round-off level
    if psi > 0.0:
        phi = np.minimum.accumulate(np.maximum(phi, 0.0))
    else:
        phi = np.maximum.accumulate(np.minimum(phi, 0.0))
    dphi = stable_manifold_slope(phi, params)
    n_layer = density_layer(phi, params.gamma, params.ion_temp)
    profile = SheathProfile(z, phi, dphi, n_layer, params.decay_rate, params)
    profile.validate()
    return profile


@dataclass(frozen=True)
class CorrectorProblem:
    """Linearized layer problem around a base profile.

    Seeks the decaying solution of

        phi'' + gamma * s_derivative(base_phi) * phi = forcing(z)

    with phi(0) = wall_value and phi(z_max) = 0 as the truncated far condition.
    The base profile is interpolated onto the corrector grid where needed.
    """

    base_profile: SheathProfile
    forcing: Callable
    wall_value: float
    z_max: float
    grid_cells: int = 4096

    def __post_init__(self):
        if not self.z_max > 0.0:
            raise ValueError("z_max must be positive")
        if self.grid_cells < 16:
            raise ValueError("need at least 16 corrector cells")


@dataclass(frozen=True)
class CorrectorSolution:
    z: np.ndarray
    phi: np.ndarray
    wall_value: float
    max_residual: float


def solve_linear_corrector(problem: CorrectorProblem, params: SheathParams) -> CorrectorSolution:
    """Solve the corrector two-point problem with central differences.

    The zero-order coefficient gamma * s_derivative(base) is strictly negative,
    so the tridiagonal system is strictly diagonally dominant and a direct
    banded solve is safe at any resolution.
    """
    m = problem.grid_cells
    z = np.linspace(0.0, problem.z_max, m + 1)
    h = problem.z_max / m
    base = np.interp(z, problem.base_profile.z, problem.base_profile.phi,
                     right=0.0)
    coeff = params.gamma * s_derivative(base, params.ion_temp)
    if np.any(coeff >= 0.0):
        raise SolverError("corrector operator lost coercivity")
    forcing = np.asarray(problem.forcing(z), dtype=float)
    if forcing.shape != z.shape:
        forcing = np.full_like(z, float(forcing))

    interior = slice(1, m)
    diag = -2.0 / h**2 + coeff[interior]
    off = np.full(m - 1, 1.0 / h**2)
    rhs = forcing[interior].copy()
    rhs[0] -= problem.wall_value / h**2
    bands = np.zeros((3, m - 1))
    bands[0, 1:] = off[:-1]
    bands[1, :] = diag
    bands[2, :-1] = off[:-1]
    phi_int = solve_banded((1, 1), bands, rhs)

    phi = np.concatenate(([problem.wall_value], phi_int, [0.0]))
    residual = (phi[:-2] - 2.0 * phi[1:-1] + phi[2:]) / h**2 \
        + coeff[interior] * phi[1:-1] - forcing[interior]
    return CorrectorSolution(z, phi, problem.wall_value,
                             float(np.max(np.abs(residual))))


def layer_velocity_corrector(profile: SheathProfile, source: Callable,
                             order: int = 1):
    """Integrate the layer mass balance for the first-order layer velocity.

    `source` is the z-integrand of that balance.  Returns the tabulated layer
    velocity on the profile grid together with the induced boundary value of
    the interior velocity, defined so the layer part vanishes at z_max.
    """
    if order != 1:
        raise ValueError("only the first-order layer velocity is defined")
    gamma = profile.params.gamma
    total_density = profile.n_layer + gamma
    if np.any(total_density <= 0.0):
        raise SolverError("total layer density not positive")
    src = np.asarray(source(profile.z), dtype=float)
    cumulative = cumulative_trapezoid(src, profile.z)
    combined = -cumulative / total_density
    boundary_value = float(-cumulative[-1] / gamma)
    u_layer = combined - boundary_value
    return u_layer, boundary_value


def cumulative_trapezoid(values: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Running trapezoid integral of tabulated values, starting at zero."""
    partial = 0.5 * (values[1:] + values[:-1]) * np.diff(z)
    return np.concatenate(([0.0], np.cumsum(partial)))

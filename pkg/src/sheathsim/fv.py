"""Shared finite-volume kernels: minmod MUSCL reconstruction and HLL fluxes.

The two fluid solvers differ only in their effective sound speed and in the
momentum source, so the reconstruction and flux machinery lives here.  States
are primitive (n, u); fluxes act on the conserved pair (n, n*u) with pressure
csq * n.
"""

import numpy as np

VACUUM_FLOOR = 1e-12


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Zero across sign changes, otherwise the argument closer to zero."""
    same = (a * b) > 0.0
    return np.where(same, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def pad_wall(values: np.ndarray, flip: bool) -> np.ndarray:
    """Two mirror ghost cells on each side; velocities flip sign."""
    sign = -1.0 if flip else 1.0
    left = sign * values[1::-1]
    right = sign * values[:-3:-1]
    return np.concatenate((left, values, right))


def pad_left_outflow_right_wall(values: np.ndarray, flip: bool,
                                boundary_value: float | None) -> np.ndarray:
    """Outflow ghosts at x=0 (pinned value or copy), mirror wall at x=L."""
    if boundary_value is None:
        left = np.array([values[0], values[0]])
    else:
        left = np.array([boundary_value, boundary_value])
    sign = -1.0 if flip else 1.0
    right = sign * values[:-3:-1]
    return np.concatenate((left, values, right))


def pad_positions(centers: np.ndarray, length: float) -> np.ndarray:
    """Ghost-cell center coordinates by reflection about both ends."""
    left = -centers[1::-1]
    right = 2.0 * length - centers[:-3:-1]
    return np.concatenate((left, centers, right))


def muscl_faces(padded: np.ndarray, positions: np.ndarray):
    """Limited linear reconstruction; returns left/right states per face.

    `padded` holds cell values with two ghosts per side, `positions` the
    matching cell-center coordinates.  Faces sit midway between interior
    neighbors, so face i separates padded cells i+1 and i+2.
    """
    dx = np.diff(positions)
    slopes = minmod((padded[1:-1] - padded[:-2]) / dx[:-1],
                    (padded[2:] - padded[1:-1]) / dx[1:])
    # distance from each center (with one ghost either side) to its faces
    half = 0.5 * dx
    left = padded[1:-2] + slopes[:-1] * half[1:-1]
    right = padded[2:-1] - slopes[1:] * half[1:-1]
    return left, right


def physical_flux(n: np.ndarray, u: np.ndarray, csq: float):
    return n * u, n * u * u + csq * n


def wave_speed_bounds(n_l, u_l, n_r, u_r, csq: float):
    """Davis estimates of the slowest/fastest signal speeds at a face."""
    c = np.sqrt(csq)
    s_l = np.minimum(u_l - c, u_r - c)
    s_r = np.maximum(u_l + c, u_r + c)
    return s_l, s_r


def hll_flux(n_l, u_l, n_r, u_r, csq: float):
    """HLL numerical flux for the isothermal pair (n, n*u)."""
    s_l, s_r = wave_speed_bounds(n_l, u_l, n_r, u_r, csq)
    f0_l, f1_l = physical_flux(n_l, u_l, csq)
    f0_r, f1_r = physical_flux(n_r, u_r, csq)
    span = s_r - s_l
    f0_m = (s_r * f0_l - s_l * f0_r + s_l * s_r * (n_r - n_l)) / span
    f1_m = (s_r * f1_l - s_l * f1_r + s_l * s_r * (n_r * u_r - n_l * u_l)) / span
    f0 = np.where(s_l >= 0.0, f0_l, np.where(s_r <= 0.0, f0_r, f0_m))
    f1 = np.where(s_l >= 0.0, f1_l, np.where(s_r <= 0.0, f1_r, f1_m))
    return f0, f1

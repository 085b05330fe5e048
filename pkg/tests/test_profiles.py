"""Tests of the leading-order layer profile and its linear correctors."""

import math

import numpy as np
import pytest

import oracles
from sheathsim import profiles
from sheathsim.errors import SolverError


def closed_form_layer(z, psi):
    """Exact profile for gamma = T = 1, by separation of variables."""
    return 4.0 * np.arctanh(np.tanh(psi / 4.0) * np.exp(-math.sqrt(2.0) * z))


def trivial_profile(gamma=1.0, ion_temp=1.0, nodes=4097):
    return profiles.solve_leading_profile(
        profiles.SheathParams(gamma, ion_temp, 0.0), nodes=nodes)


def test_nonlinearity_values():
    assert profiles.s_nonlinearity(1.0, 1.0) == pytest.approx(
        -2.3504023872876028, rel=1e-13)
    for ion_temp in (0.5, 1.0, 2.0):
        assert profiles.s_nonlinearity(0.0, ion_temp) == 0.0
    phi = np.linspace(-3.0, 3.0, 41)
    np.testing.assert_allclose(profiles.s_nonlinearity(-phi, 1.0),
                               -profiles.s_nonlinearity(phi, 1.0), atol=1e-14)


def test_nonlinearity_derivative():
    phi = np.linspace(-3.0, 3.0, 61)
    for ion_temp in (0.5, 1.0, 2.0):
        deriv = profiles.s_derivative(phi, ion_temp)
        assert np.all(deriv < 0.0)
        h = 1e-6
        fd = (profiles.s_nonlinearity(phi + h, ion_temp)
              - profiles.s_nonlinearity(phi - h, ion_temp)) / (2.0 * h)
        np.testing.assert_allclose(deriv, fd, rtol=1e-8, atol=1e-8)


def test_hamiltonian_values():
    params = profiles.SheathParams(1.0, 1.0, 1.0)
    assert profiles.hamiltonian(0.0, 1.0, params) == pytest.approx(
        -1.0861612696304874, rel=1e-13)
    assert profiles.hamiltonian(0.0, 0.0, params) == 0.0
    assert profiles.hamiltonian(3.0, 0.0, params) == 4.5


def test_potential_well_branch_continuity():
    # the well is -H(0, phi)/gamma; the series/expm1 switchover sits at
    # 1e-3 * min(1, T) and must not leave a seam
    for ion_temp in (0.5, 1.0, 2.0):
        params = profiles.SheathParams(1.0, ion_temp, 1.0)
        cut = 1e-3 * min(1.0, ion_temp)

        def series(phi, T=ion_temp):
            return (0.5 * (1.0 + 1.0 / T) * phi**2
                    + (1.0 / T**2 - 1.0) / 6.0 * phi**3
                    + (1.0 + 1.0 / T**3) / 24.0 * phi**4
                    + (1.0 / T**4 - 1.0) / 120.0 * phi**5)

        for phi in (cut * 0.999, cut * 1.001, -cut * 0.999, -cut * 1.001):
            well = -profiles.hamiltonian(0.0, phi, params)
            assert well == pytest.approx(series(phi), rel=1e-8)
        tiny = 1e-9
        quad = 0.5 * (1.0 + 1.0 / ion_temp) * tiny**2
        assert -profiles.hamiltonian(0.0, tiny, params) == pytest.approx(
            quad, rel=1e-6)
        phi = np.concatenate((np.linspace(-2.0, 2.0, 81), [1e-12, -1e-12]))
        well = -profiles.hamiltonian(np.zeros_like(phi), phi, params)
        assert np.all(well >= 0.0)


def test_stable_manifold_slope():
    params = profiles.SheathParams(1.0, 1.0, 1.0)
    assert profiles.stable_manifold_slope(1.0, params) == pytest.approx(
        -1.4738800966364174, rel=1e-13)
    assert profiles.stable_manifold_slope(0.0, params) == 0.0
    assert profiles.stable_manifold_slope(-0.001, params) == pytest.approx(
        0.0014142136212985737, rel=1e-13)
    phi = np.linspace(-2.0, 2.0, 101)
    slope = profiles.stable_manifold_slope(phi, params)
    assert np.all(np.sign(slope) == -np.sign(phi))
    # the slope is defined as the root of H, so plugging it back must vanish
    resid = profiles.hamiltonian(slope, phi, params)
    assert np.max(np.abs(resid)) <= 1e-13


def test_density_layer_values():
    assert profiles.density_layer(-0.5, 1.0, 1.0) == pytest.approx(
        -0.3934693402873666, rel=1e-13)
    assert profiles.density_layer(0.5, 2.0, 1.0) == pytest.approx(
        1.2974425414002564, rel=1e-13)
    phi = np.linspace(-30.0, 2.0, 200)
    assert np.all(profiles.density_layer(phi, 2.0, 0.5) >= -2.0)
    moderate = np.linspace(-15.0, 2.0, 100)
    assert np.all(profiles.density_layer(moderate, 2.0, 0.5) > -2.0)


def test_params_validation():
    with pytest.raises(ValueError):
        profiles.SheathParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        profiles.SheathParams(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        profiles.SheathParams(1.0, 1.0, 1.0, tol=0.0)
    with pytest.raises(ValueError):
        profiles.SheathParams(1.0, 1.0, 1.0, z_max=-2.0)
    with pytest.raises(ValueError, match="wall potential out of supported range"):
        profiles.SheathParams(1.0, 1.0, 45.0)
    with pytest.raises(ValueError, match="wall potential out of supported range"):
        profiles.SheathParams(2.0, 0.5, 25.0)
    edge = profiles.SheathParams(1.0, 0.5, -20.0)  # exactly at the cap
    assert edge.wall_value == -20.0
    params = profiles.SheathParams(2.0, 0.5, -1.0)
    assert params.decay_rate == pytest.approx(2.449489742783178, rel=1e-13)
    assert params.z_max == pytest.approx(40.0 / params.decay_rate, rel=1e-13)


def test_trivial_profile_is_identically_zero():
    prof = trivial_profile(gamma=2.0, ion_temp=0.5)
    assert np.all(prof.phi == 0.0)
    assert np.all(prof.dphi == 0.0)
    assert np.all(prof.n_layer == 0.0)
    assert prof.z[0] == 0.0
    assert prof.z[-1] == pytest.approx(40.0 / prof.decay_rate, rel=1e-13)
    prof.validate()


def test_profile_matches_closed_form():
    # frozen spot value of the closed form itself, guarding transcription
    assert closed_form_layer(1.0, 1.0) == pytest.approx(
        0.2384573828338611, abs=1e-12)
    for psi in (1.0, -1.0):
        prof = profiles.solve_leading_profile(
            profiles.SheathParams(1.0, 1.0, psi))
        mask = prof.z <= 10.0
        err = np.max(np.abs(prof.phi[mask] - closed_form_layer(prof.z[mask], psi)))
        assert err <= 1e-8


def test_profile_tail_decay():
    for gamma, ion_temp, psi in [(1.0, 1.0, 1.0), (2.0, 0.5, -1.0)]:
        prof = profiles.solve_leading_profile(
            profiles.SheathParams(gamma, ion_temp, psi))
        lam = prof.decay_rate
        window = (prof.z >= 0.5 * prof.z[-1]) & (prof.z <= 0.75 * prof.z[-1])
        fit = np.polyfit(prof.z[window], np.log(np.abs(prof.phi[window])), 1)
        assert fit[0] == pytest.approx(-lam, rel=2e-2)
    # rescaled tail converges to the constant of the closed form at gamma=T=1
    prof = profiles.solve_leading_profile(profiles.SheathParams(1.0, 1.0, 1.0))
    scaled = prof.phi * np.exp(math.sqrt(2.0) * prof.z)
    tail = scaled[prof.z >= 0.5 * prof.z[-1]]
    assert np.all(tail > 0.0)
    assert tail[-1] == pytest.approx(4.0 * math.tanh(0.25), rel=1e-5)


def test_profile_invariants_and_hamiltonian_sweep():
    worst = 0.0
    for gamma in (0.5, 1.0, 2.0):
        for ion_temp in (0.5, 1.0, 2.0):
            for psi in (-1.0, 0.5, 2.0):
                params = profiles.SheathParams(gamma, ion_temp, psi)
                prof = profiles.solve_leading_profile(params)
                prof.validate()
                assert prof.phi[0] == psi
                assert abs(prof.phi[-1]) <= 1e-9
                along = profiles.hamiltonian(prof.dphi, prof.phi, params)
                worst = max(worst, float(np.max(np.abs(along))))
                assert np.all(prof.n_layer + gamma > 0.0)
    assert worst <= 1e-8


def test_profile_rejects_bad_node_count():
    with pytest.raises(ValueError):
        profiles.solve_leading_profile(
            profiles.SheathParams(1.0, 1.0, 1.0), nodes=1)


@pytest.mark.parametrize("gamma,ion_temp,psi", [(1.0, 1.0, 1.0),
                                                (2.0, 0.5, -1.0)])
def test_shooting_oracle_matches_profile(gamma, ion_temp, psi):
    prof = profiles.solve_leading_profile(
        profiles.SheathParams(gamma, ion_temp, psi))
    dz = float(prof.z[1] - prof.z[0])
    # the saddle amplifies the bisection rounding like e^{lambda z}, so the
    # oracle is only compared where that amplification stays below ~e^16
    k_cut = int(14.0 / prof.decay_rate / dz)
    substeps = max(1, math.ceil(dz / 2.5e-4))
    extra = math.ceil(6.0 / prof.decay_rate * substeps / dz)
    oracle = np.array(oracles.shooting_layer_profile(
        gamma, ion_temp, psi, dz, k_cut, substeps, extra))
    err = float(np.max(np.abs(prof.phi[:k_cut + 1] - oracle)))
    assert err <= 1e-7


def test_corrector_manufactured_solution():
    base = trivial_profile()
    exact = lambda z: np.exp(-2.0 * z)
    forcing = lambda z: 2.0 * np.exp(-2.0 * z)
    errors = {}
    for cells in (2048, 4096):
        problem = profiles.CorrectorProblem(base, forcing, 1.0, 10.0,
                                            grid_cells=cells)
        sol = profiles.solve_linear_corrector(problem, base.params)
        errors[cells] = float(np.max(np.abs(sol.phi - exact(sol.z))))
        assert sol.max_residual <= 1e-9
    assert errors[4096] <= 1e-6
    assert errors[2048] / errors[4096] >= 3.5


def test_corrector_homogeneous_decay():
    base = trivial_profile()
    problem = profiles.CorrectorProblem(base, lambda z: np.zeros_like(z),
                                        1.0, 10.0)
    sol = profiles.solve_linear_corrector(problem, base.params)
    lam = math.sqrt(2.0)
    assert np.max(np.abs(sol.phi - np.exp(-lam * sol.z))) <= 3e-6
    assert np.interp(1.0, sol.z, sol.phi) == pytest.approx(
        0.2431167344342142, abs=3e-6)
    # decay estimate from the problem contract
    mid = sol.phi[len(sol.phi) // 2]
    assert abs(mid) <= math.exp(-lam * 10.0 / 4.0) + 1e-6


def test_corrector_zero_data():
    base = trivial_profile()
    problem = profiles.CorrectorProblem(base, lambda z: 0.0, 0.0, 10.0)
    sol = profiles.solve_linear_corrector(problem, base.params)
    assert np.all(sol.phi == 0.0)
    assert sol.max_residual == 0.0


def test_corrector_linearity():
    base = profiles.solve_leading_profile(profiles.SheathParams(1.0, 1.0, 1.0))
    f_one = lambda z: np.exp(-z)
    f_two = lambda z: z * np.exp(-1.5 * z)
    a, b = 2.0, -1.5
    combo = lambda z: a * f_one(z) + b * f_two(z)
    solve = lambda forcing, psi: profiles.solve_linear_corrector(
        profiles.CorrectorProblem(base, forcing, psi, 10.0), base.params)
    one = solve(f_one, 0.3)
    two = solve(f_two, -0.2)
    both = solve(combo, a * 0.3 + b * (-0.2))
    np.testing.assert_allclose(both.phi, a * one.phi + b * two.phi,
                               rtol=1e-9, atol=1e-12)


def test_corrector_guard_trips_on_bad_linearization(monkeypatch):
    base = trivial_profile()
    problem = profiles.CorrectorProblem(base, lambda z: np.zeros_like(z),
                                        1.0, 10.0)
    monkeypatch.setattr(profiles, "s_derivative",
                        lambda phi, ion_temp: np.ones_like(np.asarray(phi)))
    with pytest.raises(SolverError, match="coercivity"):
        profiles.solve_linear_corrector(problem, base.params)


def test_corrector_problem_validation():
    base = trivial_profile()
    with pytest.raises(ValueError):
        profiles.CorrectorProblem(base, lambda z: z, 0.0, -1.0)
    with pytest.raises(ValueError):
        profiles.CorrectorProblem(base, lambda z: z, 0.0, 10.0, grid_cells=8)


def test_velocity_corrector_flat_profile():
    # with a trivial base profile the mass balance integrates exactly:
    # combined layer+trace velocity -(1 - e^{-lam z}), trace -1
    prof = trivial_profile(nodes=32769)
    lam = prof.decay_rate
    source = lambda z: lam * np.exp(-lam * z)
    u_layer, boundary = profiles.layer_velocity_corrector(prof, source)
    assert boundary == pytest.approx(-1.0, abs=1e-6)
    combined = u_layer + boundary
    np.testing.assert_allclose(combined, np.expm1(-lam * prof.z), atol=1e-6)
    assert u_layer[0] == -boundary


def test_velocity_corrector_zero_source():
    prof = trivial_profile()
    u_layer, boundary = profiles.layer_velocity_corrector(
        prof, lambda z: np.zeros_like(z))
    assert np.all(u_layer == 0.0)
    assert boundary == 0.0


def test_velocity_corrector_scaling():
    prof = profiles.solve_leading_profile(profiles.SheathParams(1.0, 1.0, 0.5))
    source = lambda z: np.exp(-z) * (1.0 + z)
    u_one, b_one = profiles.layer_velocity_corrector(prof, source)
    u_two, b_two = profiles.layer_velocity_corrector(
        prof, lambda z: 2.0 * source(z))
    assert np.array_equal(u_two, 2.0 * u_one)
    assert b_two == 2.0 * b_one


def test_velocity_corrector_rejects_other_orders():
    prof = trivial_profile()
    with pytest.raises(ValueError):
        profiles.layer_velocity_corrector(prof, lambda z: z, order=2)


def test_cumulative_trapezoid_reference():
    z = np.array([0.0, 0.1, 0.35, 0.6, 1.2])
    vals = np.sin(z) + 1.0
    out = profiles.cumulative_trapezoid(vals, z)
    assert out[0] == 0.0
    running = 0.0
    for k in range(1, len(z)):
        running += 0.5 * (vals[k] + vals[k - 1]) * (z[k] - z[k - 1])
        assert out[k] == pytest.approx(running, rel=1e-14)

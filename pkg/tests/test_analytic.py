import math

import numpy as np
import pytest

from hardychoquard.analytic import (
    PseudoconformalSolution,
    characterization_roundtrip,
    evaluate_pseudoconformal,
    mass_concentration_profile,
    minimal_mass_diagnostics,
    phase_modulation_energy,
    phase_resolution,
    smooth_cutoff,
    spectral_derivative,
)
from hardychoquard.core import (
    RadialField,
    energy,
    hardy_seminorm_sq,
    make_grid,
    make_params,
    mass,
    weighted_moment,
)
from hardychoquard.dynamics import initial_state, step
from hardychoquard.groundstate import random_trial_field, resample
from hardychoquard.riesz import build_riesz


@pytest.fixture(scope="module")
def sol(mass_critical):
    params, grid, op, gs = mass_critical
    return PseudoconformalSolution(gs.Q, 1.0, 1.0, 0.3, params)


def test_rejects_non_critical(cubic):
    params, _, _, gs = cubic
    with pytest.raises(ValueError):
        PseudoconformalSolution(gs.Q, 1.0, 1.0, 0.0, params)


def test_initial_modulus_is_ground_state(sol, mass_critical):
    params, grid, op, gs = mass_critical
    u = evaluate_pseudoconformal(sol, 0.0, grid)
    assert np.max(np.abs(np.abs(u.values) - np.abs(gs.Q.values))) <= 1e-12 * np.max(np.abs(gs.Q.values))


def test_mass_invariant_and_hardy_expansion(sol, mass_critical):
    params, grid, op, gs = mass_critical
    for frac in (0.0, 0.2, 0.4, 0.6, 0.8):
        t = frac * sol.T
        u = evaluate_pseudoconformal(sol, t, grid)
        assert mass(u, params) == pytest.approx(gs.M_gs**2, rel=1e-6)
        tau = sol.T - t
        expected = sol.dilation(t) ** 2 * gs.H_gs**2 + weighted_moment(u, params) / (4 * tau**2)
        assert hardy_seminorm_sq(u, params) == pytest.approx(expected, rel=1e-3)


def test_gamma_law(sol, mass_critical):
    params, grid, op, gs = mass_critical
    for frac in (0.0, 0.3, 0.6):
        rep = minimal_mass_diagnostics(sol, frac, params, op)
        assert rep.gamma_law_residual <= 1e-3
        assert rep.hardy_growth == pytest.approx(rep.hardy_growth, rel=0)
    r0 = minimal_mass_diagnostics(sol, 0.0, params, op)
    # Gamma'(0) = -16 E T follows from differentiating the T^2 law
    assert r0.energy > 0 and r0.gamma_t == pytest.approx(8 * r0.energy * sol.T**2, rel=1e-3)


def test_late_time_guard(sol, mass_critical):
    grid = mass_critical[1]
    with pytest.raises(ValueError):
        evaluate_pseudoconformal(sol, 0.9995, grid)
    with pytest.raises(ValueError):
        evaluate_pseudoconformal(sol, 1.0, grid, allow_late=True)
    evaluate_pseudoconformal(sol, 0.9995, grid, allow_late=True)
    assert phase_resolution(sol, 0.0, grid) < np.pi / 4


def test_mass_concentration(sol, mass_critical):
    gs = mass_critical[3]
    m = gs.M_gs**2
    assert mass_concentration_profile(sol, 0.999, 1.0) / m >= 0.99
    assert mass_concentration_profile(sol, 0.0, 1e3) == pytest.approx(m, rel=1e-12)
    vals = [mass_concentration_profile(sol, t, 0.5) for t in (0.0, 0.5, 0.9, 0.99)]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(ValueError):
        mass_concentration_profile(sol, 0.5, 0.0)


def test_one_step_matches_exact_solution(sol, mass_critical):
    params, grid, op, gs = mass_critical
    u0 = evaluate_pseudoconformal(sol, 0.0, grid)
    st = initial_state(u0, params, op)
    errs = []
    for dt in (4e-3, 2e-3):
        got = step(st, dt, op, params).field.values
        ref = evaluate_pseudoconformal(sol, dt, grid).values
        errs.append(np.sqrt(np.sum(grid.w_2 * np.abs(got - ref) ** 2) / np.sum(grid.w_2 * np.abs(ref) ** 2)))
    # local error is O(dt^3) on top of the spatial error common to both steps
    assert errs[1] < errs[0]


@pytest.fixture(scope="module")
def uniform_critical():
    params = make_params(3, 2, 7 / 3)
    grid = make_grid(1024, 20.0)
    return params, grid, build_riesz(params, grid)


def test_spectral_derivative_exact_for_cosines(uniform_critical):
    _, grid, _ = uniform_critical
    r = grid.nodes
    k = 5 * np.pi / grid.r_max
    assert np.max(np.abs(spectral_derivative(np.cos(k * r), grid) + k * np.sin(k * r))) <= 1e-10
    with pytest.raises(ValueError):
        spectral_derivative(r, make_grid(64, 1.0, "algebraic:2"))


def test_smooth_cutoff():
    r = np.linspace(0, 10, 1001)
    c = smooth_cutoff(r, 3.0, 6.0)
    assert np.all(c[r <= 3] == 1) and np.all(c[r >= 6] == 0)
    assert np.all(np.diff(c) <= 0)


def test_phase_identity(uniform_critical):
    params, grid, op = uniform_critical
    rng = np.random.default_rng(7)
    r = grid.nodes
    phi = r**2 * smooth_cutoff(r, 6.0, 12.0)
    for s in (0.0, 0.5, -1.0):
        v = random_trial_field(grid, rng)
        pm = phase_modulation_energy(v, phi, s, params, op)
        assert abs(pm.lhs - pm.rhs) <= 1e-8 * (abs(pm.lhs) + abs(pm.rhs))
        if s == 0.0:
            assert pm.lhs == pytest.approx(pm.energy, rel=1e-14)
        # real fields carry no momentum
        real = phase_modulation_energy(RadialField(grid, np.abs(v.values)), phi, s, params, op)
        assert real.momentum_term == 0.0
    v = RadialField(grid, np.exp(-r**2 / 2) * np.exp(0.2j * r**2))
    ss = np.linspace(-1, 1, 9)
    e = [phase_modulation_energy(v, phi, s, params, op).lhs for s in ss]
    cubic_coef = np.polyfit(ss, e, 3)[0]
    assert abs(cubic_coef) <= 1e-8 * max(abs(x) for x in e)


def test_cauchy_schwarz_bound(uniform_critical, mass_critical):
    params, grid, op = uniform_critical
    gs = mass_critical[3]
    rng = np.random.default_rng(3)
    phi = grid.nodes**2 * smooth_cutoff(grid.nodes, 6.0, 12.0)
    Qu, _ = resample(gs.Q, grid)
    checked = 0
    # dilated ground states: zero energy, hence zero momentum term
    for scale in (0.8, 1.0, 1.3):
        q, _ = resample(Qu, grid, scale=scale, amplitude=scale)
        pm = phase_modulation_energy(q, phi, 0.3, params, op, M_gs=gs.M_gs)
        if pm.cs_holds is not None:
            assert pm.cs_holds
            checked += 1
    for _ in range(10):
        f = random_trial_field(grid, rng)
        f = f * (gs.M_gs / math.sqrt(mass(f, params)))
        f = f * np.exp(1j * rng.uniform(-1, 1) * grid.nodes**2 / 10)
        pm = phase_modulation_energy(f, phi, 0.7, params, op, M_gs=gs.M_gs)
        if pm.cs_holds is not None:
            assert pm.cs_holds
            checked += 1
    assert checked >= 3


def test_roundtrip(sol, mass_critical):
    params, grid, op, gs = mass_critical
    u0 = evaluate_pseudoconformal(sol, 0.0, grid)
    rt = characterization_roundtrip(u0, params, gs, op)
    assert not rt.degenerate
    assert rt.T == pytest.approx(sol.T, rel=1e-3)
    assert rt.energy_ratio <= 1e-3
    assert rt.lambda_fit == pytest.approx(sol.lam / sol.T, rel=1e-3)
    assert rt.profile_mismatch <= 1e-3
    deg = characterization_roundtrip(gs.Q, params, gs, op)
    assert deg.degenerate and "solitary" in deg.message
    with pytest.raises(ValueError):
        characterization_roundtrip(gs.Q * 0.9, params, gs, op)

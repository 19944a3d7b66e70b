import math

import numpy as np
import pytest

from hardychoquard.core import RadialField, hardy_seminorm_sq, make_grid, make_params, mass
from hardychoquard.dynamics import (
    SimControls,
    Status,
    Trajectory,
    VerdictKind,
    classify,
    conservation_report,
    diagnostics,
    initial_state,
    simulate,
    step,
    threshold_maximizer,
    threshold_polynomial,
    virial_diagnostics,
)
from hardychoquard.groundstate import threshold_quantities
from hardychoquard.riesz import build_riesz


@pytest.fixture(scope="module")
def setup():
    params = make_params(3, 2, 3)
    grid = make_grid(512, 20.0)
    return params, grid, build_riesz(params, grid)


def smooth(grid, amp=0.8, chirp=0.3):
    r = grid.nodes
    return RadialField(grid, amp * np.exp(-r**2 / 2) * np.exp(1j * chirp * r**2))


def test_zero_is_fixed_point(setup):
    params, grid, op = setup
    st = initial_state(RadialField(grid, np.zeros(grid.n, complex)), params, op)
    assert np.all(step(st, 1e-2, op, params).field.values == 0)


def test_time_reversibility(setup):
    params, grid, op = setup
    st = initial_state(smooth(grid), params, op)
    back = step(step(st, 1e-2, op, params, fp_tol=1e-13, fp_max=60), -1e-2, op, params, fp_tol=1e-13, fp_max=60)
    v0 = st.field.values
    err = np.sqrt(np.sum(grid.w_2 * np.abs(back.field.values - v0) ** 2) / np.sum(grid.w_2 * np.abs(v0) ** 2))
    assert err <= 1e-8


def test_linear_mode_unitary_and_spreads(setup):
    params, grid, op = setup
    st = initial_state(smooth(grid, chirp=0.0), params, op)
    m0 = st.diagnostics.mass
    for _ in range(20):
        st = step(st, 1e-2, op, params, nonlinear=False)
        assert abs(st.diagnostics.mass - m0) / m0 <= 1e-12
    assert st.diagnostics.gamma > initial_state(smooth(grid, chirp=0.0), params, op).diagnostics.gamma


def test_mass_per_step_and_diagnostics_recomputable(setup):
    params, grid, op = setup
    st = initial_state(smooth(grid), params, op)
    nxt = step(st, 5e-3, op, params)
    assert abs(nxt.diagnostics.mass - st.diagnostics.mass) / st.diagnostics.mass <= 1e-10
    again = diagnostics(nxt.field, params, op)
    for a, b in zip(nxt.diagnostics, again):
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_gauge_invariance(setup):
    params, grid, op = setup
    u0 = smooth(grid)
    ctl = SimControls(adaptive=False, snapshot_interval=0.05)
    a = simulate(u0, params, op, 5e-3, 0.2, ctl)
    b = simulate(u0 * np.exp(0.9j), params, op, 5e-3, 0.2, ctl)
    va, vb = a.states[-1].field.values, b.states[-1].field.values
    assert np.max(np.abs(vb - np.exp(0.9j) * va)) <= 1e-8 * np.max(np.abs(va))


def test_virial_identity_values(setup):
    params, grid, op = setup
    g, gp, gpp = virial_diagnostics(RadialField(grid, np.exp(-grid.nodes**2)), params, op)
    assert gp == 0.0 and g > 0
    mc = make_params(3, 2, 7 / 3)
    assert mc.virial_coefficient == pytest.approx(0.0, abs=1e-14)
    f = smooth(grid)
    opm = build_riesz(mc, grid)
    dg = diagnostics(f, mc, opm)
    assert dg.gamma_second == pytest.approx(16 * dg.energy, rel=1e-12)


def test_small_data_case_a_completes():
    params = make_params(3, 2.5, 2.1)
    grid = make_grid(512, 30.0)
    op = build_riesz(params, grid)
    r = grid.nodes
    u = RadialField(grid, np.exp(-r**2 / 2))
    u = u * math.sqrt(1e-2 / mass(u, params))
    assert classify(u, params).kind is VerdictKind.GLOBAL_CASE_A
    tr = simulate(u, params, op, 1e-2, 2.0, SimControls(snapshot_interval=0.1))
    assert tr.status is Status.COMPLETED
    h = tr.column("hardy_norm")
    assert np.all(np.isfinite(h)) and h.max() <= 1.01 * h[0]


def test_conservation_report_needs_two_snapshots(setup):
    params, grid, op = setup
    with pytest.raises(ValueError):
        conservation_report(Trajectory([initial_state(smooth(grid), params, op)]))


def test_snapshot_times_increase(setup):
    params, grid, op = setup
    tr = simulate(smooth(grid), params, op, 3e-3, 0.1, SimControls(snapshot_interval=0.01))
    t = tr.times
    assert np.all(np.diff(t) > 0) and t[-1] == pytest.approx(0.1, abs=1e-14)
    assert len(t) == 11


def test_step_rejects(setup):
    params, grid, op = setup
    st = initial_state(smooth(grid), params, op)
    with pytest.raises(ValueError):
        step(st, 0.0, op, params)
    bad = make_params(3, 2, 1.8)
    with pytest.raises(ValueError):
        step(st, 1e-3, build_riesz(bad, grid), bad)


def test_threshold_polynomial_maximum(cubic):
    params, _, _, gs = cubic
    C = gs.sharp_C
    tq = threshold_quantities(C, params)
    s_star, p_star = threshold_maximizer(C, params)
    assert s_star == pytest.approx(tq.H_gs**2 * tq.M_gs**params.kappa, rel=1e-10)
    assert p_star == pytest.approx(tq.E_gs * tq.M_gs**params.kappa, rel=1e-10)
    s = np.linspace(0.2 * s_star, 3 * s_star, 2001)
    assert np.all(threshold_polynomial(s, C, params) <= p_star * (1 + 1e-12))
    with pytest.raises(ValueError):
        threshold_maximizer(C, make_params(3, 2, 7 / 3))


def test_classifier_branches(cubic, mass_critical):
    params, grid, op, gs = cubic
    small = gs.Q * 0.5
    assert classify(small, params, gs, op).kind is VerdictKind.GLOBAL_CASE_C
    big = gs.Q * 1.3
    v = classify(big, params, gs, op)
    assert v.kind is VerdictKind.BLOWUP_NEGATIVE_ENERGY and v.witnesses["energy"] < 0
    # positive energy below threshold, kinetic term above: a narrowed ground state
    from hardychoquard.groundstate import resample
    narrow, _ = resample(gs.Q, grid, scale=1.25, amplitude=1.25 * 0.97)
    v = classify(narrow, params, gs, op)
    assert v.kind is VerdictKind.BLOWUP_ABOVE_THRESHOLD, v.witnesses
    assert classify(gs.Q, params, gs, op).kind is VerdictKind.UNDETERMINED
    with pytest.raises(ValueError):
        classify(small, params)
    mp, mg, mop, mgs = mass_critical
    assert classify(mgs.Q * 0.9, mp, mgs, mop).kind is VerdictKind.GLOBAL_CASE_B
    assert "mass_norm" in classify(mgs.Q * 0.9, mp, mgs, mop).witnesses


def test_case_c_invariant_along_flow(cubic):
    params, grid, op, gs = cubic
    u0 = gs.Q * 0.6
    assert classify(u0, params, gs, op).kind is VerdictKind.GLOBAL_CASE_C
    s_star, _ = threshold_maximizer(gs.sharp_C, params)
    tr = simulate(u0, params, op, 1e-2, 1.0, SimControls(snapshot_interval=0.05))
    m_k = math.sqrt(mass(u0, params)) ** params.kappa
    assert np.all(tr.column("hardy_norm") ** 2 * m_k < s_star)


def test_dt_adapts_to_growth(cubic):
    params, grid, op, gs = cubic
    tr = simulate(gs.Q * 1.3, params, op, 1e-3, 1.0, SimControls(snapshot_interval=0.01, blowup_factor=20))
    assert tr.status is Status.BLOWUP_DETECTED
    assert tr.t_blowup_est >= tr.states[-1].t
    assert tr.states[-1].dt < 1e-3

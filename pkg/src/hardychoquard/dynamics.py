"""Radial time integration, conservation and virial monitoring, blow-up detection.

The evolution ``i u_t = L u - (I_alpha * |u|^p)|u|^{p-2} u`` is integrated in
the transformed variable ``v``, where it reads ``i v_t = A v - V(v) v`` with
``A = W^{-1} S`` the discrete two-dimensional radial Laplacian and
``V = (I_alpha * |u|^p)|u|^{p-2}`` real. The implicit midpoint rule
(Crank-Nicolson)

    (W + i dt/2 S) v1 = (W - i dt/2 S) v0 + i dt W V(vm) vm,   vm = (v0 + v1)/2

is solved by fixed-point iteration on the tridiagonal system. Because ``V`` is
real, the scheme conserves the discrete mass exactly (up to the inner
tolerance), is time-symmetric, and conserves energy to O(dt^2).
"""

from __future__ import annotations

import enum
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .core import ModelParams, RadialField, energy, gamma_prime, hardy_seminorm_sq, mass, weighted_moment
from .riesz import RieszOperator, choquard_energy

log = logging.getLogger(__name__)

__all__ = [
    "Diagnostics",
    "SimState",
    "SimControls",
    "Status",
    "Trajectory",
    "VerdictKind",
    "Verdict",
    "StepFailure",
    "diagnostics",
    "initial_state",
    "step",
    "simulate",
    "virial_diagnostics",
    "classify",
    "conservation_report",
    "threshold_polynomial",
    "threshold_maximizer",
    "TRAJECTORY_COLUMNS",
]

TRAJECTORY_COLUMNS = ("t", "mass", "energy", "hardy_norm", "gamma", "gamma_prime", "gamma_second", "dt")


class StepFailure(RuntimeError):
    """The nonlinear fixed point of an implicit step did not converge."""


class Diagnostics(NamedTuple):
    mass: float
    energy: float
    hardy_norm_sq: float
    gamma: float
    gamma_prime: float
    gamma_second: float


def diagnostics(f: RadialField, params: ModelParams, riesz: RieszOperator) -> Diagnostics:
    M = mass(f, params)
    H2 = hardy_seminorm_sq(f, params)
    G = choquard_energy(f, params, riesz)
    E = 0.5 * H2 - G
    gam, gp, gpp = _virial(f, params, E, G)
    return Diagnostics(M, E, H2, gam, gp, gpp)


def _virial(f, params, E, G):
    gpp = 16.0 * E + 8.0 * params.virial_coefficient * G
    return weighted_moment(f, params), gamma_prime(f, params), gpp


@dataclass(frozen=True)
class SimState:
    t: float
    field: RadialField
    dt: float
    diagnostics: Diagnostics

    def row(self) -> dict:
        dg = self.diagnostics
        return {
            "t": self.t,
            "mass": dg.mass,
            "energy": dg.energy,
            "hardy_norm": math.sqrt(dg.hardy_norm_sq),
            "gamma": dg.gamma,
            "gamma_prime": dg.gamma_prime,
            "gamma_second": dg.gamma_second,
            "dt": self.dt,
        }


def initial_state(u0: RadialField, params: ModelParams, riesz: RieszOperator, dt: float = 0.0) -> SimState:
    return SimState(0.0, u0, dt, diagnostics(u0, params, riesz))


class Status(enum.Enum):
    RUNNING = "Running"
    COMPLETED = "Completed"
    BLOWUP_DETECTED = "BlowUpDetected"
    STEP_FAILURE = "StepFailure"


@dataclass
class SimControls:
    """Knobs for :func:`simulate`.

    ``dt_constant`` is the ``c`` of the adaptive rule
    ``dt = max(dt_floor, min(dt0, c / max(1, ||sqrt(L) u||^2)))``; by default
    it is chosen so that the first step equals ``dt0``. ``adaptive=False``
    keeps ``dt0`` throughout (except for landing on snapshot times).
    """

    blowup_factor: float = 1e3
    snapshot_interval: float | None = None
    dt_constant: float | None = None
    dt_floor: float = 1e-12
    adaptive: bool = True
    nonlinear: bool = True
    fp_tol: float = 1e-10
    fp_max: int = 25
    max_steps: int = 10_000_000
    boundary_fraction: float = 0.9
    boundary_tol: float = 1e-8


@dataclass
class Trajectory:
    states: list[SimState]
    status: Status = Status.RUNNING
    t_blowup_est: float | None = None
    boundary_contaminated: bool = False
    steps: int = 0
    message: str = ""
    conservation_drift: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def column(self, name: str) -> np.ndarray:
        return np.array([s.row()[name] for s in self.states])

    def rows(self) -> list[dict]:
        return [s.row() for s in self.states]


# -- the implicit step ----------------------------------------------------------


def _potential(v: np.ndarray, params: ModelParams, riesz: RieszOperator) -> np.ndarray:
    absu = np.abs(v) * riesz.grid.nodes ** (-params.k)
    dens = absu**params.p
    return riesz.apply(dens) * absu ** (params.p - 2.0)


def _cn_bands(grid, dt: float) -> np.ndarray:
    diag, off = grid.stiffness_bands
    ab = np.zeros((3, grid.n), dtype=complex)
    ab[0, 1:] = 0.5j * dt * off
    ab[1] = grid.w_2 + 0.5j * dt * diag
    ab[2, :-1] = 0.5j * dt * off
    return ab


def _advance(v0, dt, params, riesz, nonlinear, fp_tol, fp_max, ab=None):
    """One implicit-midpoint step on raw samples; returns (v1, inner iterations)."""
    g = riesz.grid
    w2 = g.w_2
    if ab is None:
        ab = _cn_bands(g, dt)
    explicit = w2 * v0 - 0.5j * dt * g.stiffness_matvec(v0)
    if not nonlinear:
        return solve_banded((1, 1), ab, explicit), 0
    v1 = v0
    for it in range(1, fp_max + 1):
        vm = 0.5 * (v0 + v1)
        rhs = explicit + 1j * dt * w2 * _potential(vm, params, riesz) * vm
        v_new = solve_banded((1, 1), ab, rhs)
        if not np.all(np.isfinite(v_new)):
            raise StepFailure("non-finite values in the implicit step")
        diff = math.sqrt(np.sum(w2 * np.abs(v_new - v1) ** 2))
        size = math.sqrt(np.sum(w2 * np.abs(v_new) ** 2))
        v1 = v_new
        if diff <= fp_tol * max(size, 1e-300) or size == 0.0:
            return v1, it
    raise StepFailure(f"fixed point did not reach {fp_tol:g} in {fp_max} iterations (dt = {dt:g})")


def step(
    state: SimState,
    dt: float,
    riesz: RieszOperator,
    params: ModelParams,
    nonlinear: bool = True,
    fp_tol: float = 1e-10,
    fp_max: int = 25,
) -> SimState:
    """Advance ``state`` by ``dt`` (negative ``dt`` integrates backward)."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    if not params.dynamics_ok:
        raise ValueError(f"parameters (d={params.d}, alpha={params.alpha}, p={params.p}) are outside the dynamics range")
    v0 = np.asarray(state.field.values, dtype=complex)
    v1, _ = _advance(v0, dt, params, riesz, nonlinear, fp_tol, fp_max)
    f1 = RadialField(state.field.grid, v1)
    return SimState(state.t + dt, f1, dt, _state_diagnostics(f1, params, riesz, nonlinear))


def _state_diagnostics(f, params, riesz, nonlinear):
    if nonlinear:
        return diagnostics(f, params, riesz)
    M = mass(f, params)
    H2 = hardy_seminorm_sq(f, params)
    gam, gp, gpp = _virial(f, params, 0.5 * H2, 0.0)
    return Diagnostics(M, 0.5 * H2, H2, gam, gp, gpp)


# -- driver -----------------------------------------------------------------------


def _boundary_mass_fraction(v: np.ndarray, grid, frac: float) -> float:
    w = grid.w_2 * np.abs(v) ** 2
    total = np.sum(w)
    if total == 0:
        return 0.0
    return float(np.sum(w[grid.nodes >= frac * grid.r_max]) / total)


def _hardy_sq_raw(v: np.ndarray, grid, params) -> float:
    c = grid.face_coeffs
    return float(params.sphere_area * (np.sum(c[:-1] * np.abs(np.diff(v)) ** 2) + c[-1] * abs(v[-1]) ** 2))


def _extrapolate_blowup(history) -> float:
    """Zero of a linear fit to 1/||sqrt(L) u|| over the most recent steps."""
    t = np.array([h[0] for h in history])
    y = 1.0 / np.sqrt(np.array([h[1] for h in history]))
    if len(t) < 2 or np.ptp(t) == 0:
        return float(t[-1])
    slope, intercept = np.polyfit(t - t[-1], y, 1)
    if slope >= 0:
        return float(t[-1])
    return float(t[-1] - intercept / slope)


def simulate(
    u0: RadialField,
    params: ModelParams,
    riesz: RieszOperator,
    dt0: float,
    t_end: float,
    controls: SimControls | None = None,
) -> Trajectory:
    """Integrate from ``u0`` up to ``t_end``; the outcome is in ``Trajectory.status``."""
    if not params.dynamics_ok:
        raise ValueError(f"parameters (d={params.d}, alpha={params.alpha}, p={params.p}) are outside the dynamics range")
    if not dt0 > 0 or not t_end > 0:
        raise ValueError("dt0 and t_end must be positive")
    ctl = controls or SimControls()
    grid = riesz.grid
    snap = ctl.snapshot_interval or t_end / 100.0
    first = SimState(0.0, u0, dt0, _state_diagnostics(u0, params, riesz, ctl.nonlinear))
    traj = Trajectory([first])
    h0 = first.diagnostics.hardy_norm_sq
    c = ctl.dt_constant if ctl.dt_constant is not None else dt0 * max(1.0, h0)
    limit_sq = (ctl.blowup_factor**2) * h0

    v = np.asarray(u0.values, dtype=complex)
    t = 0.0
    next_snap = min(snap, t_end)
    history: deque = deque(maxlen=12)
    history.append((0.0, max(h0, 1e-300)))
    h2 = h0
    ab_cache: dict = {}
    nsteps = 0
    while True:
        if ctl.adaptive:
            dt = max(ctl.dt_floor, min(dt0, c / max(1.0, h2)))
        else:
            dt = dt0
        landing = False
        if t + dt >= next_snap - 1e-12 * max(1.0, next_snap):
            dt = next_snap - t
            landing = True
        try:
            key = round(dt, 15)
            ab = ab_cache.get(key)
            if ab is None:
                if len(ab_cache) > 8:
                    ab_cache.clear()
                ab = ab_cache[key] = _cn_bands(grid, dt)
            v_new, _ = _advance(v, dt, params, riesz, ctl.nonlinear, ctl.fp_tol, ctl.fp_max, ab)
        except StepFailure as exc:
            if dt > 2 * ctl.dt_floor and not landing:
                c *= 0.5
                dt0 *= 0.5
                log.debug("step failure at t=%g, halving dt", t)
                continue
            traj.status = Status.STEP_FAILURE
            traj.message = str(exc)
            break
        v = v_new
        t = t + dt if not landing else next_snap
        nsteps += 1
        h2 = _hardy_sq_raw(v, grid, params)
        history.append((t, h2))
        blown = h2 >= limit_sq and h0 > 0
        if landing or blown:
            f = RadialField(grid, v)
            traj.states.append(SimState(t, f, dt, _state_diagnostics(f, params, riesz, ctl.nonlinear)))
            if _boundary_mass_fraction(v, grid, ctl.boundary_fraction) > ctl.boundary_tol:
                traj.boundary_contaminated = True
            next_snap = min(next_snap + snap, t_end)
        if blown:
            traj.status = Status.BLOWUP_DETECTED
            traj.t_blowup_est = _extrapolate_blowup(history)
            traj.message = f"||sqrt(L)u|| grew by {math.sqrt(h2 / h0):.4g} at t = {t:.17g}"
            break
        if landing and t >= t_end * (1 - 1e-14):
            traj.status = Status.COMPLETED
            break
        if nsteps >= ctl.max_steps:
            traj.status = Status.STEP_FAILURE
            traj.message = f"step budget {ctl.max_steps} exhausted at t = {t:.17g}"
            break
    traj.steps = nsteps
    if len(traj.states) >= 2:
        traj.conservation_drift = conservation_report(traj)
    return traj


def virial_diagnostics(state: SimState | RadialField, params: ModelParams, riesz: RieszOperator) -> tuple[float, float, float]:
    """(Gamma, Gamma', Gamma'') at a state; Gamma'' from the virial identity."""
    f = state.field if isinstance(state, SimState) else state
    G = choquard_energy(f, params, riesz)
    E = 0.5 * hardy_seminorm_sq(f, params) - G
    return _virial(f, params, E, G)


def conservation_report(traj: Trajectory) -> dict:
    """Maximum relative deviation of mass and energy from their initial values."""
    if len(traj.states) < 2:
        raise ValueError("conservation report needs at least two snapshots")
    m = np.array([s.diagnostics.mass for s in traj.states])
    e = np.array([s.diagnostics.energy for s in traj.states])
    m_ref = abs(m[0]) if m[0] != 0 else 1.0
    e_ref = abs(e[0]) if e[0] != 0 else 1.0
    return {
        "mass_drift": float(np.max(np.abs(m - m[0])) / m_ref),
        "energy_drift": float(np.max(np.abs(e - e[0])) / e_ref),
    }


# -- threshold analysis -----------------------------------------------------------


def threshold_polynomial(s, C: float, params: ModelParams):
    """P(s) = s/2 - s^{p theta} / (2 p C^{2p})."""
    s = np.asarray(s, dtype=float)
    p, th = params.p, params.theta
    return 0.5 * s - s ** (p * th) / (2.0 * p * C ** (2.0 * p))


def threshold_maximizer(C: float, params: ModelParams) -> tuple[float, float]:
    """(s*, P(s*)) for the supercritical case p theta > 1."""
    pt = params.p * params.theta
    if not pt > 1.0 + 1e-12:
        raise ValueError("P has an interior maximum only above the mass-critical exponent")
    s_star = (C ** (2.0 * params.p) / params.theta) ** (1.0 / (pt - 1.0))
    return float(s_star), float(threshold_polynomial(s_star, C, params))


# -- global existence / blow-up classification -------------------------------------


class VerdictKind(enum.Enum):
    GLOBAL_CASE_A = "GlobalCaseA"
    GLOBAL_CASE_B = "GlobalCaseB"
    GLOBAL_CASE_C = "GlobalCaseC"
    BLOWUP_NEGATIVE_ENERGY = "BlowUpNegativeEnergy"
    BLOWUP_ABOVE_THRESHOLD = "BlowUpAboveThreshold"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    witnesses: dict

    def lines(self) -> list[str]:
        out = [f"verdict: {self.kind.value}"]
        for k, val in self.witnesses.items():
            out.append(f"{k}: {val:.17g}" if isinstance(val, float) else f"{k}: {val}")
        return out


def classify(u0: RadialField, params: ModelParams, gs=None, riesz: RieszOperator | None = None) -> Verdict:
    """Apply the sufficient conditions for global existence and blow-up, in order.

    ``gs`` supplies ``M_gs``, ``H_gs`` and ``E_gs`` (a ground-state result or
    threshold tuple); it is required for every branch except case (a).
    """
    if not params.dynamics_ok:
        raise ValueError("classification needs parameters in the dynamics range")
    d, a, p = params.d, params.alpha, params.p
    p_mc = params.p_mass_critical
    tol = 1e-12
    w: dict = {"d": d, "alpha": a, "p": p, "p_mass_critical": p_mc}
    long_range = d - 2 < a < d
    if long_range and 2 < p < p_mc - tol:
        w["case_a_parameters"] = True
        return Verdict(VerdictKind.GLOBAL_CASE_A, w)
    if gs is None or riesz is None:
        raise ValueError("ground-state constants and the Riesz operator are required for this parameter set")
    M_gs, H_gs, E_gs = float(gs.M_gs), float(gs.H_gs), float(gs.E_gs)
    M2 = mass(u0, params)
    M = math.sqrt(M2)
    H2 = hardy_seminorm_sq(u0, params)
    E = energy(u0, params, riesz)
    gam = weighted_moment(u0, params)
    w.update({"mass_norm": M, "M_gs": M_gs, "hardy_norm_sq": H2, "H_gs_sq": H_gs**2, "energy": E, "E_gs": E_gs, "gamma": gam})
    if long_range and params.mass_critical:
        w["mass_norm_below_M_gs"] = M < M_gs
        if M < M_gs:
            return Verdict(VerdictKind.GLOBAL_CASE_B, w)
    kappa = params.kappa
    if kappa is not None and p > max(2.0, p_mc) + tol:
        lhs_e, rhs_e = E * M**kappa, E_gs * M_gs**kappa
        lhs_h, rhs_h = H2 * M**kappa, H_gs**2 * M_gs**kappa
        w.update({"kappa": kappa, "energy_scaled": lhs_e, "energy_threshold": rhs_e,
                  "kinetic_scaled": lhs_h, "kinetic_threshold": rhs_h})
        if lhs_e < rhs_e and lhs_h < rhs_h:
            return Verdict(VerdictKind.GLOBAL_CASE_C, w)
    if p >= p_mc - tol and math.isfinite(gam):
        w["energy_negative"] = E < 0
        if E < 0:
            return Verdict(VerdictKind.BLOWUP_NEGATIVE_ENERGY, w)
        if kappa is not None and p > p_mc + tol:
            if w["energy_scaled"] < w["energy_threshold"] and w["kinetic_scaled"] > w["kinetic_threshold"]:
                return Verdict(VerdictKind.BLOWUP_ABOVE_THRESHOLD, w)
    return Verdict(VerdictKind.UNDETERMINED, w)

"""Closed-form blow-up solutions and identity checks at the mass-critical exponent.

The pseudoconformal family built from a ground state Q,

    u(t, x) = e^{i g} e^{i l^2/(T-t)} e^{-i|x|^2/(4(T-t))} (l/(T-t))^{d/2} Q(l x/(T-t)),

is an exact solution with mass ||Q||^2 that blows up at t = T. In the
transformed variable the dilation reads ``v(t, r) = phase * L * v_Q(L r)`` with
``L = l/(T-t)``, because ``d/2 - (d-2)/2 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.fft import dct, dst

from .core import (
    ModelParams,
    RadialField,
    RadialGrid,
    energy,
    hardy_seminorm_sq,
    mass,
    weighted_moment,
)
from .groundstate import resample
from .riesz import RieszOperator, choquard_energy

__all__ = [
    "PseudoconformalSolution",
    "evaluate_pseudoconformal",
    "phase_resolution",
    "minimal_mass_diagnostics",
    "MinimalMassReport",
    "mass_concentration_profile",
    "phase_modulation_energy",
    "PhaseModulation",
    "spectral_derivative",
    "smooth_cutoff",
    "characterization_roundtrip",
    "RoundTrip",
]

LATE_TIME_FRACTION = 1e-3


@dataclass(frozen=True)
class PseudoconformalSolution:
    Q_profile: RadialField
    T: float
    lam: float
    gamma: float
    params: ModelParams

    def __post_init__(self):
        prm = self.params
        if not prm.mass_critical:
            raise ValueError(f"pseudoconformal solutions need p = (d+alpha+2)/d = {prm.p_mass_critical}, got p = {prm.p}")
        if not prm.d - 2 < prm.alpha < prm.d:
            raise ValueError(f"pseudoconformal solutions need d-2 < alpha < d, got alpha = {prm.alpha}")
        if not (self.T > 0 and self.lam > 0):
            raise ValueError("T and lambda must be positive")

    def dilation(self, t: float) -> float:
        return self.lam / (self.T - t)


def _check_time(sol: PseudoconformalSolution, t: float, allow_late: bool) -> None:
    if not 0 <= t < sol.T:
        raise ValueError(f"time {t} outside [0, T) with T = {sol.T}")
    if not allow_late and t > sol.T * (1 - LATE_TIME_FRACTION) * (1 + 1e-14):
        raise ValueError(f"t = {t} is later than T(1 - {LATE_TIME_FRACTION:g}); pass allow_late=True to override")


def evaluate_pseudoconformal(
    sol: PseudoconformalSolution, t: float, grid: RadialGrid, allow_late: bool = False
) -> RadialField:
    """The exact solution at time ``t`` sampled on ``grid`` (transformed variable)."""
    _check_time(sol, t, allow_late)
    L = sol.dilation(t)
    prof, _ = resample(sol.Q_profile, grid, scale=L, amplitude=L)
    r = grid.nodes
    tau = sol.T - t
    phase = sol.gamma + sol.lam**2 / tau - r**2 / (4.0 * tau)
    return RadialField(grid, np.real(prof.values) * np.exp(1j * phase))


def phase_resolution(sol: PseudoconformalSolution, t: float, grid: RadialGrid, floor: float = 1e-12) -> float:
    """Largest change of the quadratic phase across one cell where |u| is non-negligible.

    The formula is considered resolved when this is below pi/4.
    """
    L = sol.dilation(t)
    prof, _ = resample(sol.Q_profile, grid, scale=L, amplitude=L)
    mag = np.abs(prof.values)
    live = mag > floor * mag.max()
    per_cell = grid.nodes * grid.widths / (2.0 * (sol.T - t))
    return float(per_cell[live].max()) if np.any(live) else 0.0


class MinimalMassReport(NamedTuple):
    t: float
    mass: float
    energy: float
    gamma_t: float
    gamma_law_residual: float
    hardy_growth: float


def minimal_mass_diagnostics(
    sol: PseudoconformalSolution, t: float, params: ModelParams, riesz: RieszOperator, allow_late: bool = False
) -> MinimalMassReport:
    """Mass, energy and the virial law Gamma(t) = 8 E(u0) (T - t)^2 at time t."""
    grid = riesz.grid
    u0 = evaluate_pseudoconformal(sol, 0.0, grid)
    ut = evaluate_pseudoconformal(sol, t, grid, allow_late)
    E0 = energy(u0, params, riesz)
    gam = weighted_moment(ut, params)
    law = 8.0 * E0 * (sol.T - t) ** 2
    return MinimalMassReport(
        t=t,
        mass=mass(ut, params),
        energy=energy(ut, params, riesz),
        gamma_t=gam,
        gamma_law_residual=abs(gam - law) / gam,
        hardy_growth=math.sqrt(hardy_seminorm_sq(ut, params)) * (sol.T - t),
    )


def mass_concentration_profile(sol: PseudoconformalSolution, t: float, rho: float) -> float:
    """Mass of u(t) inside the ball of radius rho.

    Uses the exact change of variables ``int_{B_rho} |u(t)|^2 = int_{B_{L rho}} Q^2``
    on the grid of Q, so no resampling is involved; radii beyond the grid give
    the full (truncated-domain) mass.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    _check_time(sol, t, allow_late=True)
    Q = sol.Q_profile
    g = Q.grid
    R = sol.dilation(t) * rho
    dens = np.abs(Q.values) ** 2
    # fraction of each cell [f_j, f_{j+1}] inside radius R, exact for piecewise-constant v
    lo, hi = g.faces[:-1], g.faces[1:]
    inside = np.clip(R, lo, hi)
    frac_w = 0.5 * (inside**2 - lo**2)  # int_{f_j}^{min(R, f_{j+1})} r dr
    full_w = 0.5 * (hi**2 - lo**2)
    w = g.w_2 * np.divide(frac_w, full_w, out=np.zeros_like(full_w), where=full_w > 0)
    return float(sol.params.sphere_area * np.sum(w * dens))


# -- phase modulation ---------------------------------------------------------------


def _require_uniform(grid: RadialGrid) -> None:
    if grid.grading != "uniform":
        raise ValueError("the spectral derivative needs a uniform midpoint grid")


def spectral_derivative(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """d/dr of the cosine-series interpolant on a uniform midpoint grid.

    The cosine series is the natural basis for functions even about r = 0;
    unlike finite differences it differentiates products of resolved smooth
    functions by the product rule up to round-off.
    """
    _require_uniform(grid)
    vals = np.asarray(values)
    if np.iscomplexobj(vals):
        return spectral_derivative(vals.real, grid) + 1j * spectral_derivative(vals.imag, grid)
    n = grid.n
    X = dct(vals, type=2)
    k = np.arange(1, n)
    coef = np.zeros(n)
    coef[:-1] = -(k * np.pi / grid.r_max) * X[1:] / (2 * n)
    return dst(coef, type=3)


def smooth_cutoff(r, r_in: float, r_out: float) -> np.ndarray:
    """C-infinity function equal to 1 on [0, r_in] and 0 beyond r_out."""
    r = np.asarray(r, dtype=float)
    x = np.clip((r - r_in) / (r_out - r_in), 0.0, 1.0)

    def bump(z):
        return np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)

    return bump(1.0 - x) / (bump(1.0 - x) + bump(x))


class PhaseModulation(NamedTuple):
    lhs: float
    rhs: float
    energy: float
    momentum_term: float
    phase_kinetic_term: float
    cs_bound: float | None
    cs_holds: bool | None


def _spectral_energy(v: np.ndarray, grid, params, riesz) -> float:
    dv = spectral_derivative(v, grid)
    kinetic = params.sphere_area * np.sum(grid.w_2 * np.abs(dv) ** 2)
    return 0.5 * kinetic - choquard_energy(RadialField(grid, v), params, riesz)


def phase_modulation_energy(
    v: RadialField,
    phi: Callable | np.ndarray,
    s: float,
    params: ModelParams,
    riesz: RieszOperator,
    M_gs: float | None = None,
    zero_energy_tol: float = 1e-3,
) -> PhaseModulation:
    """E(v e^{i s phi}) directly, against E(v) + s B + (s^2/2) A.

    B = int phi' Im(conj(v) v') and A = int |phi'|^2 |v|^2 (physical variables;
    in the transformed variable both weights reduce to r dr). All derivatives
    use the cosine-series derivative, so the identity is exact up to round-off
    for resolved smooth data. If ``M_gs`` is given and the field has that mass
    with nonnegative energy, the bound |B| <= sqrt(2 E) A^{1/2} is evaluated.
    Energies in ``[-zero_energy_tol * kinetic, 0)`` count as zero: a sampled
    dilated ground state has E = 0 only up to discretization error.
    """
    grid = v.grid
    _require_uniform(grid)
    r = grid.nodes
    ph = np.asarray(phi(r) if callable(phi) else phi, dtype=float)
    w = np.asarray(v.values, dtype=complex)
    dphi = spectral_derivative(ph, grid)
    dw = spectral_derivative(w, grid)
    sig = params.sphere_area
    E = _spectral_energy(w, grid, params, riesz)
    B = float(sig * np.sum(grid.w_2 * dphi * np.imag(np.conj(w) * dw)))
    A = float(sig * np.sum(grid.w_2 * dphi**2 * np.abs(w) ** 2))
    lhs = _spectral_energy(w * np.exp(1j * s * ph), grid, params, riesz)
    rhs = E + s * B + 0.5 * s * s * A
    bound = holds = None
    if M_gs is not None:
        m = math.sqrt(sig * np.sum(grid.w_2 * np.abs(w) ** 2))
        kinetic = sig * np.sum(grid.w_2 * np.abs(dw) ** 2)
        if abs(m - M_gs) <= 1e-3 * M_gs and E >= -zero_energy_tol * kinetic:
            bound = math.sqrt(2.0 * max(E, 0.0)) * math.sqrt(A)
            holds = abs(B) <= bound * (1 + 1e-9) + 1e-14
    return PhaseModulation(float(lhs), float(rhs), float(E), B, A, bound, holds)


# -- round trip -----------------------------------------------------------------------


class RoundTrip(NamedTuple):
    T: float
    energy_u0: float
    energy_v0: float
    energy_ratio: float
    lambda_fit: float
    sigma_fit: float
    profile_mismatch: float
    degenerate: bool
    message: str


def characterization_roundtrip(
    u0: RadialField,
    params: ModelParams,
    gs,
    riesz: RieszOperator,
    T_est: float | None = None,
    mass_tol: float = 1e-3,
    degenerate_tol: float = 1e-4,
) -> RoundTrip:
    """Undo the quadratic phase of minimal-mass data and compare with a dilated Q.

    ``v0 = u0 exp(i |x|^2 / (4T))`` should have zero energy and be
    ``e^{i sigma} lam^{d/2} Q(lam x)``. Without ``T_est`` the blow-up time is
    taken from the virial law, ``T = sqrt(Gamma(0) / (8 E(u0)))``. Data with
    ``E(u0) <= degenerate_tol * H_gs^2`` carry no quadratic phase (a solitary
    wave, not blow-up) and are flagged as degenerate.
    """
    if not params.mass_critical:
        raise ValueError("the round trip is defined at the mass-critical exponent")
    M = math.sqrt(mass(u0, params))
    if abs(M - gs.M_gs) > mass_tol * gs.M_gs:
        raise ValueError(f"datum mass {M:.17g} differs from M_gs = {gs.M_gs:.17g} by more than {mass_tol:g}")
    E0 = energy(u0, params, riesz)
    H2_gs = gs.H_gs**2
    grid = u0.grid
    r = grid.nodes
    if T_est is None and E0 <= degenerate_tol * H2_gs:
        v0 = u0
        T = math.inf
        degenerate = True
        msg = "E(u0) vanishes: no quadratic phase, solitary-wave datum"
    else:
        T = T_est if T_est is not None else math.sqrt(weighted_moment(u0, params) / (8.0 * E0))
        v0 = RadialField(grid, np.asarray(u0.values) * np.exp(1j * r**2 / (4.0 * T)))
        degenerate = E0 <= degenerate_tol * H2_gs
        msg = "E(u0) vanishes: solitary-wave datum" if degenerate else ""
    Ev = energy(v0, params, riesz)
    lam = math.sqrt(hardy_seminorm_sq(v0, params)) / gs.H_gs
    # v_fit(r) = lam * v_Q(lam r) in the transformed variable
    fit, _ = resample(gs.Q, grid, scale=lam, amplitude=lam)
    fv = np.real(fit.values)
    w = np.asarray(v0.values, dtype=complex)
    overlap = np.sum(grid.w_2 * np.conj(fv) * w)
    sigma = float(np.angle(overlap))
    resid = w - np.exp(1j * sigma) * fv
    mismatch = math.sqrt(np.sum(grid.w_2 * np.abs(resid) ** 2) / np.sum(grid.w_2 * fv**2))
    return RoundTrip(T, E0, Ev, Ev / H2_gs, lam, sigma, mismatch, degenerate, msg)

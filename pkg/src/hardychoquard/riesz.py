"""Radial Riesz potential I_alpha * f and the Choquard energy G.

For radial f the convolution reduces to a one-dimensional integral against the
angular kernel

    k_ang(r, s) = int_{S^{d-1}} |r e_1 - s w|^{-(d-alpha)} dw,

which is assembled once into a dense matrix on the grid. For ``d = 3`` and
``alpha != 1`` the closed form ``2 pi [(r+s)^(a-1) - |r-s|^(a-1)] / (r s (a-1))``
is used; otherwise the Gauss hypergeometric representation. When ``alpha = 2``
the kernel is ``|S^{d-1}| / max(r, s)^(d-2)`` and ``apply_riesz`` uses an O(N)
cumulative-sum evaluation of the same quadrature instead of the dense product.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import hyp2f1

from .core import ModelParams, RadialField, RadialGrid

__all__ = [
    "RieszOperator",
    "angular_kernel",
    "angular_kernel_quadrature",
    "build_riesz",
    "apply_riesz",
    "choquard_energy",
    "choquard_integral",
    "nonlinear_potential",
]

_CACHE_MAGIC = b"HCRIESZ1"


def angular_kernel(r, s, d: int, alpha: float) -> np.ndarray:
    """k_ang(r, s) in closed form, vectorized; symmetric in (r, s)."""
    r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
    big = np.maximum(r, s)
    small = np.minimum(r, s)
    if d == 3 and alpha != 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            a1 = alpha - 1.0
            out = 2.0 * np.pi * ((r + s) ** a1 - np.abs(r - s) ** a1) / (r * s * a1)
        if alpha < 1.0:
            out = np.where(r == s, np.inf, out)
        return out
    sphere = 2.0 * math.pi ** (d / 2.0) / gamma_fn(d / 2.0)
    beta = 0.5 * (d - alpha)
    z = (small / big) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = sphere * big ** (-2.0 * beta) * hyp2f1(beta, beta - 0.5 * d + 1.0, 0.5 * d, z)
    if alpha <= 1.0:
        out = np.where(r == s, np.inf, out)
    return out


def angular_kernel_quadrature(r: float, s: float, d: int, alpha: float) -> float:
    """k_ang(r, s) by direct adaptive quadrature over the polar angle."""
    lower_sphere = 2.0 * math.pi ** ((d - 1) / 2.0) / gamma_fn((d - 1) / 2.0)
    beta = 0.5 * (d - alpha)

    def integrand(t):
        dist2 = r * r + s * s - 2.0 * r * s * math.cos(t)
        return dist2 ** (-beta) * math.sin(t) ** (d - 2)

    val, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=1e-13, limit=400)
    return lower_sphere * val


@dataclass(frozen=True, eq=False)
class RieszOperator:
    params: ModelParams
    grid: RadialGrid
    _kernel: np.ndarray | None = field(default=None, repr=False)

    @property
    def separable(self) -> bool:
        return self.params.alpha == 2.0

    @cached_property
    def w_d(self) -> np.ndarray:
        return self.grid.w_d(self.params.d)

    @cached_property
    def kernel(self) -> np.ndarray:
        """Dense K with (I_alpha * f)(r_j) = sum_k K[j, k] f_k."""
        if self._kernel is not None:
            return self._kernel
        return _assemble_kernel(self.params, self.grid)

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.grid.n,):
            raise ValueError(f"samples have shape {f.shape}, grid has {self.grid.n} nodes")
        if self.separable and self._kernel is None:
            return self._apply_newton(f)
        return self.kernel @ f

    def _apply_newton(self, f: np.ndarray) -> np.ndarray:
        d = self.params.d
        r = self.grid.nodes
        a = f * self.w_d
        inner = np.cumsum(a)
        scaled = a * r ** (2.0 - d)
        outer = np.cumsum(scaled[::-1])[::-1]
        outer = np.append(outer[1:], 0.0)
        return self.params.riesz_const * self.params.sphere_area * (inner * r ** (2.0 - d) + outer)


def _assemble_kernel(params: ModelParams, grid: RadialGrid) -> np.ndarray:
    d, alpha = params.d, params.alpha
    r = grid.nodes
    w = grid.w_d(d)
    k = angular_kernel(r[:, None], r[None, :], d, alpha)
    if alpha <= 1.0:
        # weakly singular diagonal: integrate the kernel over the cell
        for j in range(grid.n):
            k[j, j] = _diagonal_cell_integral(r[j], grid.faces[j], grid.faces[j + 1], d, alpha) / w[j]
    kernel = params.riesz_const * k * w[None, :]
    # enforce exact symmetry of the bilinear form w_j K_jk
    sym = w[:, None] * kernel
    sym = 0.5 * (sym + sym.T)
    return sym / w[:, None]


def _diagonal_cell_integral(rj: float, a: float, b: float, d: int, alpha: float) -> float:
    def integrand(s):
        if s == rj:
            return 0.0
        return float(angular_kernel(rj, s, d, alpha)) * s ** (d - 1)

    left, _ = integrate.quad(integrand, a, rj, limit=200)
    right, _ = integrate.quad(integrand, rj, b, limit=200)
    return left + right


def _cache_name(params: ModelParams, grid: RadialGrid) -> str:
    key = json.dumps([params.d, params.alpha, *grid.key()]).encode()
    return "riesz-" + hashlib.sha256(key).hexdigest()[:20] + ".bin"


def save_kernel(path, op: RieszOperator) -> None:
    header = json.dumps({"d": op.params.d, "alpha": op.params.alpha, "n": op.grid.n,
                         "r_max": op.grid.r_max, "grading": op.grid.grading}).encode()
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(len(header).to_bytes(4, "little"))
        fh.write(header)
        fh.write(np.ascontiguousarray(op.kernel, dtype="<f8").tobytes(order="C"))


def load_kernel(path, params: ModelParams, grid: RadialGrid) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != _CACHE_MAGIC:
        raise ValueError(f"{path}: not a Riesz kernel cache file")
    hlen = int.from_bytes(raw[8:12], "little")
    header = json.loads(raw[12:12 + hlen])
    expected = {"d": params.d, "alpha": params.alpha, "n": grid.n, "r_max": grid.r_max, "grading": grid.grading}
    if header != expected:
        raise ValueError(f"{path}: cache key {header} does not match {expected}")
    data = np.frombuffer(raw[12 + hlen:], dtype="<f8")
    if data.size != grid.n * grid.n:
        raise ValueError(f"{path}: truncated kernel data")
    return data.reshape(grid.n, grid.n).astype(float)


def build_riesz(params: ModelParams, grid: RadialGrid, cache_dir=None, dense: bool = False) -> RieszOperator:
    """Assemble the Riesz operator for ``params`` on ``grid``.

    With ``cache_dir`` the dense kernel is read from (or written to) a binary
    cache keyed by (d, alpha, N, r_max, grading). ``dense=True`` forces the
    dense product even where the O(N) Newton evaluation is available.
    """
    if not 0.0 < params.alpha < params.d:
        raise ValueError(f"alpha must lie in (0, d), got {params.alpha}")
    if cache_dir is not None:
        path = Path(cache_dir) / _cache_name(params, grid)
        if path.exists():
            return RieszOperator(params, grid, load_kernel(path, params, grid))
        op = RieszOperator(params, grid, _assemble_kernel(params, grid))
        path.parent.mkdir(parents=True, exist_ok=True)
        save_kernel(path, op)
        return op
    if dense:
        return RieszOperator(params, grid, _assemble_kernel(params, grid))
    return RieszOperator(params, grid)


def _check_op(op: RieszOperator, grid: RadialGrid) -> None:
    if not op.grid.same_as(grid):
        raise ValueError("field grid does not match the Riesz operator grid")


def apply_riesz(op: RieszOperator, f) -> np.ndarray:
    """(I_alpha * f)(r_j) for real radial samples f."""
    return op.apply(f)


def choquard_integral(f: RadialField, params: ModelParams, op: RieszOperator) -> float:
    """int (I_alpha * |u|^p) |u|^p dx."""
    _check_op(op, f.grid)
    dens = np.abs(f.physical(params.d)) ** params.p
    return float(params.sphere_area * np.sum(op.w_d * dens * op.apply(dens)))


def choquard_energy(f: RadialField, params: ModelParams, op: RieszOperator) -> float:
    """G(u) = (1/2p) int (I_alpha * |u|^p) |u|^p dx."""
    return choquard_integral(f, params, op) / (2.0 * params.p)


def nonlinear_potential(f: RadialField, params: ModelParams, op: RieszOperator) -> np.ndarray:
    """V = (I_alpha * |u|^p) |u|^{p-2}; the nonlinearity in v is V * v."""
    _check_op(op, f.grid)
    absu = np.abs(f.physical(params.d))
    conv = op.apply(absu**params.p)
    with np.errstate(divide="ignore"):
        return conv * absu ** (params.p - 2.0)

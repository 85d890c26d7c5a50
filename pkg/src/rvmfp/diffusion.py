"""Relativistic momentum diffusion  div_v(D grad_v f),  D = (I + v (x) v) / v0.

The discrete operator is assembled from a quadratic form over the dual cells
(2x2 blocks of momentum cells around each interior vertex). With D evaluated
at the vertex as [[a, b], [b, c]], each block contributes

    (a - |b|)/2 * (two v1 differences)^2
  + (c - |b|)/2 * (two v2 differences)^2
  + |b| * (the diagonal difference along sign(b))^2,

which reproduces u.Du exactly for linear data. The result is a weighted graph
Laplacian: symmetric, mass conserving with zero flux through the box, and
negative semidefinite (every block form is PSD). Weights are non-negative,
hence the explicit step is monotone, wherever |b| <= min(a, c); this holds for
|v| < 2.2 and fails only far out in the anisotropic tail.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import PhaseGrid, gamma


class BoundaryWarning(UserWarning):
    pass


class CFLError(ValueError):
    """A requested step exceeds a stability bound; the message names the bound."""


def diffusion_entries(v1, v2):
    """Vectorised (d11, d12, d22) of D(v)."""
    v0 = gamma(v1, v2)
    return (1.0 + v1 * v1) / v0, v1 * v2 / v0, (1.0 + v2 * v2) / v0


def apply_diffusion(v1, v2, u1, u2):
    """D(v) u evaluated as (u + v (v.u)) / v0.

    Multiplying by the entries instead cancels terms of size |v|^2 when u is
    transverse to v; this form keeps full relative accuracy.
    """
    v0 = gamma(v1, v2)
    vu = v1 * u1 + v2 * u2
    return (u1 + v1 * vu) / v0, (u2 + v2 * vu) / v0


@dataclass(frozen=True)
class DiffusionMatrix:
    v1: float
    v2: float

    @property
    def entries(self):
        return tuple(float(d) for d in diffusion_entries(self.v1, self.v2))

    def as_array(self):
        d11, d12, d22 = self.entries
        return np.array([[d11, d12], [d12, d22]])

    def apply(self, u):
        u = np.asarray(u, dtype=float)
        return np.array(apply_diffusion(self.v1, self.v2, u[0], u[1]))


def diffusion_matrix(v) -> DiffusionMatrix:
    return DiffusionMatrix(float(v[0]), float(v[1]))


def stability_dt(grid: PhaseGrid, c_stab: float = 0.9) -> float:
    """Largest explicit diffusion step: c_stab dv^2 / (4 lambda_max).

    lambda_max is the top eigenvalue of D over the box, gamma at the corners.
    """
    if not 0 < c_stab <= 1:
        raise ValueError("c_stab must lie in (0, 1]")
    lam = float(gamma(grid.v_max, grid.v_max))
    return c_stab * grid.dv ** 2 / (4.0 * lam)


def friction_dt(grid: PhaseGrid, c_stab: float = 0.9) -> float:
    # upwind drift |v| <= v_max through two faces per axis
    return c_stab * grid.dv / (4.0 * grid.v_max)


def edge_weights(grid: PhaseGrid):
    """Graph-Laplacian edge weights (wx, wy, wd, wa), dimensionless (multiply by 1/dv^2)."""
    n = grid.nv
    vert = grid.v_edges[1:-1]
    a1, a2 = np.meshgrid(vert, vert, indexing="ij")
    a, b, c = diffusion_entries(a1, a2)
    ab = np.abs(b)
    alpha = 0.5 * (a - ab)
    beta = 0.5 * (c - ab)
    wx = np.zeros((n - 1, n))
    wx[:, :-1] += alpha
    wx[:, 1:] += alpha
    wy = np.zeros((n, n - 1))
    wy[:-1, :] += beta
    wy[1:, :] += beta
    wd = np.where(b > 0, ab, 0.0)
    wa = np.where(b < 0, ab, 0.0)
    return wx, wy, wd, wa


class FokkerPlanckOperator:
    """Explicit conservative stepping of df/dt = div_v(D grad_v f [+ v f])."""

    def __init__(self, grid: PhaseGrid, c_stab: float = 0.9, pool=None):
        self.grid = grid
        self.c_stab = c_stab
        self.weights = edge_weights(grid)
        faces = grid.v_edges[1:-1]
        self._drift = np.ascontiguousarray(-faces)
        self._no_drift = np.zeros(grid.nv - 1)
        self.pool = pool

    @property
    def stability_dt(self):
        return stability_dt(self.grid, self.c_stab)

    def max_dt(self, friction=False, diffusion=True):
        dt = self.stability_dt if diffusion else np.inf
        if friction:
            dt = min(dt, friction_dt(self.grid, self.c_stab))
        return dt

    def _as3d(self, f):
        f = np.ascontiguousarray(f, dtype=np.float64)
        if f.ndim == 2:
            return f[None], True
        return f, False

    def _run(self, f, out, dt, friction, diffusion=True):
        h = self.grid.dv
        wx, wy, wd, wa = self.weights
        coef = dt / h ** 2 if diffusion else 0.0
        fc = dt / h if friction else 0.0
        d = self._drift if friction else self._no_drift

        def work(lo, hi):
            _kernels.fokker_planck_step(f[lo:hi], out[lo:hi], wx, wy, wd, wa, coef, d, d, fc)

        if self.pool is None:
            work(0, f.shape[0])
        else:
            self.pool.map(work, f.shape[0])

    def apply(self, f, dt, friction=False):
        """One explicit step of length dt <= max_dt; returns a new array."""
        f3, squeeze = self._as3d(f)
        if f3.shape[-2:] != (self.grid.nv, self.grid.nv):
            raise ValueError(f"slice shape {f3.shape[-2:]} does not match the momentum grid")
        limit = self.max_dt(friction)
        if dt > limit * (1 + 1e-12):
            raise CFLError(f"diffusion CFL: dt={dt:.6g} exceeds stability_dt={limit:.6g}")
        if not np.all(np.isfinite(f3)):
            raise ValueError("non-finite input to the Fokker-Planck step")
        out = np.empty_like(f3)
        self._run(f3, out, dt, friction)
        return out[0] if squeeze else out

    def substeps(self, dt, friction=False, diffusion=True):
        return max(1, int(np.ceil(dt / self.max_dt(friction, diffusion) * (1 - 1e-12))))

    def advance(self, f, dt, friction=False, diffusion=True):
        """Advance by dt using as many equal explicit substeps as stability requires."""
        n = self.substeps(dt, friction, diffusion)
        h = dt / n
        f3, squeeze = self._as3d(f)
        a = f3.copy()
        b = np.empty_like(a)
        for _ in range(n):
            self._run(a, b, h, friction, diffusion)
            a, b = b, a
        return a[0] if squeeze else a

    def laplacian(self, f, friction=False):
        """The discrete operator itself, L_FP f (no time step)."""
        f3, squeeze = self._as3d(f)
        out = np.empty_like(f3)
        # coef = 1/h^2 with dt = 1 gives f + L f; subtract f back off
        self._run(f3, out, 1.0, friction)
        out -= f3
        return out[0] if squeeze else out


def apply_fokker_planck(grid: PhaseGrid, f_slice, dt, friction=False, c_stab=0.9):
    return FokkerPlanckOperator(grid, c_stab).apply(f_slice, dt, friction)


def moment_identity_residual(grid: PhaseGrid, f_slice, boundary_tol=1e-8):
    """|sum v0 L_FP(f) dv^2 - 2 sum f dv^2| for a single momentum slice.

    The identity only holds when f has decayed before the box edge; a
    BoundaryWarning is issued when the outermost ring of cells carries more
    than boundary_tol of the peak value.
    """
    f_slice = np.asarray(f_slice, dtype=np.float64)
    op = FokkerPlanckOperator(grid)
    lf = op.laplacian(f_slice)
    w = grid.dv ** 2
    res = abs(float((grid.v0_table * lf).sum() * w - 2.0 * f_slice.sum() * w))
    ring = np.concatenate([f_slice[0], f_slice[-1], f_slice[:, 0], f_slice[:, -1]])
    peak = float(np.abs(f_slice).max()) if f_slice.size else 0.0
    if peak > 0.0 and float(np.abs(ring).max()) > boundary_tol * peak:
        warnings.warn("f does not decay before the momentum boundary", BoundaryWarning)
    return res

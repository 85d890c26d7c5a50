"""Compiled inner loops for the momentum-space sweeps.

All kernels take a slab of shape (nslab, nv, nv) and treat every x-row
independently, so any slab partition gives bitwise-identical results.
"""
import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True, fastmath=False)


@_jit
def fokker_planck_step(f, out, wx, wy, wd, wa, coef, fric_u1, fric_u2, fric_coef):
    """out = f + coef * L f  (+ friction divergence when fric_coef != 0).

    L is the graph Laplacian with edge weights wx (v1 edges), wy (v2 edges),
    wd (i,j)-(i+1,j+1) diagonals and wa (i+1,j)-(i,j+1) anti-diagonals.
    Friction fluxes live on interior faces only (zero flux through |v_i| = v_max).
    """
    ns, n, _ = f.shape
    for k in range(ns):
        for i in range(n):
            for j in range(n):
                c = f[k, i, j]
                acc = 0.0
                if i < n - 1:
                    acc += wx[i, j] * (f[k, i + 1, j] - c)
                    if j < n - 1:
                        acc += wd[i, j] * (f[k, i + 1, j + 1] - c)
                    if j > 0:
                        acc += wa[i, j - 1] * (f[k, i + 1, j - 1] - c)
                if i > 0:
                    acc += wx[i - 1, j] * (f[k, i - 1, j] - c)
                    if j > 0:
                        acc += wd[i - 1, j - 1] * (f[k, i - 1, j - 1] - c)
                    if j < n - 1:
                        acc += wa[i - 1, j] * (f[k, i - 1, j + 1] - c)
                if j < n - 1:
                    acc += wy[i, j] * (f[k, i, j + 1] - c)
                if j > 0:
                    acc += wy[i, j - 1] * (f[k, i, j - 1] - c)
                val = c + coef * acc
                if fric_coef != 0.0:
                    div = 0.0
                    # face (i+1/2, j) has drift fric_u1[i]; upwind value by its sign
                    if i < n - 1:
                        u = fric_u1[i]
                        div += u * (c if u > 0 else f[k, i + 1, j])
                    if i > 0:
                        u = fric_u1[i - 1]
                        div -= u * (f[k, i - 1, j] if u > 0 else c)
                    if j < n - 1:
                        u = fric_u2[j]
                        div += u * (c if u > 0 else f[k, i, j + 1])
                    if j > 0:
                        u = fric_u2[j - 1]
                        div -= u * (f[k, i, j - 1] if u > 0 else c)
                    val -= fric_coef * div
                out[k, i, j] = val


@_jit
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    if a > 0.0:
        return a if a < b else b
    return a if a > b else b


@_jit
def advect_v_euler(f, out, e1, e2, bz, s1, s2, lam, limited, lost):
    """One forward-Euler finite-volume step of df/dt + div_v(K f) = 0.

    Face velocities are u1 = e1 + bz*s1 on v1-faces (shape (n+1, n)) and
    u2 = e2 - bz*s2 on v2-faces (shape (n, n+1)); s1, s2 are stream-function
    differences so the discrete divergence of (u1, u2) vanishes. Cells outside
    the box are empty ghosts. lost[k] receives the outflow, in units of summed
    cell values, for row k.
    """
    ns, n, _ = f.shape
    sl1 = np.zeros((n, n))
    sl2 = np.zeros((n, n))
    flx1 = np.zeros((n + 1, n))
    flx2 = np.zeros((n, n + 1))
    for k in range(ns):
        fk = f[k]
        if limited:
            for i in range(n):
                for j in range(n):
                    c = fk[i, j]
                    lft = fk[i - 1, j] if i > 0 else 0.0
                    rgt = fk[i + 1, j] if i < n - 1 else 0.0
                    sl1[i, j] = _minmod(rgt - c, c - lft)
                    dn = fk[i, j - 1] if j > 0 else 0.0
                    up = fk[i, j + 1] if j < n - 1 else 0.0
                    sl2[i, j] = _minmod(up - c, c - dn)
        for i in range(n + 1):
            for j in range(n):
                u = e1[k] + bz[k] * s1[i, j]
                if u > 0.0:
                    val = fk[i - 1, j] + 0.5 * sl1[i - 1, j] if i > 0 else 0.0
                else:
                    val = fk[i, j] - 0.5 * sl1[i, j] if i < n else 0.0
                flx1[i, j] = u * val
        for i in range(n):
            for j in range(n + 1):
                u = e2[k] - bz[k] * s2[i, j]
                if u > 0.0:
                    val = fk[i, j - 1] + 0.5 * sl2[i, j - 1] if j > 0 else 0.0
                else:
                    val = fk[i, j] - 0.5 * sl2[i, j] if j < n else 0.0
                flx2[i, j] = u * val
        for i in range(n):
            for j in range(n):
                out[k, i, j] = fk[i, j] - lam * (
                    flx1[i + 1, j] - flx1[i, j] + flx2[i, j + 1] - flx2[i, j]
                )
        acc = 0.0
        for j in range(n):
            acc += flx1[n, j] - flx1[0, j]
        for i in range(n):
            acc += flx2[i, n] - flx2[i, 0]
        lost[k] = lam * acc

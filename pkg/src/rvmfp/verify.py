"""Property suites behind ``rvmfp verify``.

Each check returns a Check row; a suite is a list of checks. Checks never
raise on a failed property, they report it.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .diagnostics import energy_identity_defect
from .diffusion import FokkerPlanckOperator, apply_diffusion, moment_identity_residual
from .fields import FieldState, e1_from_gauss, gauss_residual, update_riemann
from .grid import Distribution, PhaseGrid, gamma, momentum_quadrature, truncation_tail, vhat
from .solver import run
from .transport import VelocityAdvection, advect_x, discrete_force_divergence, lorentz_force, stream_differences


@dataclass
class Check:
    suite: str
    name: str
    property: str
    passed: bool
    detail: str


def random_momenta(n, radius=1e3, seed=0):
    """n points uniform in the disc |v| <= radius (the sqrt makes the area density flat)."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    th = 2 * np.pi * rng.random(n)
    return r * np.cos(th), r * np.sin(th)


def diffusion_identities(n=10**6, radius=1e3, rtol=1e-12, seed=0):
    """Max relative errors of D v = v0 v, D v_perp = v_perp / v0, and sandwich violations."""
    v1, v2 = random_momenta(n, radius, seed)
    v0 = gamma(v1, v2)
    nrm = np.hypot(v1, v2)
    nrm = np.where(nrm > 0, nrm, 1.0)
    a1, a2 = apply_diffusion(v1, v2, v1, v2)
    r1 = np.hypot(a1 - v0 * v1, a2 - v0 * v2) / (v0 * nrm)
    p1, p2 = -v2, v1
    a1, a2 = apply_diffusion(v1, v2, p1, p2)
    r2 = np.hypot(a1 - p1 / v0, a2 - p2 / v0) * v0 / nrm
    rng = np.random.default_rng(seed + 1)
    x1, x2 = rng.standard_normal((2, n))
    a1, a2 = apply_diffusion(v1, v2, x1, x2)
    q = x1 * a1 + x2 * a2
    xx = x1 * x1 + x2 * x2
    slack = rtol * v0 * xx
    bad = int(np.sum(q < xx / v0 - slack) + np.sum(q > v0 * xx + slack))
    return float(r1.max()), float(r2.max()), bad


def moment_identity_ratios(v_max=8.0, levels=(32, 64, 128, 256), width=1.0):
    """Residual of the discrete moment identity on a Gaussian, and ratios per dv-halving."""
    res = []
    for nv in levels:
        g = PhaseGrid(0.0, 1.0, 1, v_max, nv)
        v1, v2 = g.momentum_mesh()
        f = np.exp(-(v1 ** 2 + v2 ** 2) / (2 * width ** 2))
        res.append(moment_identity_residual(g, f))
    res = np.array(res)
    return res, res[:-1] / res[1:]


def _check(out, suite, name, prop, ok, detail):
    out.append(Check(suite, name, prop, bool(ok), detail))


def suite_diffusion():
    out = []
    e1, e2, bad = diffusion_identities(n=200_000)
    _check(out, "diffusion", "radial/transverse eigenpairs", "D v = v0 v, D v_perp = v_perp/v0",
           max(e1, e2) <= 1e-12, f"max rel err {max(e1, e2):.2e}")
    _check(out, "diffusion", "ellipticity sandwich", "|xi|^2/v0 <= xi.D xi <= v0 |xi|^2",
           bad == 0, f"{bad} violations")
    res, ratios = moment_identity_ratios()
    _check(out, "diffusion", "moment identity", "sum v0 L f = 2 sum f, second order",
           np.all((ratios >= 3.2) & (ratios <= 4.8)), "ratios " + " ".join(f"{r:.2f}" for r in ratios))
    g = PhaseGrid(0.0, 1.0, 1, 4.0, 32)
    op = FokkerPlanckOperator(g)
    rng = np.random.default_rng(3)
    f, h = rng.random((2, 32, 32))
    lf, lh = op.laplacian(f), op.laplacian(h)
    sym = abs(float((lf * h).sum() - (f * lh).sum()))
    _check(out, "diffusion", "symmetry and mass", "<Lf,h> = <f,Lh>, sum Lf = 0, <Lf,f> <= 0",
           sym < 1e-9 and abs(lf.sum()) < 1e-9 and (lf * f).sum() <= 0,
           f"asym {sym:.1e}, mass {abs(lf.sum()):.1e}")
    return out


def suite_quadrature():
    out = []
    g = PhaseGrid(0.0, 1.0, 1, 6.0, 96)
    area = float(momentum_quadrature(g, np.ones((g.nv, g.nv))))
    _check(out, "quadrature", "constant", "sum 1 dv^2 = (2 v_max)^2",
           abs(area - 144.0) < 1e-10, f"{area:.15g}")
    a = 6.0
    v1, v2 = g.momentum_mesh()
    got = float(momentum_quadrature(g, (1 + v1 ** 2 + v2 ** 2) ** (-a / 2)))
    exact = 2 * np.pi / (a - 2)
    tail = truncation_tail(g, a) * exact
    _check(out, "quadrature", "power-law mass", "box integral within tail bound + O(dv^2)",
           abs(got - exact) <= tail + g.dv ** 2, f"err {abs(got - exact):.2e}, tail {tail:.2e}")
    w = np.asarray(vhat(v1, v2))
    _check(out, "quadrature", "speed bound", "|v_hat| < 1 on every node",
           float(np.hypot(*w).max()) < 1.0, "")
    return out


def suite_transport():
    out = []
    g = PhaseGrid(-1.0, 1.0, 64, 3.0, 24)
    rng = np.random.default_rng(5)
    f = Distribution(g, rng.random(g.shape))
    m0, hi = f.mass(), f.values.max()
    s = advect_x(f, 0.37 * g.dx)
    _check(out, "transport", "x-streaming", "mass kept, no new extrema",
           abs(s.mass() - m0) <= 1e-13 * m0 and s.values.max() <= hi and s.values.min() >= 0,
           f"mass drift {abs(s.mass() - m0):.1e}")
    adv = VelocityAdvection(g)
    e1 = np.full(g.nx, 0.3)
    e2 = np.full(g.nx, -0.2)
    b = np.full(g.nx, 0.7)
    v = Distribution(g, np.zeros(g.shape))
    v.values[:, 8:16, 8:16] = rng.random((g.nx, 8, 8))
    m0, hi = v.mass(), v.values.max()
    w = adv.advance(v, e1, e2, b, 0.2)
    _check(out, "transport", "momentum push", "mass + outflow kept, max principle, positivity",
           abs(w.mass() + w.lost_mass - m0) <= 1e-13 * m0 and w.values.max() <= hi and w.values.min() >= 0,
           f"ledger {abs(w.mass() + w.lost_mass - m0):.1e}")
    # K-divergence: the centred divergence of the sampled force is O(dv^2), and the
    # face velocities used by the scheme agree with the force at face midpoints
    errs = []
    for nv in (32, 64):
        gg = PhaseGrid(0.0, 1.0, 1, 3.0, nv)
        errs.append(float(np.abs(discrete_force_divergence(gg, 0.3, -0.2, 0.7)).max()))
    s1, s2 = stream_differences(g)
    e = g.v_edges
    k1, _ = lorentz_force(0.3, -0.2, 0.7, e[:, None], g.v[None, :])
    _, k2 = lorentz_force(0.3, -0.2, 0.7, g.v[:, None], e[None, :])
    face = max(float(np.abs(0.3 + 0.7 * s1 - k1).max()), float(np.abs(-0.2 - 0.7 * s2 - k2).max()))
    _check(out, "transport", "K-divergence", "div_v K = 0, face speeds match K",
           errs[1] <= errs[0] / 3 and face <= g.dv ** 2, f"div {errs[1]:.1e}, face {face:.1e}")
    return out


def suite_fields():
    out = []
    nx = 64
    x = (np.arange(nx) + 0.5) / nx
    rng = np.random.default_rng(7)
    fs = FieldState.from_fields(np.zeros(nx), np.sin(2 * np.pi * x), rng.standard_normal(nx))
    start = fs.copy()
    en0 = 0.5 * float(np.sum(fs.E2 ** 2 + fs.B ** 2))
    drift = 0.0
    for _ in range(nx):
        fs = update_riemann(fs, np.zeros(nx), 1.0 / nx, 1.0 / nx)
        drift = max(drift, abs(0.5 * float(np.sum(fs.E2 ** 2 + fs.B ** 2)) - en0) / en0)
    same = np.array_equal(fs.E2, start.E2) and np.array_equal(fs.B, start.B)
    _check(out, "fields", "Riemann round trip", "free fields return bitwise after nx steps",
           same and drift <= 1e-14, f"energy drift {drift:.1e}")
    rho = rng.standard_normal(nx)
    rho -= rho.mean()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        e1 = e1_from_gauss(rho, 1.0 / nx)
    res = gauss_residual(e1, rho, 1.0 / nx)
    _check(out, "fields", "Gauss law", "D_x E1 = rho", res <= 1e-10, f"{res:.1e}")
    return out


def suite_coupled(T=0.25):
    out = []
    cfg = SimConfig().with_(time={"T": T})
    r = run(cfg)
    for m in r.collector.mon.values():
        _check(out, "coupled", f"{m.name} monitor", m.name.replace("_", " "),
               m.passed, f"worst {m.worst:.1e}")
    t = [x.t for x in r.records]
    w = [x.total_energy for x in r.records]
    d = energy_identity_defect(t, w, r.m0)
    _check(out, "coupled", "energy monitor", "W(t) - W(0) = 2 M0 t within 2%", d <= 0.02,
           f"defect {d:.2e}")
    return out


SUITES = {
    "diffusion": suite_diffusion,
    "quadrature": suite_quadrature,
    "transport": suite_transport,
    "fields": suite_fields,
    "coupled": suite_coupled,
}


def run_suites(names=None):
    names = list(SUITES) if not names else names
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; known: {sorted(SUITES)}")
    rows, timing = [], {}
    for n in names:
        t0 = time.perf_counter()
        rows += SUITES[n]()
        timing[n] = time.perf_counter() - t0
    return rows, timing

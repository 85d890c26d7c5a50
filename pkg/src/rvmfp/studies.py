"""Multi-run studies: refinement orders, momentum smoothing rates, cone growth, Picard horizons."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .diagnostics import energy_identity_defect, grad_v_norms, loglog_slope
from .fields import wave_equation_residual
from .solver import RunResult, picard_solve, run

# x-homogeneous probe box: two x-cells so that dt = dx = 0.01
PROBE_GRID = dict(x_min=-0.01, x_max=0.01, nx=2, v_max=3.0, nv=128)


def probe_config(scenario="rough_v", T=0.5, friction=False, **grid) -> SimConfig:
    g = dict(PROBE_GRID, **grid)
    return SimConfig().with_(
        grid=g,
        time={"T": T, "max_substeps": 5000},
        scheme={"friction": friction},
        scenario={"name": scenario},
    )


@dataclass
class ProbeResult:
    times: np.ndarray
    grad1_sq: np.ndarray
    grad2_sq: np.ndarray
    slope1: float
    slope2: float


def smoothing_probe(cfg: SimConfig, t_min=0.01, n_samples=16) -> ProbeResult:
    """Fit log-log slopes of ||v0^(3/2) grad_v f||^2 and ||v0 grad_v^2 f||^2.

    Samples sit on the step lattice at (rounded) log-spaced times in [t_min, T].
    """
    dt = cfg.dt
    n_end = int(round(cfg.time.T / dt))
    n_start = max(1, int(round(t_min / dt)))
    if n_end <= n_start:
        raise ValueError("probe window is empty")
    picks = set(np.unique(np.round(np.geomspace(n_start, n_end, n_samples)).astype(int)).tolist())
    if len(picks) < 3:
        raise ValueError("need at least three probe samples")
    times, g1, g2 = [], [], []

    def sample(state):
        if state.step_index in picks:
            a, b = grad_v_norms(state.f, 1.5, 1.0)
            times.append(state.t)
            g1.append(a * a)
            g2.append(b * b)

    run(cfg, on_step=sample)
    times, g1, g2 = map(np.asarray, (times, g1, g2))
    return ProbeResult(times, g1, g2, loglog_slope(times, g1), loglog_slope(times, g2))


@dataclass
class ConeFit:
    apex: float
    sign: int
    slope: float
    alpha: float
    integrand_min: float


def cone_fits(result: RunResult):
    """Least-squares slope of each cone integral and the offset making alpha + slope*t dominate."""
    t = np.array([r.t for r in result.records])
    c = np.array([r.cone_integrals for r in result.records])
    apexes = result.state.f.grid.x[result.collector.apex_idx]
    lowest = min(float(np.min(h)) for s in (1, -1) for h in result.collector.cone_hist[s])
    out = []
    for k, xa in enumerate(apexes):
        for j, sign in enumerate((1, -1)):
            y = c[:, 2 * k + j]
            slope = float(np.polyfit(t, y, 1)[0]) if t.size > 1 else 0.0
            alpha = float(np.max(y - slope * t))
            out.append(ConeFit(float(xa), sign, slope, alpha, lowest))
    return out


def field_residuals(result: RunResult, dx: float, norm="l2"):
    """Largest wave-equation residuals (B, E2) over all interior snapshot triples."""
    h = result.history
    rb = re = 0.0
    for k in range(1, len(h["B"]) - 1):
        b, e = wave_equation_residual(h["E2"][k - 1:k + 2], h["B"][k - 1:k + 2],
                                      h["j2"][k - 1:k + 2], dx, dx, norm=norm)
        rb, re = max(rb, b), max(re, e)
    return rb, re


def level_metrics(cfg: SimConfig):
    r = run(cfg, keep=("E2", "B", "j2"))
    t = [x.t for x in r.records]
    w = [x.total_energy for x in r.records]
    defect = energy_identity_defect(t, w, r.m0) if len(t) > 1 else 0.0
    cont = max(x.continuity_residual for x in r.records)
    wb, we = field_residuals(r, cfg.dt) if len(t) > 2 else (0.0, 0.0)
    return {"energy_defect": defect, "continuity_residual": cont,
            "wave_residual_B": wb, "wave_residual_E2": we}, r


def observed_order(coarse, fine, factor=2.0):
    if coarse == 0.0 and fine == 0.0:
        return math.inf
    if fine <= 0.0 or coarse <= 0.0:
        return math.nan
    return math.log(coarse / fine) / math.log(factor)


def convergence_study(cfg: SimConfig, levels=2, refine_v=True):
    """Rows (level, nx, nv, metric, value, order, monotone) for successive halvings."""
    if levels < 2:
        raise ValueError("levels must be at least 2")
    rows, prev = [], None
    for lv in range(levels):
        c = cfg
        for _ in range(lv):
            c = c.refined(2) if refine_v else c.with_(grid={"nx": 2 * c.grid.nx})
        vals, _ = level_metrics(c)
        for name, v in vals.items():
            order = math.nan if prev is None else observed_order(prev[name], v)
            monotone = True if prev is None else v <= prev[name]
            rows.append(dict(level=lv, nx=c.grid.nx, nv=c.grid.nv, metric=name,
                             value=v, order=order, monotone=monotone))
        prev = vals
    return rows


def picard_sweep(cfg: SimConfig, horizons=(0.25, 0.5, 1.0), tol=1e-10, max_iters=30,
                 weight_exponent=None):
    """Run Picard at each horizon; returns ({T: trace}, largest contracting T or None)."""
    if weight_exponent is None:
        weight_exponent = float(cfg.scenario_params().get("a", 0.0))
    traces, best = {}, None
    for T in horizons:
        tr = picard_solve(cfg.with_(time={"T": T}), tol, max_iters, weight_exponent)
        traces[T] = tr
        if tr.converged and tr.contracting:
            best = T if best is None else max(best, T)
    return traces, best

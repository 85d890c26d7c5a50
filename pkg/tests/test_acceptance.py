"""The twelve acceptance criteria, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import record_criterion
from rvmfp.config import SimConfig
from rvmfp.diagnostics import energy_identity_defect
from rvmfp.fields import FieldState, update_riemann
from rvmfp.io import write_diagnostics
from rvmfp.solver import picard_solve, run, splitting_error
from rvmfp.studies import cone_fits, field_residuals, probe_config, smoothing_probe
from rvmfp.verify import diffusion_identities, moment_identity_ratios

STANDARD = SimConfig()
SMOOTH = SimConfig().with_(scenario={"name": "smooth"})
ROUGH = probe_config("rough_v")
CONTROL = probe_config("maxwellian", friction=True)


@contextmanager
def workers(n):
    old = os.environ.get("RVMFP_WORKERS")
    os.environ["RVMFP_WORKERS"] = str(n)
    try:
        yield
    finally:
        if old is None:
            del os.environ["RVMFP_WORKERS"]
        else:
            os.environ["RVMFP_WORKERS"] = old


def _timed(cfg, **kw):
    with workers(1):
        t0 = time.perf_counter()
        r = run(cfg, **kw)
        return r, time.perf_counter() - t0


@pytest.fixture(scope="module")
def standard():
    return _timed(STANDARD)


@pytest.fixture(scope="module")
def smooth_levels():
    keep = ("E2", "B", "j2")
    return _timed(SMOOTH, keep=keep)[0], _timed(SMOOTH.refined(2), keep=keep)[0]


@pytest.fixture(scope="module")
def probe_runs():
    out = {}
    for name, cfg in (("rough_v", ROUGH), ("control", CONTROL)):
        out[name] = (smoothing_probe(cfg), run(cfg))
    return out


@pytest.fixture(scope="module")
def acceptance_runs(standard, smooth_levels, probe_runs):
    runs = {"standard": standard[0], "smooth": smooth_levels[0], "smooth_refined": smooth_levels[1]}
    runs.update({f"probe_{k}": v[1] for k, v in probe_runs.items()})
    return runs


def _defect(r):
    return energy_identity_defect([x.t for x in r.records], [x.total_energy for x in r.records], r.m0)


def test_c01_operator_identities():
    t0 = time.perf_counter()
    e1, e2, bad = diffusion_identities(n=10**6, radius=1e3)
    sec = time.perf_counter() - t0
    ok = max(e1, e2) <= 1e-12 and bad == 0 and sec < 10
    record_criterion(1, "operator identities", ok,
                     f"10^6 points, max rel err {max(e1, e2):.2e}, {bad} sandwich violations, {sec:.2f} s")
    assert ok


def test_c02_moment_identity():
    res, ratios = moment_identity_ratios()
    ok = bool(np.all((ratios >= 3.2) & (ratios <= 4.8)))
    record_criterion(2, "moment identity", ok,
                     "residuals " + " ".join(f"{r:.2e}" for r in res)
                     + "; ratios " + " ".join(f"{q:.2f}" for q in ratios))
    assert ok


def test_c03_mass_ledger(standard):
    r, sec = standard
    m0 = r.records[0].total_mass
    worst = max(abs(x.total_mass + x.lost_mass - m0) for x in r.records) / m0
    ok = worst <= 1e-10 and sec < 300
    record_criterion(3, "mass ledger", ok,
                     f"worst {worst:.2e} of M0 over {len(r.records)} samples, lost {r.records[-1].lost_mass:.2e}, "
                     f"run {sec:.1f} s")
    assert ok


def test_c04_energy_identity(smooth_levels, standard):
    base, fine = smooth_levels
    d0, d1 = _defect(base), _defect(fine)
    ds = _defect(standard[0])
    ok = d0 <= 0.02 and d0 / d1 >= 1.8 and ds <= 0.02
    record_criterion(4, "global energy identity", ok,
                     f"smooth defect {d0:.2e} -> {d1:.2e} (x{d0 / d1:.2f}); standard {ds:.2e}")
    assert ok


def test_c05_max_principle_positivity(acceptance_runs):
    worst_up, worst_neg, bad = 0.0, 0.0, []
    for name, r in acceptance_runs.items():
        sup0 = r.records[0].sup_f
        up = max(x.sup_f for x in r.records) / sup0 - 1
        neg = -min(x.positivity_min for x in r.records) / sup0
        worst_up, worst_neg = max(worst_up, up), max(worst_neg, neg)
        if up > 1e-10 or neg > 1e-12:
            bad.append(name)
    ok = not bad
    record_criterion(5, "max principle and positivity", ok,
                     f"{len(acceptance_runs)} runs, worst rise {worst_up:.2e}, worst negativity {worst_neg:.2e}"
                     + (f", failing {bad}" if bad else ""))
    assert ok


def test_c06_l2_monotone(acceptance_runs):
    worst, bad = -np.inf, []
    for name, r in acceptance_runs.items():
        l2 = np.array([x.l2_f for x in r.records])
        rise = float(np.max(l2[1:] / l2[:-1] - 1))
        worst = max(worst, rise)
        if rise > 1e-12:
            bad.append(name)
    ok = not bad
    record_criterion(6, "L2 monotonicity", ok,
                     f"{len(acceptance_runs)} runs, largest relative step change {worst:.2e}"
                     + (f", failing {bad}" if bad else ""))
    assert ok


def test_c07_field_transport_exactness():
    nx = STANDARD.grid.nx
    dx = STANDARD.dt
    rng = np.random.default_rng(11)
    fs = FieldState.from_fields(np.zeros(nx), rng.standard_normal(nx), rng.standard_normal(nx))
    start = fs.copy()
    energy = 0.5 * float(np.sum(fs.E2 ** 2 + fs.B ** 2)) * dx
    drift = 0.0
    for _ in range(nx):
        prev = 0.5 * float(np.sum(fs.E2 ** 2 + fs.B ** 2)) * dx
        fs = update_riemann(fs, np.zeros(nx), dx, dx)
        now = 0.5 * float(np.sum(fs.E2 ** 2 + fs.B ** 2)) * dx
        drift = max(drift, abs(now - prev) / energy)
    same = np.array_equal(fs.E2, start.E2) and np.array_equal(fs.B, start.B)
    ok = drift <= 1e-14 and same
    record_criterion(7, "field transport exactness", ok,
                     f"per-step energy change {drift:.1e}, bitwise after {nx} steps: {same}")
    assert ok


def test_c08_wave_residual_order(smooth_levels):
    base, fine = smooth_levels
    rb0, re0 = field_residuals(base, SMOOTH.dt)
    rb1, re1 = field_residuals(fine, SMOOTH.refined(2).dt)
    ob, oe = np.log2(rb0 / rb1), np.log2(re0 / re1)
    ok = ob >= 1.8 and oe >= 1.8
    record_criterion(8, "wave-equation residual order", ok,
                     f"B {rb0:.2e} -> {rb1:.2e} (order {ob:.2f}); E2 {re0:.2e} -> {re1:.2e} (order {oe:.2f})")
    assert ok


def test_c09_cone_estimate(standard):
    r = standard[0]
    fits = cone_fits(r)
    bound = 3 * 2 * r.m0
    slopes = [c.slope for c in fits]
    t = np.array([x.t for x in r.records])
    c = np.array([x.cone_integrals for x in r.records])
    dominated = all(np.all(c[:, k] <= fit.alpha + fit.slope * t + 1e-14) for k, fit in enumerate(fits))
    ok = (len(fits) == 10 and all(np.isfinite(slopes)) and max(slopes) <= bound
          and min(f.integrand_min for f in fits) >= 0.0 and dominated)
    record_criterion(9, "cone estimate", ok,
                     f"10 cones, slopes {min(slopes):.3f}..{max(slopes):.3f} vs 6 M0 = {bound:.3f}, "
                     f"integrand min {fits[0].integrand_min:.1e}")
    assert ok


def test_c10_picard_contraction():
    cfg = STANDARD.with_(time={"T": 0.25})
    tr = picard_solve(cfg, tol=1e-14, max_iters=30, weight_exponent=6.0)
    d = np.array(tr.sup_diff)
    ratios = d[1:] / d[:-1]
    run_len = best = 0
    for q in ratios:
        run_len = run_len + 1 if q < 1 else 0
        best = max(best, run_len)
    decreasing = best + 1 if len(d) else 0
    direct = run(cfg).state.f.values
    gap = float(np.abs(tr.final.f.values - direct).max())
    split = splitting_error(cfg)
    mean_ratio = float(np.mean(ratios[: max(decreasing - 1, 1)]))
    ok = decreasing >= 4 and mean_ratio <= 0.7 and gap <= 5 * split
    record_criterion(10, "Picard contraction", ok,
                     f"{len(d)} iterates, {decreasing} strictly decreasing, mean ratio {mean_ratio:.2e}, "
                     f"|picard - direct| {gap:.1e} vs 5 x splitting {5 * split:.1e}")
    assert ok


def test_c11_smoothing_probe(probe_runs):
    rough = probe_runs["rough_v"][0]
    ctrl = probe_runs["control"][0]
    ok = (-1.4 <= rough.slope1 <= -0.6 and -2.6 <= rough.slope2 <= -1.4
          and abs(ctrl.slope1) <= 0.3 and abs(ctrl.slope2) <= 0.3)
    record_criterion(11, "smoothing probe", ok,
                     f"rough slopes {rough.slope1:.3f}, {rough.slope2:.3f}; "
                     f"control {ctrl.slope1:.3f}, {ctrl.slope2:.3f} over t in "
                     f"[{rough.times[0]:.2f}, {rough.times[-1]:.2f}]")
    assert ok


def test_c12_determinism(tmp_path):
    same = []
    for name, cfg in (("standard", STANDARD), ("smooth", SMOOTH), ("rough_v", ROUGH)):
        blobs = []
        for n in (1, 4):
            with workers(n):
                path = tmp_path / f"{name}_{n}.csv"
                write_diagnostics(path, run(cfg).records)
                blobs.append(path.read_bytes())
        same.append(blobs[0] == blobs[1])
    ok = all(same)
    record_criterion(12, "determinism across workers", ok,
                     f"diagnostics.csv identical for 1 vs 4 workers on 3 scenarios: {same}")
    assert ok

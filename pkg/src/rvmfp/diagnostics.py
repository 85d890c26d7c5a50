"""Conserved quantities, a-priori estimate checks and per-step invariant monitors."""
from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .fields import FieldState, e1_centered, gauss_residual
from .grid import Distribution, PhaseGrid

WEIGHT_EXPONENTS = (1.0, 2.0)
N_APEXES = 5


def total_mass(f: Distribution) -> float:
    return f.mass()


def l2_norm(f: Distribution, weight_exponent=0.0) -> float:
    g = f.grid
    w = g.v0_table ** weight_exponent if weight_exponent else 1.0
    return float(np.sqrt(np.sum(np.square(f.values * w)) * g.dv ** 2 * g.dx))


def moment_sup(f: Distribution, gamma_exp: float) -> float:
    """max over cells of v0^gamma f."""
    if f.values.size == 0:
        return 0.0
    return float(np.max(f.grid.v0_table ** gamma_exp * f.values))


def energy_density(f: Distribution, fields: FieldState):
    """Local energy e and momentum flux m per x-cell (E1 taken at cell centres)."""
    g = f.grid
    w = g.dv * g.dv
    v1, _ = g.momentum_mesh()
    kin = (f.values * g.v0_table).sum(axis=(1, 2)) * w
    mom = (f.values * v1).sum(axis=(1, 2)) * w
    e1 = e1_centered(fields.E1)
    e = kin + 0.5 * (e1 ** 2 + fields.E2 ** 2 + fields.B ** 2)
    m = mom + fields.E2 * fields.B
    return e, m


def total_energy(f: Distribution, fields: FieldState) -> float:
    e, _ = energy_density(f, fields)
    return float(e.sum() * f.grid.dx)


def energy_identity_defect(times, energies, m0) -> float:
    """max_t |W(t) - W(0) - 2 M0 t| / W(0) for the total energy W = int e dx."""
    times = np.asarray(times, float)
    energies = np.asarray(energies, float)
    if times.size < 2:
        raise ValueError("need at least two energy samples")
    drift = energies - energies[0] - 2.0 * m0 * (times - times[0])
    if energies[0] == 0.0:
        return float(np.max(np.abs(drift)))
    return float(np.max(np.abs(drift)) / abs(energies[0]))


def continuity_residual(rho_prev, rho_next, j1, dt, dx) -> float:
    """sup |(rho_next - rho_prev)/dt + D_x j1| with a centred periodic D_x."""
    j1 = np.asarray(j1, float)
    dj = (np.roll(j1, -1) - np.roll(j1, 1)) / (2 * dx)
    return float(np.max(np.abs((np.asarray(rho_next) - np.asarray(rho_prev)) / dt + dj)))


def cone_integrand(f: Distribution, fields: FieldState, sign: int):
    """Per-x value of  int (v0 ± v1) f dv + |E1|^2/2 + |E2 ± B|^2/2."""
    g = f.grid
    v1, _ = g.momentum_mesh()
    kin = (f.values * (g.v0_table + sign * v1)).sum(axis=(1, 2)) * g.dv * g.dv
    e1 = e1_centered(fields.E1)
    r = fields.E2 + sign * fields.B
    return kin + 0.5 * e1 ** 2 + 0.5 * r ** 2


def cone_integral(history, apex_index: int, n: int, sign: int, dt: float) -> float:
    """Trapezoid sum over s_m = m dt, m = 0..n, of history[m][apex ± (n - m)].

    history[m] is the cone integrand (for this sign) at step m. Requires the
    whole characteristic to stay on the grid.
    """
    if n == 0:
        return 0.0
    nx = len(history[0])
    m = np.arange(n + 1)
    idx = apex_index + sign * (n - m)
    if idx.min() < 0 or idx.max() >= nx:
        raise ValueError("apex too close to the domain edge for this cone")
    vals = np.array([history[k][i] for k, i in zip(m, idx)])
    return float(dt * (vals.sum() - 0.5 * (vals[0] + vals[-1])))


def _interior(a):
    return a[..., 1:-1, 1:-1]


def grad_v_norms(f: Distribution, gamma1=0.0, gamma2=0.0):
    """(||v0^g1 grad_v f||_2, ||v0^g2 grad_v^2 f||_2) by centred differences.

    Follows the multi-index convention: the norm of a k-th gradient is the sum
    of the norms of its distinct partials. Boundary cells are left out.
    """
    g = f.grid
    h = g.dv
    u = f.values
    meas = h * h * g.dx
    w1 = _interior(g.v0_table ** gamma1)
    w2 = _interior(g.v0_table ** gamma2)
    d1 = (u[:, 2:, 1:-1] - u[:, :-2, 1:-1]) / (2 * h)
    d2 = (u[:, 1:-1, 2:] - u[:, 1:-1, :-2]) / (2 * h)
    d11 = (u[:, 2:, 1:-1] - 2 * u[:, 1:-1, 1:-1] + u[:, :-2, 1:-1]) / h ** 2
    d22 = (u[:, 1:-1, 2:] - 2 * u[:, 1:-1, 1:-1] + u[:, 1:-1, :-2]) / h ** 2
    d12 = (u[:, 2:, 2:] - u[:, 2:, :-2] - u[:, :-2, 2:] + u[:, :-2, :-2]) / (4 * h * h)

    def nrm(a, w):
        return float(np.sqrt(np.sum(np.square(a * w)) * meas))

    first = nrm(d1, w1) + nrm(d2, w1)
    second = nrm(d11, w2) + nrm(d12, w2) + nrm(d22, w2)
    return first, second


def loglog_slope(t, y):
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if t.size < 3:
        raise ValueError("need at least three samples for a slope fit")
    return float(np.polyfit(np.log(t), np.log(y), 1)[0])


@dataclass
class DiagnosticsRecord:
    t: float
    total_mass: float
    lost_mass: float
    sup_f: float
    l2_f: float
    weighted_l2: tuple
    total_energy: float
    gauss_residual: float
    continuity_residual: float
    max_principle_margin: float
    positivity_min: float
    cone_integrals: tuple
    grad_v_l2: float
    grad2_v_l2: float

    def values(self):
        out = []
        for fld in dc_fields(self):
            v = getattr(self, fld.name)
            out.extend(v if isinstance(v, tuple) else (v,))
        return out


def csv_columns():
    cols = []
    for fld in dc_fields(DiagnosticsRecord):
        if fld.name == "weighted_l2":
            cols += [f"weighted_l2_g{int(g)}" for g in WEIGHT_EXPONENTS]
        elif fld.name == "cone_integrals":
            cols += [f"cone_{k}_{s}" for k in range(N_APEXES) for s in ("plus", "minus")]
        else:
            cols.append(fld.name)
    return cols


@dataclass
class MonitorResult:
    name: str
    passed: bool = True
    worst: float = 0.0
    first_failure: float = None


class DiagnosticsCollector:
    """Builds one record per step and evaluates the invariant monitors.

    Failed monitors are recorded, never raised, so a run always completes.
    """

    def __init__(self, grid: PhaseGrid, apexes, monitors, homogeneous=False):
        self.grid = grid
        self.tol = monitors
        self.apex_idx = [int(np.clip(np.searchsorted(grid.x, a), 0, grid.nx - 1)) for a in apexes]
        self.apex_idx = [
            i if i == 0 or abs(grid.x[i] - a) <= abs(grid.x[i - 1] - a) else i - 1
            for i, a in zip(self.apex_idx, apexes)
        ][:N_APEXES]
        self.periodic_cones = homogeneous
        self.records = []
        self.cone_hist = {1: [], -1: []}
        self.mon = {k: MonitorResult(k) for k in
                    ("mass_ledger", "max_principle", "positivity", "l2_monotone", "gauss")}
        self._prev = None

    @property
    def passed(self):
        return all(m.passed for m in self.mon.values())

    def _check(self, name, value, ok, t):
        m = self.mon[name]
        m.worst = max(m.worst, value)
        if not ok and m.passed:
            m.passed = False
            m.first_failure = t

    def _cone(self, n, dt):
        out = []
        nx = self.grid.nx
        for i in self.apex_idx:
            for s in (1, -1):
                hist = self.cone_hist[s]
                if self.periodic_cones:
                    m = np.arange(n + 1)
                    vals = np.array([hist[k][(i + s * (n - k)) % nx] for k in m])
                    out.append(0.0 if n == 0 else float(dt * (vals.sum() - 0.5 * (vals[0] + vals[-1]))))
                else:
                    out.append(cone_integral(hist, i, n, s, dt))
        while len(out) < 2 * N_APEXES:
            out.append(0.0)
        return tuple(out)

    def observe(self, n, dt, f: Distribution, fields: FieldState, rho, j1, j1_prev=None):
        g = self.grid
        for s in (1, -1):
            self.cone_hist[s].append(cone_integrand(f, fields, s))
        mass = f.mass()
        vals = f.values
        sup_f = float(vals.max()) if vals.size else 0.0
        min_f = float(vals.min()) if vals.size else 0.0
        l2 = l2_norm(f)
        t = n * dt
        if self._prev is None:
            self.m0 = mass
            self.sup0 = sup_f
            cont = 0.0
        else:
            jbar = j1 if j1_prev is None else 0.5 * (j1 + j1_prev)
            cont = continuity_residual(self._prev["rho"], rho, jbar, dt, g.dx)
        gr1, gr2 = grad_v_norms(f)
        sup0 = self.sup0 if self.sup0 > 0 else 1.0
        rec = DiagnosticsRecord(
            t=t,
            total_mass=mass,
            lost_mass=f.lost_mass,
            sup_f=sup_f,
            l2_f=l2,
            weighted_l2=tuple(l2_norm(f, gm) for gm in WEIGHT_EXPONENTS),
            total_energy=total_energy(f, fields),
            gauss_residual=gauss_residual(fields.E1, rho, g.dx),
            continuity_residual=cont,
            max_principle_margin=(self.sup0 - sup_f) / sup0,
            positivity_min=min_f,
            cone_integrals=self._cone(n, dt),
            grad_v_l2=gr1,
            grad2_v_l2=gr2,
        )
        ref = self.m0 if self.m0 > 0 else 1.0
        ledger = abs(mass + f.lost_mass - self.m0) / ref
        self._check("mass_ledger", ledger, ledger <= self.tol.mass_ledger, t)
        over = (sup_f - self.sup0) / sup0
        self._check("max_principle", over, sup_f <= self.sup0 * (1 + self.tol.max_principle), t)
        neg = -min_f / sup0
        self._check("positivity", neg, min_f >= -self.tol.positivity * self.sup0, t)
        if self._prev is not None:
            prev = self._prev["l2"]
            rise = (l2 - prev) / prev if prev > 0 else l2
            self._check("l2_monotone", rise, l2 <= prev * (1 + self.tol.l2_slack), t)
        gres = rec.gauss_residual
        scale = max(1.0, float(np.max(np.abs(rho))) if rho.size else 1.0)
        self._check("gauss", gres / scale, gres <= self.tol.gauss * scale, t)
        self._prev = {"rho": rho, "l2": l2}
        self.records.append(rec)
        return rec

    def summary_lines(self):
        lines = []
        for m in self.mon.values():
            status = "PASS" if m.passed else "FAIL"
            extra = "" if m.first_failure is None else f" first_failure_t={m.first_failure:.17g}"
            lines.append(f"{m.name}: {status} worst={m.worst:.3e}{extra}")
        return lines

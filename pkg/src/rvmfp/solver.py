"""Time stepping: Strang-split kinetic push coupled to the light-cone field update."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig, validate
from .diagnostics import DiagnosticsCollector, moment_sup
from .diffusion import FokkerPlanckOperator
from .fields import Background, FieldState, charge_current, e1_from_gauss, update_riemann
from .grid import Distribution, PhaseGrid
from .parallel import SlabPool, resolve_workers
from .scenarios import is_homogeneous
from .transport import VelocityAdvection, advect_x


@dataclass
class SolverState:
    f: Distribution
    fields: FieldState
    step_index: int
    dt: float

    @property
    def t(self):
        # derived from the step count so round-off never accumulates in t
        return self.step_index * self.dt


class Stepper:
    """Owns the operators for one configuration and advances states by dt = dx."""

    def __init__(self, cfg: SimConfig, validated=None):
        self.cfg = cfg
        grid, params, f0, phi, fields = validated or validate(cfg)
        self.grid: PhaseGrid = grid
        self.params = params
        self.f0 = f0
        self.phi: Background = phi
        self.fields0 = fields
        self.dt = grid.dx
        self.pool = SlabPool(resolve_workers(cfg.scheme.workers))
        self.fp = FokkerPlanckOperator(grid, cfg.time.c_stab, self.pool)
        self.vadv = VelocityAdvection(grid, cfg.scheme.limiter, self.pool)

    def close(self):
        self.pool.close()

    def initial_state(self) -> SolverState:
        return SolverState(self.f0.copy(), self.fields0.copy(), 0, self.dt)

    def _x(self, f, h):
        return advect_x(f, h, self.cfg.scheme.limiter)

    def _v(self, f, fields, h):
        return self.vadv.advance(f, fields.e1_centered(), fields.E2, fields.B, h)

    def _d(self, f, h):
        s = self.cfg.scheme
        if not (s.diffusion or s.friction):
            return f
        vals = self.fp.advance(f.values, h, friction=s.friction, diffusion=s.diffusion)
        return Distribution(f.grid, vals, f.lost_mass, f.time)

    def push(self, f: Distribution, fields: FieldState) -> Distribution:
        """Kinetic half of the step with the force frozen at the start of the step."""
        h = self.dt
        if self.cfg.scheme.splitting == "transport_outer":
            f = self._x(f, h / 2)
            f = self._v(f, fields, h / 2)
            f = self._d(f, h)
            f = self._v(f, fields, h / 2)
            f = self._x(f, h / 2)
        else:
            f = self._d(f, h / 2)
            f = self._v(f, fields, h / 2)
            f = self._x(f, h)
            f = self._v(f, fields, h / 2)
            f = self._d(f, h / 2)
        f.time = f.time + h
        return f

    def fields_update(self, fields: FieldState, f_old: Distribution, f_new: Distribution):
        """Maxwell half of the step; returns (fields, rho, j1, j2) at the new time."""
        _, _, j2_old = charge_current(f_old, self.phi)
        rho, j1, j2 = charge_current(f_new, self.phi)
        new = update_riemann(fields, 0.5 * (j2_old + j2), self.dt, self.grid.dx)
        new.E1 = e1_from_gauss(rho, self.grid.dx, expected_charge=-f_new.lost_mass,
                               scale=self.phi.total_charge)
        return new, rho, j1, j2

    def step(self, state: SolverState) -> SolverState:
        f_new = self.push(state.f, state.fields)
        fields, *_ = self.fields_update(state.fields, state.f, f_new)
        return SolverState(f_new, fields, state.step_index + 1, state.dt)

    def n_steps(self, T=None):
        T = self.cfg.time.T if T is None else T
        return int(round(T / self.dt))


@dataclass
class RunResult:
    state: SolverState
    collector: DiagnosticsCollector
    m0: float
    history: dict = field(default_factory=dict)

    @property
    def records(self):
        return self.collector.records

    @property
    def passed(self):
        return self.collector.passed


def run(cfg: SimConfig, keep=(), on_step=None, validated=None) -> RunResult:
    """Run to T, recording diagnostics each step.

    keep may name per-step arrays to retain ("E2", "B", "j2", "j1", "rho");
    on_step(state) is called after each step, e.g. for snapshots.
    """
    stepper = Stepper(cfg, validated)
    try:
        grid = stepper.grid
        state = stepper.initial_state()
        col = DiagnosticsCollector(
            grid, cfg.scenario.apexes, cfg.monitors, homogeneous=is_homogeneous(stepper.params),
        )
        rho, j1, j2 = charge_current(state.f, stepper.phi)
        hist = {k: [] for k in keep}

        def remember(fields, rho, j1, j2):
            src = {"E1": fields.E1, "E2": fields.E2, "B": fields.B, "rho": rho, "j1": j1, "j2": j2}
            for k in keep:
                hist[k].append(np.array(src[k]))

        col.observe(0, stepper.dt, state.f, state.fields, rho, j1)
        remember(state.fields, rho, j1, j2)
        if on_step:
            on_step(state)
        for _ in range(stepper.n_steps()):
            f_new = stepper.push(state.f, state.fields)
            fields, rho, j1_new, j2 = stepper.fields_update(state.fields, state.f, f_new)
            state = SolverState(f_new, fields, state.step_index + 1, state.dt)
            col.observe(state.step_index, state.dt, state.f, fields, rho, j1_new, j1)
            j1 = j1_new
            remember(fields, rho, j1, j2)
            if on_step:
                on_step(state)
        return RunResult(state, col, stepper.f0.mass(), hist)
    finally:
        stepper.close()


@dataclass
class PicardTrace:
    sup_diff: list = field(default_factory=list)
    field_diff: list = field(default_factory=list)
    converged: bool = False
    contracting: bool = True
    final: SolverState = None

    @property
    def iterations(self):
        return len(self.sup_diff)


def picard_solve(cfg: SimConfig, tol=1e-10, max_iters=30, weight_exponent=0.0) -> PicardTrace:
    """Fixed-point iteration on the field trajectory.

    Iterate 0 holds the initial data constant in time. Iterate n pushes f with
    the fields of iterate n-1 and regenerates the fields from its own current.
    The fixed point coincides with the direct coupled run.
    """
    stepper = Stepper(cfg)
    try:
        n = stepper.n_steps()
        v0w = stepper.grid.v0_table ** weight_exponent
        prev_f = [stepper.f0.values] * (n + 1)
        prev_fields = [stepper.fields0] * (n + 1)
        trace = PicardTrace()
        rises = 0
        for _ in range(max_iters):
            f = stepper.f0.copy()
            flds = stepper.fields0.copy()
            cur_f, cur_fields = [f.values], [flds]
            for k in range(n):
                f_new = stepper.push(f, prev_fields[k])
                flds, *_ = stepper.fields_update(flds, f, f_new)
                f = f_new
                cur_f.append(f.values)
                cur_fields.append(flds)
            d = max(float(np.max(np.abs(v0w * (a - b)))) for a, b in zip(cur_f, prev_f))
            fd = max(
                max(float(np.max(np.abs(getattr(a, c) - getattr(b, c)))) for c in ("E1", "E2", "B"))
                for a, b in zip(cur_fields, prev_fields)
            )
            if trace.sup_diff and d > trace.sup_diff[-1]:
                rises += 1
            else:
                rises = 0
            trace.sup_diff.append(d)
            trace.field_diff.append(fd)
            prev_f, prev_fields = cur_f, cur_fields
            trace.final = SolverState(f, flds, n, stepper.dt)
            if d <= tol:
                trace.converged = True
                break
            if rises >= 3:
                trace.contracting = False
                break
        return trace
    finally:
        stepper.close()


def splitting_error(cfg: SimConfig) -> float:
    """sup |f_A - f_B| at T between the two Strang orderings."""
    a = run(cfg.with_(scheme={"splitting": "transport_outer"})).state.f.values
    b = run(cfg.with_(scheme={"splitting": "diffusion_outer"})).state.f.values
    return float(np.max(np.abs(a - b)))

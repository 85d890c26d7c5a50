"""Run configuration: INI-style ``key = value`` sections, validated as a whole."""
from __future__ import annotations

import configparser
import io
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import scenarios
from .diffusion import FokkerPlanckOperator
from .grid import PhaseGrid


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    x_min: float = -2.0
    x_max: float = 2.0
    nx: int = 128
    v_max: float = 16.0
    nv: int = 64


@dataclass
class TimeConfig:
    T: float = 1.0
    c_stab: float = 0.9
    max_substeps: int = 200


@dataclass
class SchemeConfig:
    diffusion: bool = True
    friction: bool = False
    limiter: str = "minmod"
    splitting: str = "transport_outer"
    workers: int = 1


@dataclass
class ScenarioConfig:
    name: str = "standard"
    params: dict = field(default_factory=dict)
    apexes: tuple = (-0.8, -0.4, 0.0, 0.4, 0.8)


@dataclass
class MonitorConfig:
    mass_ledger: float = 1e-10
    max_principle: float = 1e-10
    positivity: float = 1e-12
    l2_slack: float = 1e-12
    gauss: float = 1e-10


@dataclass
class OutputConfig:
    directory: str = ""
    snapshot_every: int = 0


@dataclass
class SimConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    monitors: MonitorConfig = field(default_factory=MonitorConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def dt(self):
        g = self.grid
        return (g.x_max - g.x_min) / g.nx

    def make_grid(self) -> PhaseGrid:
        g = self.grid
        return PhaseGrid(g.x_min, g.x_max, g.nx, g.v_max, g.nv)

    def scenario_params(self):
        return scenarios.scenario_params(self.scenario.name, self.scenario.params)

    def refined(self, factor=2):
        """Same run with nx and nv multiplied by factor (dt = dx shrinks with it)."""
        g = replace(self.grid, nx=self.grid.nx * factor, nv=self.grid.nv * factor)
        return replace(self, grid=g)

    def with_(self, **sections):
        """Copy with per-section overrides, e.g. cfg.with_(time={"T": 0.5})."""
        out = self
        for name, kw in sections.items():
            out = replace(out, **{name: replace(getattr(out, name), **kw)})
        return out


_SECTIONS = ("grid", "time", "scheme", "scenario", "monitors", "output")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(float(a)) for a in v)
    return str(v)


def _parse_scalar(raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def _guess(raw: str):
    for kind in (int, float):
        try:
            return kind(raw)
        except ValueError:
            pass
    return raw.strip()


def dumps(cfg: SimConfig) -> str:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for name in _SECTIONS:
        sec = getattr(cfg, name)
        items = {}
        if name == "scenario":
            items["name"] = sec.name
            items["apexes"] = _fmt(tuple(sec.apexes))
            for k in sorted(sec.params):
                items[k] = _fmt(sec.params[k])
        else:
            for f in fields(sec):
                items[f.name] = _fmt(getattr(sec, f.name))
        cp[name] = items
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def loads(text: str) -> SimConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = set(cp.sections()) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    cfg = SimConfig()
    for name in _SECTIONS:
        if name not in cp:
            continue
        sec = cp[name]
        if name == "scenario":
            sc = ScenarioConfig()
            params = {}
            for k, raw in sec.items():
                if k == "name":
                    sc.name = raw.strip()
                elif k == "apexes":
                    sc.apexes = tuple(float(a) for a in raw.split(",") if a.strip())
                else:
                    if k not in scenarios.DEFAULTS:
                        raise ConfigError(f"unknown scenario parameter {k!r}")
                    params[k] = _guess(raw)
            sc.params = params
            cfg.scenario = sc
            continue
        cls = type(getattr(cfg, name))
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for k, raw in sec.items():
            if k not in kinds:
                raise ConfigError(f"unknown key {k!r} in [{name}]")
            typ = {"float": float, "int": int, "bool": bool, "str": str}[kinds[k]]
            try:
                kw[k] = _parse_scalar(raw, typ)
            except ValueError as exc:
                raise ConfigError(f"[{name}] {k}: {exc}") from exc
        setattr(cfg, name, cls(**kw))
    return cfg


def load(path) -> SimConfig:
    return loads(Path(path).read_text())


def save(cfg: SimConfig, path):
    Path(path).write_text(dumps(cfg))


def as_dict(cfg: SimConfig) -> dict:
    return asdict(cfg)


def _initial_force_bound(f0, phi, fields):
    m0 = f0.mass()
    e1 = m0 + phi.total_charge
    eb = float(np.max(np.abs(fields.E2)) + np.max(np.abs(fields.B)))
    return e1, eb, m0


def validate(cfg: SimConfig):
    """Check the whole configuration before anything large is allocated.

    Returns the built (grid, params, f0, phi, fields). Raises ConfigError naming
    the violated bound.
    """
    g, t, s = cfg.grid, cfg.time, cfg.scheme
    if g.nx < 2 or g.nv < 2 or g.nv % 2:
        raise ConfigError("need nx >= 2 and an even nv >= 2")
    if not (g.x_max > g.x_min and g.v_max > 0):
        raise ConfigError("degenerate grid extents")
    if t.T < 0:
        raise ConfigError("T must be non-negative")
    if s.limiter not in ("minmod", "none"):
        raise ConfigError(f"unknown limiter {s.limiter!r}")
    if s.splitting not in ("transport_outer", "diffusion_outer"):
        raise ConfigError(f"unknown splitting {s.splitting!r}")
    if not 0 < t.c_stab <= 1:
        raise ConfigError("c_stab must lie in (0, 1]")
    grid = cfg.make_grid()
    dt = grid.dx
    if s.diffusion or s.friction:
        op = FokkerPlanckOperator(grid, t.c_stab)
        limit = op.max_dt(s.friction, s.diffusion)
        if dt > t.max_substeps * limit:
            raise ConfigError(
                f"diffusion CFL violated: dt = dx = {dt:.6g} needs more than "
                f"max_substeps={t.max_substeps} substeps of stability_dt={limit:.6g}"
            )
    try:
        params = cfg.scenario_params()
        f0, phi, fields = scenarios.build_initial_data(grid, params, t.T)
    except scenarios.ScenarioError as exc:
        raise ConfigError(str(exc)) from exc
    m0 = f0.mass()
    if m0 > 0 and abs(phi.total_charge - m0) > 1e-12 * m0:
        raise ConfigError("background does not neutralise the particle mass")
    e1b, ebb, m0 = _initial_force_bound(f0, phi, fields)
    k_est = e1b + ebb + 2.0 * m0
    if k_est > 0:
        adv_limit = 0.5 * grid.dv / (2.0 * k_est)
        if 0.5 * dt > t.max_substeps * adv_limit:
            raise ConfigError(
                f"momentum advection CFL violated: dt/2 = {0.5 * dt:.6g} needs more than "
                f"max_substeps={t.max_substeps} substeps of dv/(2 K_max)={adv_limit:.6g}"
            )
    if not scenarios.is_homogeneous(params):
        for xa in cfg.scenario.apexes:
            if xa - t.T < g.x_min or xa + t.T > g.x_max:
                raise ConfigError(f"cone apex {xa:g} with T={t.T:g} leaves the domain")
    if not math.isfinite(m0):
        raise ConfigError("initial data not finite")
    return grid, params, f0, phi, fields

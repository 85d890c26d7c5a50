"""Initial data: particle distribution, neutralising background, transverse fields.

The default particle profile is A * bump(x) * (1 + |v - u|^2)^(-a/2) with a
cos^4 taper bump (C^3, compact support). A power law rather than a Gaussian
keeps the momentum-truncation effects visible.
"""
from __future__ import annotations

import numpy as np
import scipy.fft

from .fields import Background, FieldState, charge_current, e1_from_gauss
from .grid import Distribution, PhaseGrid

FIELD_MODES = ("zero", "pulse", "counter_pulse")


class ScenarioError(ValueError):
    pass


def bump(x, center, half_width):
    """cos^4 taper supported on [center - half_width, center + half_width]."""
    s = (np.asarray(x, float) - center) / half_width
    out = np.cos(0.5 * np.pi * s) ** 4
    return np.where(np.abs(s) < 1.0, out, 0.0)


BUMP_INTEGRAL = 0.75  # int bump dx = 0.75 * half_width


def _check_margin(grid: PhaseGrid, lo, hi, horizon, what, left=True, right=True):
    if lo - left * horizon < grid.x_min or hi + right * horizon > grid.x_max:
        raise ScenarioError(
            f"{what} support [{lo:g}, {hi:g}] widened by T={horizon:g} leaves the domain "
            f"[{grid.x_min:g}, {grid.x_max:g}]"
        )


def make_f0(grid: PhaseGrid, a=6.0, x_center=0.0, x_width=0.5, amplitude=1.0,
            drift=(0.0, 0.0), horizon=0.0) -> Distribution:
    if not a > 5:
        raise ScenarioError(f"decay exponent a={a} must exceed 5")
    if amplitude < 0:
        raise ScenarioError("amplitude must be non-negative")
    _check_margin(grid, x_center - x_width, x_center + x_width, horizon, "f0")
    v1, v2 = grid.momentum_mesh()
    prof = (1.0 + (v1 - drift[0]) ** 2 + (v2 - drift[1]) ** 2) ** (-0.5 * a)
    vals = amplitude * bump(grid.x, x_center, x_width)[:, None, None] * prof[None]
    return Distribution(grid, vals)


def log_correlated_noise(nv: int, seed: int = 0):
    """Random cosine series with spectrum |k|^-2, rescaled to [0, 1].

    Such a field has roughly equal energy per octave down to the cell size, so
    its smoothing rates are the worst case allowed for square-integrable data.
    The cosine basis matches zero-flux walls, so the edges add no extra jump.
    """
    m = np.arange(nv, dtype=float)
    k2 = m[:, None] ** 2 + m[None, :] ** 2
    k2[0, 0] = np.inf
    coef = np.random.default_rng(seed).standard_normal((nv, nv)) / np.sqrt(k2)
    g = scipy.fft.idctn(coef, type=2, norm="ortho")
    return (g - g.min()) / (g.max() - g.min())


def make_homogeneous_f0(grid: PhaseGrid, profile: str, amplitude=1.0, radius=0.3, theta=1.0,
                        seed=0):
    """x-independent data for momentum-smoothing studies.

    profile "noise": log-correlated random field (rough in v);
    profile "disc": indicator of |v| < radius (discontinuous in v);
    profile "maxwellian": exp(-(v0 - 1)/theta) (smooth control; stationary
    under diffusion plus friction when theta = 1).
    """
    v1, v2 = grid.momentum_mesh()
    if profile == "noise":
        prof = log_correlated_noise(grid.nv, seed)
    elif profile == "disc":
        prof = (v1 ** 2 + v2 ** 2 < radius ** 2).astype(float)
    elif profile == "maxwellian":
        prof = np.exp(-(grid.v0_table - 1.0) / theta)
    else:
        raise ScenarioError(f"unknown homogeneous profile {profile!r}")
    vals = np.broadcast_to(amplitude * prof, grid.shape).copy()
    return Distribution(grid, vals)


def make_phi(f0: Distribution, center=0.0, half_width=1.0, max_amplitude=np.inf) -> Background:
    """Background bump scaled so that its total equals the particle mass."""
    g = f0.grid
    mass = f0.mass()
    if mass == 0.0:
        return Background(np.zeros(g.nx), g.dx)
    if mass < 0:
        raise ScenarioError("f0 has negative mass")
    _check_margin(g, center - half_width, center + half_width, 0.0, "background")
    tmpl = bump(g.x, center, half_width)
    total = tmpl.sum() * g.dx
    if total == 0.0:
        raise ScenarioError("background template has no support on the grid")
    scale = mass / total
    if scale > max_amplitude:
        raise ScenarioError(
            f"background template too narrow: needs peak {scale:.3g} > cap {max_amplitude:.3g}"
        )
    return Background(tmpl * scale, g.dx)


def make_uniform_phi(f0: Distribution) -> Background:
    """Background equal to the local particle density (x-homogeneous data)."""
    g = f0.grid
    return Background(f0.values.sum(axis=(1, 2)) * g.dv * g.dv, g.dx)


def make_fields(grid: PhaseGrid, mode="zero", amplitude=0.5, center=-1.2, width=0.3,
                horizon=0.0):
    """(E2_0, B_0) on the x-lattice.

    pulse: E2 = B = A bump(x - center), a purely right-moving wave (E2 - B = 0).
    counter_pulse: right-mover at center and its mirror image (a left-mover)
    at -center; E2 is even and B odd about x = 0.
    """
    x = grid.x
    if mode == "zero":
        return np.zeros(grid.nx), np.zeros(grid.nx)
    if mode == "pulse":
        # a right-mover only needs room on its right
        _check_margin(grid, center - width, center + width, horizon, "field pulse", left=False)
        p = amplitude * bump(x, center, width)
        return p.copy(), p.copy()
    if mode == "counter_pulse":
        _check_margin(grid, center - width, center + width, horizon, "field pulse", left=False)
        _check_margin(grid, -center - width, -center + width, horizon, "field pulse", right=False)
        left = amplitude * bump(x, center, width)
        right = amplitude * bump(x, -center, width)
        return left + right, left - right
    raise ScenarioError(f"unknown field mode {mode!r}; expected one of {FIELD_MODES}")


# name -> default parameters; every key is settable from the [scenario] config section
SCENARIOS = {
    "zero": dict(kind="bump", amplitude=0.0, field_mode="zero"),
    "standard": dict(kind="bump", field_mode="pulse"),
    "smooth": dict(kind="bump", field_mode="counter_pulse", field_center=-1.0),
    "beam": dict(kind="bump", amplitude=0.5, x_width=0.3, drift1=2.0, field_mode="zero"),
    "rough_v": dict(kind="disc", radius=0.5),
    "rough_noise": dict(kind="noise"),
    "maxwellian": dict(kind="maxwellian"),
}

DEFAULTS = dict(
    kind="bump", a=6.0, amplitude=1.0, x_center=0.0, x_width=0.5,
    drift1=0.0, drift2=0.0, phi_center=0.0, phi_width=1.0,
    field_mode="zero", field_amplitude=0.5, field_center=-1.2, field_width=0.3,
    radius=0.5, theta=1.0, seed=0,
)


def scenario_params(name: str, overrides=None) -> dict:
    if name not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    p = dict(DEFAULTS)
    p.update(SCENARIOS[name])
    p.update(overrides or {})
    return p


def is_homogeneous(params) -> bool:
    return params["kind"] in ("noise", "disc", "maxwellian")


def build_initial_data(grid: PhaseGrid, params: dict, horizon: float = 0.0):
    """Return (f0, background, fields) with E1 from Gauss's law."""
    p = params
    if is_homogeneous(p):
        f0 = make_homogeneous_f0(grid, p["kind"], p["amplitude"], p["radius"], p["theta"],
                                 int(p["seed"]))
        phi = make_uniform_phi(f0)
    else:
        f0 = make_f0(grid, p["a"], p["x_center"], p["x_width"], p["amplitude"],
                     (p["drift1"], p["drift2"]), horizon)
        phi = make_phi(f0, p["phi_center"], p["phi_width"])
    e2, b = make_fields(grid, p["field_mode"], p["field_amplitude"], p["field_center"],
                        p["field_width"], horizon)
    rho, _, _ = charge_current(f0, phi)
    e1 = e1_from_gauss(rho, grid.dx)
    return f0, phi, FieldState.from_fields(e1, e2, b)

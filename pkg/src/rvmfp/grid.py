"""Phase-space lattice for the 1.5D problem: one position axis, two momentum axes.

Cells are centred; with an even momentum count no cell centre sits on v = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def gamma(v1, v2):
    """Lorentz factor sqrt(1 + |v|^2); works elementwise on arrays."""
    return np.sqrt(1.0 + np.square(v1) + np.square(v2))


def vhat(v1, v2):
    """Relativistic velocity v / gamma(v). Each component lies in (-1, 1)."""
    g = gamma(v1, v2)
    return np.divide(v1, g), np.divide(v2, g)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhaseGrid:
    x_min: float
    x_max: float
    nx: int
    v_max: float
    nv: int
    dx: float = field(init=False)
    dv: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)
    v: np.ndarray = field(init=False, repr=False, compare=False)
    v0_table: np.ndarray = field(init=False, repr=False, compare=False)
    vhat_table: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.nx < 1 or self.nv < 2 or self.nv % 2:
            raise ValueError("need nx >= 1 and an even nv >= 2")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        dx = (self.x_max - self.x_min) / self.nx
        dv = 2.0 * self.v_max / self.nv
        x = self.x_min + dx * (np.arange(self.nx) + 0.5)
        v = -self.v_max + dv * (np.arange(self.nv) + 0.5)
        v1, v2 = np.meshgrid(v, v, indexing="ij")
        set_ = object.__setattr__
        set_(self, "dx", dx)
        set_(self, "dv", dv)
        set_(self, "x", _frozen(x))
        set_(self, "v", _frozen(v))
        set_(self, "v0_table", _frozen(gamma(v1, v2)))
        set_(self, "vhat_table", tuple(_frozen(c) for c in vhat(v1, v2)))

    @property
    def shape(self):
        return (self.nx, self.nv, self.nv)

    @property
    def v_edges(self):
        """Momentum cell faces, nv + 1 values from -v_max to v_max."""
        return -self.v_max + self.dv * np.arange(self.nv + 1)

    def momentum_mesh(self):
        return np.meshgrid(self.v, self.v, indexing="ij")

    def zeros(self):
        return np.zeros(self.shape)


@dataclass
class Distribution:
    """Cell-averaged f on a fixed grid plus the mass that left through |v| = v_max."""

    grid: PhaseGrid
    values: np.ndarray
    lost_mass: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    def copy(self):
        return Distribution(self.grid, self.values.copy(), self.lost_mass, self.time)

    def mass(self):
        g = self.grid
        return float(self.values.sum() * g.dv * g.dv * g.dx)


def momentum_quadrature(grid: PhaseGrid, field_values, weight_exponent: float = 0.0):
    """Midpoint rule for the sum over momentum cells of v0^gamma * field * dv^2.

    `field_values` may carry leading axes (e.g. x); the last two must be (nv, nv).
    """
    field_values = np.asarray(field_values, dtype=np.float64)
    if field_values.shape[-2:] != (grid.nv, grid.nv):
        raise ValueError(
            f"field shape {field_values.shape} does not end in ({grid.nv}, {grid.nv})"
        )
    w = grid.v0_table ** weight_exponent if weight_exponent != 0 else 1.0
    return (field_values * w).sum(axis=(-2, -1)) * grid.dv * grid.dv


def truncation_tail(grid: PhaseGrid, decay_exponent: float, weight_exponent: float = 0.0):
    """Fraction of the integral of v0^(gamma - a) over R^2 lying beyond the box |v_i| <= v_max.

    Reported as a diagnostic of how much a power-law tail is cut off by the
    finite momentum box. Uses the enclosed disc of radius v_max as an upper bound.
    """
    p = decay_exponent - weight_exponent
    if p <= 2:
        return float("inf")
    # int_{|v|>R} (1+|v|^2)^{-p/2} dv = 2 pi (1+R^2)^{1-p/2} / (p-2)
    return float((1.0 + grid.v_max ** 2) ** (1.0 - p / 2.0))

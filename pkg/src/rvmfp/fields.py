"""Self-consistent fields on the x-lattice.

E2 and B travel as the Riemann variables r± = E2 ± B along x = x0 ± t. With
dt = dx each characteristic lands on a grid point, so transport is an index
rotation and only the j2 source is approximated. E1 comes from Gauss's law
with a neutralising background.

Sign convention for E1: the Vlasov equation implies d(rho)/dt + d(j1)/dx = 0,
which together with dE1/dx = rho forces dE1/dt = -j1. The Ampère residual
below checks that form.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import Distribution


class NeutralityWarning(UserWarning):
    pass


@dataclass
class FieldState:
    """E1 at the right face of each cell; E2 and B stored as r± = E2 ± B.

    Keeping the Riemann variables as the state makes free transport an exact
    rotation, so profiles come back bitwise after a full period.
    """

    E1: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray

    @classmethod
    def from_fields(cls, e1, e2, b):
        e2 = np.asarray(e2, float)
        b = np.asarray(b, float)
        return cls(np.asarray(e1, float), e2 + b, e2 - b)

    @property
    def E2(self):
        return 0.5 * (self.r_plus + self.r_minus)

    @property
    def B(self):
        return 0.5 * (self.r_plus - self.r_minus)

    @classmethod
    def zeros(cls, nx):
        return cls(np.zeros(nx), np.zeros(nx), np.zeros(nx))

    def copy(self):
        return FieldState(self.E1.copy(), self.r_plus.copy(), self.r_minus.copy())

    def e1_centered(self):
        return e1_centered(self.E1)


@dataclass
class Background:
    phi: np.ndarray
    dx: float

    @property
    def total_charge(self):
        return float(self.phi.sum() * self.dx)


def e1_centered(e1_faces):
    """Average right-face values to cell centres; the field left of the domain is zero."""
    left = np.concatenate([[0.0], e1_faces[:-1]])
    return 0.5 * (left + e1_faces)


def charge_current(f: Distribution, phi: Background):
    """(rho, j1, j2) on the x-lattice by midpoint quadrature in v."""
    g = f.grid
    w = g.dv * g.dv
    vals = f.values
    n = vals.sum(axis=(1, 2)) * w
    j1 = (vals * g.vhat_table[0]).sum(axis=(1, 2)) * w
    j2 = (vals * g.vhat_table[1]).sum(axis=(1, 2)) * w
    return n - phi.phi, j1, j2


def update_riemann(fields: FieldState, j2_half, dt: float, dx: float) -> FieldState:
    """Advance r± one light-cone step.

    j2_half is the time-centred current on cell centres; the source is taken at
    the midpoint x ∓ dx/2 of the characteristic segment. E1 is carried over
    unchanged (the caller refreshes it from Gauss's law).
    """
    if abs(dt - dx) > 1e-12 * dx:
        raise ValueError(f"field update needs dt == dx (dt={dt!r}, dx={dx!r})")
    j2_half = np.asarray(j2_half, float)
    src_left = 0.5 * (np.roll(j2_half, 1) + j2_half)    # at x_i - dx/2
    src_right = 0.5 * (j2_half + np.roll(j2_half, -1))  # at x_i + dx/2
    rp = np.roll(fields.r_plus, 1) - dt * src_left
    rm = np.roll(fields.r_minus, -1) - dt * src_right
    return FieldState(fields.E1.copy(), rp, rm)


def e1_from_gauss(rho, dx: float, tol: float = 1e-10, expected_charge: float = 0.0,
                  scale: float = 0.0):
    """Left-anchored cumulative sum E1_i = sum_{k<=i} rho_k dx.

    Warns when the right-end value (the total charge) differs from
    expected_charge by more than tol * max(scale, ||rho||_1). During a run the
    expected charge is minus the mass that has left through the momentum
    boundary and scale is the particle mass.
    """
    rho = np.asarray(rho, float)
    e1 = np.cumsum(rho) * dx
    scale = max(float(scale), float(np.abs(rho).sum() * dx))
    if scale > 0 and abs(e1[-1] - expected_charge) > tol * scale:
        warnings.warn(
            f"charge not neutral: E1 at right end {e1[-1]:.3e} (expected {expected_charge:.3e}) "
            f"vs ||rho||_1 {scale:.3e}",
            NeutralityWarning,
        )
    return e1


def gauss_residual(e1_faces, rho, dx: float):
    """sup |(E1_i - E1_{i-1})/dx - rho_i| with E1_{-1} = 0."""
    d = np.diff(np.concatenate([[0.0], e1_faces])) / dx
    return float(np.max(np.abs(d - rho)))


def e1_ampere_residual(e1_prev, e1_gauss, j1, dt: float):
    """sup |(E1_gauss - E1_prev)/dt + j1| with j1 interpolated to the right faces.

    j1 should be time-centred over the step for second-order consistency.
    """
    j1 = np.asarray(j1, float)
    j1_face = 0.5 * (j1 + np.roll(j1, -1))
    r = (np.asarray(e1_gauss) - np.asarray(e1_prev)) / dt + j1_face
    return float(np.max(np.abs(r)))


def wave_equation_residual(e2_hist, b_hist, j2_hist, dt: float, dx: float, e2_source_sign=-1.0,
                           norm="l2"):
    """Residuals of box B = d_x j2 and box E2 = -d_t j2 at the middle snapshot.

    Each *_hist holds three consecutive snapshots (oldest first); all operators
    are plain centred differences. norm is "l2" (discrete L2 in x) or "sup".
    e2_source_sign exists for sign-regression checks only.
    """
    e2_hist, b_hist, j2_hist = (np.asarray(a, float) for a in (e2_hist, b_hist, j2_hist))
    if e2_hist.shape[0] < 3 or b_hist.shape[0] < 3 or j2_hist.shape[0] < 3:
        raise ValueError("wave-equation residual needs three consecutive snapshots")
    e2_hist, b_hist, j2_hist = e2_hist[-3:], b_hist[-3:], j2_hist[-3:]

    def box(u):
        utt = (u[2] - 2 * u[1] + u[0]) / dt ** 2
        uxx = (np.roll(u[1], -1) - 2 * u[1] + np.roll(u[1], 1)) / dx ** 2
        return utt - uxx

    if norm not in ("l2", "sup"):
        raise ValueError(f"unknown norm {norm!r}")

    def measure(r):
        if norm == "sup":
            return float(np.max(np.abs(r)))
        return float(np.sqrt(np.sum(r * r) * dx))

    jx = (np.roll(j2_hist[1], -1) - np.roll(j2_hist[1], 1)) / (2 * dx)
    jt = (j2_hist[2] - j2_hist[0]) / (2 * dt)
    return measure(box(b_hist) - jx), measure(box(e2_hist) - e2_source_sign * jt)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvmfp.diagnostics import (
    DiagnosticsRecord, cone_integral, cone_integrand, continuity_residual, csv_columns,
    energy_density, energy_identity_defect, grad_v_norms, l2_norm, loglog_slope, moment_sup,
    total_energy, total_mass,
)
from rvmfp.fields import FieldState
from rvmfp.grid import Distribution, PhaseGrid

G = PhaseGrid(-1.0, 1.0, 8, 2.0, 4)


def _zero():
    return Distribution(G, np.zeros(G.shape))


def test_mass_of_single_cell():
    f = _zero()
    assert total_mass(f) == 0.0
    f.values[2, 1, 3] = 1.0
    assert total_mass(f) == pytest.approx(G.dv ** 2 * G.dx, rel=1e-15)


def test_field_only_energy():
    # E1 = 1 at every face: centred value is 1 except in the first cell
    fs = FieldState.from_fields(np.ones(G.nx), np.zeros(G.nx), np.zeros(G.nx))
    e, m = energy_density(_zero(), fs)
    np.testing.assert_allclose(e[1:], 0.5)
    assert e[0] == pytest.approx(0.125)
    np.testing.assert_array_equal(m, 0.0)


def test_kinetic_energy_single_cell():
    f = _zero()
    f.values[0, 3, 2] = 1.0  # v = (1.5, 0.5)
    e, _ = energy_density(f, FieldState.zeros(G.nx))
    assert e[0] == pytest.approx(np.sqrt(1 + 1.5 ** 2 + 0.5 ** 2) * G.dv ** 2, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_momentum_flux_dominated_by_energy(seed):
    rng = np.random.default_rng(seed)
    f = Distribution(G, rng.random(G.shape))
    fs = FieldState.from_fields(rng.standard_normal(G.nx), rng.standard_normal(G.nx),
                                rng.standard_normal(G.nx))
    e, m = energy_density(f, fs)
    assert np.all(np.abs(m) <= e + 1e-14)


def test_energy_defect_formula():
    t = np.array([0.0, 0.5, 1.0])
    w = 2.0 + 2 * 0.25 * t + np.array([0.0, 0.01, -0.02])
    assert energy_identity_defect(t, w, 0.25) == pytest.approx(0.01)
    assert energy_identity_defect([0, 1], [0.0, 0.0], 0.0) == 0.0
    with pytest.raises(ValueError):
        energy_identity_defect([0.0], [1.0], 0.0)


def test_moment_sup():
    f = _zero()
    assert moment_sup(f, 3.0) == 0.0
    f.values[1, 0, 0] = 0.5
    assert moment_sup(f, 0.0) == 0.5
    assert moment_sup(f, 2.0) == pytest.approx(0.5 * (1 + 2 * 1.5 ** 2))


def test_continuity_static_state():
    rho = np.linspace(0, 1, 8)
    assert continuity_residual(rho, rho, np.zeros(8), 0.1, 0.1) == 0.0


def test_cone_integrand_nonnegative_and_zero_run():
    rng = np.random.default_rng(0)
    f = Distribution(G, rng.random(G.shape))
    fs = FieldState.from_fields(rng.standard_normal(G.nx), rng.standard_normal(G.nx),
                                rng.standard_normal(G.nx))
    for s in (1, -1):
        assert cone_integrand(f, fs, s).min() >= 0.0
    hist = [np.zeros(G.nx)] * 4
    assert cone_integral(hist, 4, 3, 1, 0.1) == 0.0


def test_cone_integral_trapezoid_on_constant():
    hist = [np.full(10, 2.0)] * 5
    assert cone_integral(hist, 5, 4, -1, 0.25) == pytest.approx(2.0 * 4 * 0.25)
    with pytest.raises(ValueError):
        cone_integral(hist, 1, 4, -1, 0.25)


def test_gradient_norms_on_linear_profile():
    g = PhaseGrid(0.0, 1.0, 1, 2.0, 16)
    v1, _ = g.momentum_mesh()
    f = Distribution(g, (3.0 * v1)[None].copy())
    first, second = grad_v_norms(f)
    inner = (g.nv - 2) ** 2 * g.dv ** 2 * g.dx
    assert first == pytest.approx(3.0 * np.sqrt(inner), rel=1e-12)
    assert second == pytest.approx(0.0, abs=1e-10)


def test_l2_and_slope_helpers():
    f = Distribution(G, np.ones(G.shape))
    assert l2_norm(f) == pytest.approx(np.sqrt(G.nx * G.nv ** 2 * G.dx * G.dv ** 2))
    t = np.geomspace(0.01, 1, 10)
    assert loglog_slope(t, 3 * t ** -1.5) == pytest.approx(-1.5)


def test_csv_columns_flatten_record():
    cols = csv_columns()
    rec = DiagnosticsRecord(0, 1, 0, 1, 1, (1, 1), 1, 0, 0, 0, 0, tuple(range(10)), 0, 0)
    assert len(rec.values()) == len(cols)
    assert cols[0] == "t" and cols[-1] == "grad2_v_l2"

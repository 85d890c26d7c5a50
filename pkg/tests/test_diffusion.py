import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvmfp.diffusion import (
    BoundaryWarning, CFLError, FokkerPlanckOperator, apply_diffusion, apply_fokker_planck,
    diffusion_entries, diffusion_matrix, edge_weights, moment_identity_residual, stability_dt,
)
from rvmfp.grid import PhaseGrid, gamma
from rvmfp.verify import diffusion_identities, moment_identity_ratios

momenta = st.floats(-1e3, 1e3, allow_nan=False)


def test_matrix_at_origin_is_identity():
    np.testing.assert_array_equal(diffusion_matrix((0.0, 0.0)).as_array(), np.eye(2))


def test_matrix_on_axis():
    # v = (1, 0): D = diag(2, 1)/sqrt(2)
    d = diffusion_matrix((1.0, 0.0)).as_array()
    np.testing.assert_allclose(d, np.diag([2.0, 1.0]) / np.sqrt(2.0), rtol=1e-15)


@given(momenta, momenta)
def test_eigenpairs(v1, v2):
    v0 = gamma(v1, v2)
    a1, a2 = apply_diffusion(v1, v2, v1, v2)
    assert np.hypot(a1 - v0 * v1, a2 - v0 * v2) <= 1e-12 * v0 * max(np.hypot(v1, v2), 1e-300)
    a1, a2 = apply_diffusion(v1, v2, -v2, v1)
    assert np.hypot(a1 + v2 / v0, a2 - v1 / v0) <= 1e-12 * np.hypot(v1, v2) / v0 + 1e-300


@given(momenta, momenta, st.floats(-10, 10), st.floats(-10, 10))
def test_ellipticity_sandwich(v1, v2, x1, x2):
    v0 = gamma(v1, v2)
    a1, a2 = apply_diffusion(v1, v2, x1, x2)
    q = x1 * a1 + x2 * a2
    xx = x1 * x1 + x2 * x2
    assert xx / v0 * (1 - 1e-12) <= q <= v0 * xx * (1 + 1e-12) + 1e-300


def test_entries_agree_with_structured_form():
    d11, d12, d22 = diffusion_entries(0.7, -1.3)
    u = np.array([0.2, 0.9])
    np.testing.assert_allclose(
        [d11 * u[0] + d12 * u[1], d12 * u[0] + d22 * u[1]], apply_diffusion(0.7, -1.3, *u), rtol=1e-14
    )


def test_million_point_identity_sweep():
    e1, e2, bad = diffusion_identities(n=10**6)
    assert max(e1, e2) <= 1e-12 and bad == 0


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_vertex_block_reproduces_quadratic_form(w1, w2, p1, p2):
    # one dual cell with a linear u = p.v: the block energy equals p.D p h^2
    a, b, c = diffusion_entries(w1, w2)
    alpha, beta, ab = 0.5 * (a - abs(b)), 0.5 * (c - abs(b)), abs(b)
    h = 0.1
    d1, d2 = p1 * h, p2 * h
    diag = d1 + np.sign(b) * d2
    energy = alpha * 2 * d1 ** 2 + beta * 2 * d2 ** 2 + ab * diag ** 2
    assert energy == pytest.approx((a * p1 * p1 + 2 * b * p1 * p2 + c * p2 * p2) * h * h,
                                   rel=1e-10, abs=1e-14)


def _dense_oracle(grid):
    """Assemble the Laplacian matrix straight from the per-vertex block definition."""
    n, h = grid.nv, grid.dv
    idx = lambda i, j: i * n + j  # noqa: E731
    L = np.zeros((n * n, n * n))

    def edge(p, q, w):
        L[p, q] += w
        L[q, p] += w
        L[p, p] -= w
        L[q, q] -= w

    e = grid.v_edges
    for i in range(n - 1):
        for j in range(n - 1):
            a, b, c = diffusion_entries(e[i + 1], e[j + 1])
            al, be = 0.5 * (a - abs(b)), 0.5 * (c - abs(b))
            edge(idx(i, j), idx(i + 1, j), al)
            edge(idx(i, j + 1), idx(i + 1, j + 1), al)
            edge(idx(i, j), idx(i, j + 1), be)
            edge(idx(i + 1, j), idx(i + 1, j + 1), be)
            if b > 0:
                edge(idx(i, j), idx(i + 1, j + 1), abs(b))
            elif b < 0:
                edge(idx(i + 1, j), idx(i, j + 1), abs(b))
    return L / h ** 2


def test_operator_matches_dense_oracle():
    g = PhaseGrid(0.0, 1.0, 1, 3.0, 12)
    L = _dense_oracle(g)
    f = np.random.default_rng(1).random((g.nv, g.nv))
    got = FokkerPlanckOperator(g).laplacian(f)
    np.testing.assert_allclose(got.ravel(), L @ f.ravel(), rtol=1e-12, atol=1e-12)
    # symmetric, zero row sums, negative semidefinite
    np.testing.assert_allclose(L, L.T, atol=1e-12)
    np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-10)
    assert np.linalg.eigvalsh(L).max() < 1e-9


def test_spectrum_within_stability_bound():
    g = PhaseGrid(0.0, 1.0, 1, 4.0, 16)
    lam = np.linalg.eigvalsh(_dense_oracle(g))
    dt = stability_dt(g, 1.0)
    assert dt * (-lam.min()) <= 2.0


def test_edge_weights_nonnegative_in_core():
    g = PhaseGrid(0.0, 1.0, 1, 2.0, 16)
    for w in edge_weights(g):
        assert w.min() >= 0.0


def test_gaussian_converges_to_continuous_operator():
    # f = exp(-|v|^2/2):  div(D grad f) = f (|v|^2 v0 - 2 v0 - |v|^2 / v0)
    errs = []
    for nv in (32, 64, 128):
        g = PhaseGrid(0.0, 1.0, 1, 8.0, nv)
        v1, v2 = g.momentum_mesh()
        r2 = v1 ** 2 + v2 ** 2
        v0 = g.v0_table
        f = np.exp(-r2 / 2)
        exact = f * (r2 * v0 - 2 * v0 - r2 / v0)
        errs.append(np.abs(FokkerPlanckOperator(g).laplacian(f) - exact).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() > 1.8


def test_moment_identity_second_order():
    _, ratios = moment_identity_ratios()
    assert np.all((ratios >= 3.2) & (ratios <= 4.8))


def test_moment_identity_warns_at_boundary():
    g = PhaseGrid(0.0, 1.0, 1, 2.0, 16)
    with pytest.warns(BoundaryWarning):
        moment_identity_residual(g, np.ones((16, 16)))


def test_constant_is_stationary():
    g = PhaseGrid(0.0, 1.0, 1, 3.0, 20)
    f = np.full((20, 20), 0.7)
    out = apply_fokker_planck(g, f, stability_dt(g))
    np.testing.assert_allclose(out, f, rtol=1e-14)


def test_cfl_violation_raises():
    g = PhaseGrid(0.0, 1.0, 1, 3.0, 20)
    with pytest.raises(CFLError, match="stability_dt"):
        apply_fokker_planck(g, np.zeros((20, 20)), 2 * stability_dt(g))


def test_nonfinite_input_rejected():
    g = PhaseGrid(0.0, 1.0, 1, 3.0, 20)
    f = np.zeros((20, 20))
    f[3, 3] = np.nan
    with pytest.raises(ValueError):
        apply_fokker_planck(g, f, stability_dt(g))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_explicit_step_keeps_mass_and_bounds_in_core(seed):
    g = PhaseGrid(0.0, 1.0, 1, 2.0, 16)
    f = np.random.default_rng(seed).random((16, 16))
    out = apply_fokker_planck(g, f, stability_dt(g))
    assert abs(out.sum() - f.sum()) <= 1e-12 * f.sum()
    assert out.max() <= f.max() * (1 + 1e-14) and out.min() >= f.min() - 1e-14


def test_advance_subcycles():
    g = PhaseGrid(0.0, 1.0, 1, 3.0, 20)
    op = FokkerPlanckOperator(g)
    dt = 10.5 * op.stability_dt
    assert op.substeps(dt) == 11
    f = np.zeros((20, 20))
    f[10, 10] = 1.0
    out = op.advance(f, dt)
    assert out.sum() == pytest.approx(1.0, rel=1e-13)
    assert out.min() >= 0.0


def test_friction_keeps_juttner_profile():
    g = PhaseGrid(0.0, 1.0, 1, 4.0, 64)
    op = FokkerPlanckOperator(g)
    f = np.exp(-(g.v0_table - 1.0))
    out = op.advance(f, 0.5, friction=True)
    assert np.abs(out - f).max() < 0.05 * f.max()
    assert abs(out.sum() - f.sum()) < 1e-12 * f.sum()
    drift = op.advance(f, 0.5, friction=False)
    assert np.abs(drift - f).max() > np.abs(out - f).max()

"""Square-function engine: spectral grid bookkeeping, certified solves,
derived L^2 constants, range additivity, and the resolution of the identity."""

import math

import numpy as np
import pytest

from ends_sqfn.radial_model import EndProfile, build_model
from ends_sqfn.sqfn import (SpectralGrid, SqfnEngine, grad_sq_nodes,
                            horizontal_sqfn, lp_norm,
                            resolution_identity_residual, vertical_sqfn)


def test_grid_weights_split_exactly():
    g = SpectralGrid(1e-6, 100.0, 16)
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[0] == pytest.approx(1e-6)
    assert g.nodes[-1] == pytest.approx(100.0)
    np.testing.assert_allclose(
        g.weights("low") + g.weights("high"), g.weights("full"), rtol=0, atol=0
    )
    with pytest.raises(ValueError):
        g.weights("mid")
    with pytest.raises(ValueError):
        SpectralGrid(2.0, 100.0, 16)  # k_lo above the split


def test_grid_for_model_covers_spectrum(model, grid):
    assert grid.k_lo == pytest.approx(10.0 / 1e9)
    lam_max = float(np.max(2.0 * model.stiffness.diagonal() / model.measure))
    assert grid.k_hi == pytest.approx(10.0 * math.sqrt(lam_max))


def test_grid_quadrature_integrates_powers():
    # int_a^b k^2 dk via the log-trapezoid weights.
    g = SpectralGrid(1e-3, 10.0, 64)
    approx = float(np.sum(g.weights("full") * g.nodes**2))
    exact = (10.0**3 - 1e-9) / 3.0
    # Trapezoid in log k: second order in the log step.
    assert approx == pytest.approx(exact, rel=2e-3)
    fine = SpectralGrid(1e-3, 10.0, 512)
    assert float(np.sum(fine.weights("full") * fine.nodes**2)) == pytest.approx(
        exact, rel=2e-5
    )


def test_solve_is_certified(engine, rough_field):
    for k in (1e-6, 1e-2, 1.0, 50.0):
        u, report = engine.resolvent_apply(k, 2, rough_field)
        assert report.residual <= engine.solve_tol
        assert np.all(np.isfinite(u.values))
    # An unreachable tolerance must raise, not silently degrade.
    strict = SqfnEngine(engine.model, solve_tol=0.0)
    with pytest.raises(RuntimeError):
        strict.resolvent_apply(1e-4, 2, rough_field)


def test_resolvent_forward_identity(engine, rough_field):
    # (L + k^2) u = f recovered by the forward operator at moderate k.
    model = engine.model
    k = 1.0
    u, _ = engine.resolvent_apply(k, 1, rough_field)
    back = model.laplacian_apply(u.values) + k * k * u.values
    err = np.sqrt(model.inner(back - rough_field, back - rough_field)
                  / model.inner(rough_field, rough_field))
    assert err < 1e-10


def test_grad_energy_identity(model, rough_field):
    out = grad_sq_nodes(model, rough_field)
    assert float(np.sum(model.measure * out)) == pytest.approx(
        model.quadratic_form(rough_field), rel=1e-12
    )


@pytest.mark.parametrize("M", [1, 2])
def test_vertical_l2_constant(engine, grid, rough_field, M):
    model = engine.model
    sf = vertical_sqfn(engine, grid, M, rough_field, "full")
    ratio = (lp_norm(model, sf, 2) / lp_norm(model, rough_field, 2)) ** 2
    assert ratio == pytest.approx(1.0 / (2 * (2 * M - 1)), rel=1e-5)


@pytest.mark.parametrize("M", [2, 3])
def test_horizontal_l2_constant(engine, grid, rough_field, M):
    model = engine.model
    sf = horizontal_sqfn(engine, grid, M, rough_field, "full")
    ratio = (lp_norm(model, sf, 2) / lp_norm(model, rough_field, 2)) ** 2
    assert ratio == pytest.approx(1.0 / (2 * (2 * M - 1) * (2 * M - 2)), rel=1e-5)


def test_low_high_additivity(engine, grid, rough_field):
    for fn, M in ((vertical_sqfn, 1), (horizontal_sqfn, 2)):
        full = fn(engine, grid, M, rough_field, "full").values ** 2
        low = fn(engine, grid, M, rough_field, "low").values ** 2
        high = fn(engine, grid, M, rough_field, "high").values ** 2
        np.testing.assert_allclose(low + high, full, rtol=0,
                                   atol=1e-13 * np.max(full))


@pytest.mark.parametrize("kind,M", [("vertical", 1), ("vertical", 2),
                                    ("horizontal", 2)])
def test_resolution_of_identity(engine, grid, rough_field, kind, M):
    res = resolution_identity_residual(engine, grid, M, rough_field, kind)
    assert res < 1e-5


def test_horizontal_requires_higher_order(engine, grid, rough_field):
    with pytest.raises(ValueError):
        horizontal_sqfn(engine, grid, 1, rough_field)
    with pytest.raises(ValueError):
        resolution_identity_residual(engine, grid, 1, rough_field, "horizontal")


def test_lp_norm_limits(model, rough_field):
    assert lp_norm(model, rough_field, math.inf) == pytest.approx(
        np.max(np.abs(rough_field))
    )
    with pytest.raises(ValueError):
        lp_norm(model, rough_field, 0.5)


def test_constants_hold_on_an_independent_model():
    # Different dimensions and scales: the L^2 constant is model-free.
    m = build_model([EndProfile(5, 1.0, 1e6, 32)])
    g = SpectralGrid.for_model(m, points_per_decade_k=24)
    eng = SqfnEngine(m)
    rng = np.random.default_rng(9)
    f = rng.standard_normal(m.num_nodes)
    f[m.end_slice(0)] *= m.node_radius(0) <= 1e2
    sf = vertical_sqfn(eng, g, 2, f, "full")
    ratio = (lp_norm(m, sf, 2) / lp_norm(m, f, 2)) ** 2
    assert ratio == pytest.approx(1.0 / 6.0, rel=1e-5)

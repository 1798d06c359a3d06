"""Discrete model structure: exact volumes, summation by parts, symmetry,
cutoffs, and the witness family (with an independent norm oracle)."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ends_sqfn.radial_model import (EndProfile, ModelManifold, build_model,
                                    cutoff, witness_function)


@pytest.fixture(scope="module")
def small_model():
    return build_model([EndProfile(3, 1.0, 1e6, 32), EndProfile(4, 1.0, 1e6, 32)])


def test_profile_validation():
    with pytest.raises(ValueError):
        EndProfile(2, 1.0, 1e9)          # dimension too small
    with pytest.raises(ValueError):
        EndProfile(3, 1.0, 100.0)        # range too short
    with pytest.raises(ValueError):
        EndProfile(3, -1.0, 1e9)


def test_volume_is_exact_at_grid_radii(small_model):
    # Node-at-right-edge cells: cumulative volume up to node radius r equals
    # the analytic integral of r^(n-1), (r^n - r_first_left^n)/n.
    for i, end in enumerate(small_model.ends):
        r = small_model.node_radius(i)
        rho = 10.0 ** (1.0 / end.points_per_decade)
        for q in (0, 17, len(r) - 1):
            expect = (r[q] ** end.n - (end.r_min / rho) ** end.n) / end.n
            assert small_model.volume(i, r[q]) == pytest.approx(expect, rel=1e-12)


def test_non_doubling_volume_witness():
    # At r = 1e3 the 4-end nearly octuples^(4/3) while the 3-end stays below
    # the doubling bound 8; this is the non-doubling signature of the glue.
    m = build_model([EndProfile(3, 1.0, 1e9, 64), EndProfile(4, 1.0, 1e9, 64)])
    r = 1e3
    ratio3 = m.volume(0, 2 * r) / m.volume(0, r)
    ratio4 = m.volume(1, 2 * r) / m.volume(1, r)
    assert ratio4 >= 15.0
    assert ratio3 <= 9.0


def test_summation_by_parts_and_symmetry(small_model):
    rng = np.random.default_rng(0)
    f = rng.standard_normal(small_model.num_nodes)
    g = rng.standard_normal(small_model.num_nodes)
    lf = small_model.laplacian_apply(f)
    lg = small_model.laplacian_apply(g)
    norm = math.sqrt(small_model.inner(f, f) * small_model.inner(g, g))
    assert abs(small_model.inner(lf, g) - small_model.inner(f, lg)) <= 1e-12 * norm
    assert small_model.inner(lf, f) == pytest.approx(
        small_model.quadratic_form(f), rel=1e-12
    )


def test_constants_are_harmonic_off_the_boundary(small_model):
    ones = np.ones(small_model.num_nodes)
    resid = small_model.stiffness @ ones
    # Only the outermost node of each end touches the Dirichlet ghost edge.
    boundary = {small_model.end_slice(i).stop - 1 for i in range(2)}
    for v in range(small_model.num_nodes):
        if v in boundary:
            assert resid[v] > 0
        else:
            assert abs(resid[v]) <= 1e-12 * small_model.stiffness[v, v]


def test_operator_is_positive_definite(small_model):
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = rng.standard_normal(small_model.num_nodes)
        assert small_model.quadratic_form(f) > 0


def test_hub_measure_is_shared(small_model):
    expect = sum(e.r_min**e.n / e.n for e in small_model.ends)
    assert small_model.measure[0] == pytest.approx(expect, rel=1e-14)


def test_cutoff_shape(small_model):
    phi = cutoff(small_model, 0, (1.0, 10.0))
    vals = phi.values[small_model.end_slice(0)]
    r = small_model.node_radius(0)
    assert np.all((0.0 <= vals) & (vals <= 1.0))
    assert np.all(vals[r >= 10.0] == 1.0)
    assert np.all(np.diff(vals) >= 0)
    assert np.all(phi.values[small_model.end_slice(1)] == 0.0)
    with pytest.raises(ValueError):
        cutoff(small_model, 0, (1.0, small_model.ends[0].r_max))  # ramp too far out


def test_witness_validation(small_model):
    with pytest.raises(ValueError):
        witness_function(small_model, 0, 3.0, 0.0)
    with pytest.raises(ValueError):
        witness_function(small_model, 0, 1.0, 0.2)
    with pytest.warns(UserWarning):
        # n * eps * ln(r_max) = 3 * 0.05 * 13.8 = 2.07 < 3: truncation warning.
        witness_function(small_model, 0, 3.0, 0.05)


def test_witness_norm_against_quadrature_oracle(model):
    # ||f_eps||_p^p on the 3-end against log-space quadrature of the ramp-
    # including profile r^(-n(1+eps)) phi(r)^p r^(n-1) dr.
    p, eps = 3.0, 0.2
    f = witness_function(model, 0, p, eps)
    n = model.ends[0].n
    discrete = float(np.sum(model.measure * np.abs(f.values) ** p))

    def smoothstep(w):
        w = min(1.0, max(0.0, w))
        return w * w * (3 - 2 * w)

    def integrand(u):
        r = math.exp(u)
        phi = smoothstep(u / math.log(2.0))
        return phi**p * r ** (-n * (1 + eps)) * r**n

    oracle, err = quad(integrand, 0.0, math.log(model.ends[0].r_max), limit=400)
    assert err < 1e-9 * oracle
    # First-order cell rule: agreement at the few-percent level at this
    # resolution, much closer at norm level.
    assert discrete == pytest.approx(oracle, rel=0.08)
    assert discrete ** (1 / p) == pytest.approx(oracle ** (1 / p), rel=0.03)


@settings(max_examples=20, deadline=None)
@given(
    n=st.sampled_from([3, 4, 5]),
    decades=st.integers(min_value=4, max_value=8),
    ppd=st.integers(min_value=16, max_value=64),
)
def test_num_nodes_matches_decades(n, decades, ppd):
    prof = EndProfile(n, 1.0, 10.0**decades, ppd)
    assert prof.num_nodes == ppd * decades


def test_build_model_requires_enough_nodes():
    with pytest.raises(ValueError):
        build_model([EndProfile(3, 1.0, 1e3, 4)])  # only 12 nodes

"""Schur-test scans: verdict tables against the analytic finiteness regions,
cutoff recovery, tail-exponent oracles, and the eta lower bound."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ends_sqfn.schur import (INTEGRAL_IDS, KernelEnvelope, WeightProfile,
                             eta_eval, eta_lower_bound, eval_weight,
                             family_envelope, threshold_scan)

R_OUTER = 1e8


def _verdict(integral_id, n_i, n_j, p):
    env = family_envelope(integral_id, n_i, n_j)
    rep = threshold_scan(env, (n_i, n_j), [p], R_OUTER, integral_id)
    return rep.verdicts[0]


def test_kc1_always_finite():
    for p in (1.1, 2.0, 10.0):
        assert _verdict("KC1", 3, 4, p) == "finite"


@pytest.mark.parametrize("p", [1.5, 3.0, 10.0])
def test_kc2_finite_for_all_p(p):
    assert _verdict("KC2", 3, 4, p) == "finite"
    assert _verdict("KC2", 4, 3, p) == "finite"


@pytest.mark.parametrize("nj", [3, 4])
def test_kc3_finite_iff_p_below_nj(nj):
    assert _verdict("KC3", 3, nj, nj - 0.5) == "finite"
    assert _verdict("KC3", 3, nj, nj + 0.5) == "divergent"


@pytest.mark.parametrize("nj", [3, 4])
def test_kc4_i1_finite_iff_p_below_nj(nj):
    assert _verdict("KC4-I1", 3, nj, 1.5) == "finite"
    assert _verdict("KC4-I1", 3, nj, nj - 0.5) == "finite"
    assert _verdict("KC4-I1", 3, nj, nj + 0.5) == "divergent"


@pytest.mark.parametrize("integral_id", ["KC4-I2", "J2"])
@pytest.mark.parametrize("p", [1.5, 3.0, 5.0, 10.0])
def test_kc4_i2_and_j2_finite_everywhere(integral_id, p):
    assert _verdict(integral_id, 3, 4, p) == "finite"


def test_kc4_i2_finite_at_log_critical_boundary():
    # p = n_j / 2 makes the inner integral log-critical in magnitude yet the
    # tail exponent stays below -1; a magnitude test could not decide this.
    assert _verdict("KC4-I2", 3, 4, 2.0) == "finite"
    assert _verdict("KC4-I2", 4, 6, 3.0) == "finite"


@pytest.mark.parametrize("p", [1.5, 3.0, 5.0, 10.0])
def test_j1_finite_everywhere(p):
    assert _verdict("J1", 3, 4, p) == "finite"
    assert _verdict("J1", 4, 3, p) == "finite"


@pytest.mark.parametrize("integral_id", ["KC3", "KC4-I1"])
@pytest.mark.parametrize("nj", [3, 4])
def test_cutoff_recovers_nj(integral_id, nj):
    env = family_envelope(integral_id, 3, nj)
    rep = threshold_scan(env, (3, nj), np.arange(1.5, 6.1, 0.5), R_OUTER,
                         integral_id)
    assert rep.predicted_cutoff == pytest.approx(nj, abs=0.05)


def test_kc3_tail_exponent_matches_analytic():
    # Inner integrand <dy>^{(1-n_j) p'} dy^{n_j - 1}: exponent
    # (1 - n_j) p' + n_j - 1.
    n_j = 4
    for p in (1.5, 2.0, 3.0, 5.0):
        pp = p / (p - 1)
        env = family_envelope("KC3", 3, n_j)
        rep = threshold_scan(env, (3, n_j), [p], R_OUTER, "KC3")
        assert rep.tail_exponents[0] == pytest.approx(
            (1 - n_j) * pp + n_j - 1, abs=1e-3
        )


def test_cutoff_stable_under_outer_radius_doubling():
    env = family_envelope("KC4-I1", 3, 4)
    a = threshold_scan(env, (3, 4), [3.5, 4.5], R_OUTER, "KC4-I1")
    b = threshold_scan(env, (3, 4), [3.5, 4.5], 2 * R_OUTER, "KC4-I1")
    assert abs(a.predicted_cutoff - b.predicted_cutoff) < 1e-3


def test_scan_validation():
    env = family_envelope("KC3", 3, 3)
    with pytest.raises(ValueError):
        threshold_scan(env, (3, 3), [0.9], R_OUTER, "KC3")
    with pytest.raises(ValueError):
        threshold_scan(env, (3, 3), [2.0], 1e3, "KC3")
    with pytest.raises(ValueError):
        threshold_scan(env, (3, 3), [2.0], R_OUTER, "KC9")
    with pytest.raises(ValueError):
        family_envelope("nope", 3, 3)


def test_envelope_combiner_validation():
    with pytest.raises(ValueError):
        KernelEnvelope(0.0, 0.0, combiner="min-of-two")
    env = KernelEnvelope(-1.0, 0.0, combiner="min-of-two",
                         x_exponent2=0.0, y_exponent2=-1.0)
    v = env.eval(2.0, 3.0)
    assert v == pytest.approx(min((1 + 4) ** -0.5, (1 + 9) ** -0.5))


def test_eta_eval_matches_direct_quadrature():
    for M in (1, 2):
        for d in (2.0, 7.0, 40.0):
            oracle, _ = quad(lambda k: k ** (4 * M - 3) * math.exp(-k * d), 0, 1)
            assert eta_eval(M, d) == pytest.approx(oracle, rel=1e-10)


def test_eta_lower_bound_value():
    # eta(d) d^2 = Gamma(2) P(2, d) is increasing, so the minimum over
    # [2, 1e4] sits at d = 2: kappa = 1 - 3 e^{-2} = 0.59399...
    grid = np.geomspace(2.0, 1e4, 200)
    kappa = eta_lower_bound(1, grid)
    assert kappa == pytest.approx(1.0 - 3.0 * math.exp(-2.0), rel=1e-10)
    assert kappa > 0.59
    with pytest.raises(ValueError):
        eta_lower_bound(1, [1.0])  # below the contracted range


@settings(max_examples=30, deadline=None)
@given(
    d=st.floats(min_value=0.0, max_value=100.0),
    k=st.floats(min_value=0.0, max_value=1.0),
)
def test_weight_monotone_in_distance(d, k):
    prof = WeightProfile(a=1, c=0.5, end_exponents=(3, 4))
    w1 = eval_weight(prof, 0, d, k)
    w2 = eval_weight(prof, 0, d + 1.0, k)
    assert 0 < w2 <= w1 <= 1.0
    assert eval_weight(prof, None, d, k) == 1.0

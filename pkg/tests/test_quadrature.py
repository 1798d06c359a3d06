"""The exp-cosh quadrature against the Macdonald-function oracle.

int_{-inf}^{inf} exp(-beta cosh u + nu u) du = 2 K_nu(beta), so every value
the adaptive trapezoid produces can be checked against scipy's Bessel K.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import kve

from ends_sqfn.quadrature import exp_cosh_integral, log_exp_cosh_integral


def _oracle_log(beta: float, nu: float) -> float:
    # kve = e^{beta} K_nu(beta) keeps large beta in range.
    return math.log(2.0 * kve(abs(nu), beta)) - beta


@pytest.mark.parametrize("beta", [1e-3, 0.05, 0.5, 1.0, 7.3, 50.0, 400.0])
@pytest.mark.parametrize("nu", [0.0, 0.5, -0.5, 1.0, 2.5, -3.0])
def test_matches_macdonald_oracle(beta, nu):
    assert log_exp_cosh_integral(beta, nu) == pytest.approx(
        _oracle_log(beta, nu), abs=1e-10
    )


def test_value_form_half_order():
    # K_{1/2}(beta) = sqrt(pi/(2 beta)) e^{-beta} in closed form.
    beta = 2.7
    expected = 2.0 * math.sqrt(math.pi / (2 * beta)) * math.exp(-beta)
    assert exp_cosh_integral(beta, 0.5) == pytest.approx(expected, rel=1e-10)


def test_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        log_exp_cosh_integral(0.0, 1.0)
    with pytest.raises(ValueError):
        log_exp_cosh_integral(-1.0, 0.0)


@settings(max_examples=40, deadline=None)
@given(
    beta=st.floats(min_value=1e-2, max_value=300.0),
    nu=st.floats(min_value=-6.0, max_value=6.0),
)
def test_symmetric_in_nu_and_matches_oracle(beta, nu):
    plus = log_exp_cosh_integral(beta, nu)
    minus = log_exp_cosh_integral(beta, -nu)
    assert plus == pytest.approx(minus, abs=1e-9)
    assert plus == pytest.approx(_oracle_log(beta, nu), abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(beta=st.floats(min_value=0.1, max_value=100.0))
def test_monotone_decreasing_in_beta(beta):
    assert log_exp_cosh_integral(1.1 * beta, 1.0) < log_exp_cosh_integral(beta, 1.0)

"""Double-exponential quadrature for subordination-type integrals.

Every kernel evaluated in this package reduces, after substituting
``t = t_star * exp(u)`` at the saddle point of its integrand, to an integral
of the form

    I(beta, nu) = int_{-inf}^{inf} exp(-beta*cosh(u) + nu*u) du

with ``beta > 0``.  The transformed integrand decays doubly exponentially in
``|u|``, so the plain trapezoid rule converges geometrically; halving the
step until the relative change drops below tolerance gives certified
accuracy.  Accumulation happens on the factored form
``exp(-beta*(cosh u - 1) + nu*u)`` so that ``beta`` up to ~700 stays in
range, and the result is returned as a logarithm.
"""

from __future__ import annotations

import numpy as np


class QuadratureError(RuntimeError):
    """Adaptive refinement failed to reach the requested tolerance."""


def _log_trapezoid(beta: float, nu: float, h: float, u_max: float) -> float:
    u = np.arange(-u_max, u_max + h / 2, h)
    expo = -beta * (np.cosh(u) - 1.0) + nu * u
    m = expo.max()
    return m + np.log(np.sum(np.exp(expo - m)) * h)

def _u_cutoff(beta: float, nu: float) -> float:
    # Find u_max with beta*(cosh u - 1) - |nu|*u - peak_offset > 55, where
    # peak_offset bounds the maximum of the factored exponent.  Two rounds
    # of fixed-point iteration on the arccosh expression suffice.
    anu = abs(nu)
    u_star = np.arcsinh(anu / beta) if anu > 0 else 0.0
    peak = anu * u_star
    u = 4.0
    for _ in range(3):
        u = np.arccosh(1.0 + (55.0 + peak + anu * u) / beta)
    return max(4.0, u + 1.0)


def log_exp_cosh_integral(
    beta: float,
    nu: float,
    rel_tol: float = 1e-12,
    max_points: int = 1 << 20,
) -> float:
    """log of int exp(-beta*cosh(u) + nu*u) du, adaptively refined.

    Raises QuadratureError if successive halvings never agree to rel_tol
    within the point budget.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    u_max = _u_cutoff(beta, nu)
    h = 0.5
    prev = _log_trapezoid(beta, nu, h, u_max)
    while 2 * u_max / h < max_points:
        h /= 2.0
        cur = _log_trapezoid(beta, nu, h, u_max)
        if abs(cur - prev) <= rel_tol:
            return cur - beta
        prev = cur
    raise QuadratureError(
        f"exp-cosh quadrature did not converge (beta={beta}, nu={nu})"
    )


def exp_cosh_integral(beta, nu, rel_tol: float = 1e-12) -> float:
    return float(np.exp(log_exp_cosh_integral(beta, nu, rel_tol)))

"""Fourier-side split of the resolvent symbol (lam^2 + k^2)^(-M).

The transform of the symbol is k^(1-2M) F_M(k|xi|) with

    F_1(u) = pi e^(-u),          F_2(u) = (pi/2)(1 + u) e^(-u),
    F_3(u) = (pi/8)(u^2 + 3u + 3) e^(-u),
    F_4(u) = (pi/48)(u^3 + 6u^2 + 15u + 15) e^(-u),

obtained from F_1 by the recursion F_(M+1) from the derivative in k^2 of
k^(1-2M) F_M(k|xi|).  Multiplying the transform by a plateau window eta(xi/r)
(eta = 1 on [0,1/2], 0 on [1,inf)) splits the symbol into a band-limited part
G and a remainder H whose transform vanishes on |xi| <= r/2; H inherits the
e^(-k xi) tail of the window region, giving the uniform bound
sup_lam |H| <= C e^(-c k r).

Because the windowed transform is nonnegative, the sup over lam of |H| is
attained exactly at lam = 0, so ``h_sup_bound`` computes it by direct
quadrature with no transform noise floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Coefficient arrays of the polynomial factor of F_M, lowest degree first.
_FM_POLY = {
    1: (1.0,),
    2: (1.0, 1.0),
    3: (3.0, 3.0, 1.0),
    4: (15.0, 15.0, 6.0, 1.0),
}
_FM_PREF = {1: math.pi, 2: math.pi / 2, 3: math.pi / 8, 4: math.pi / 48}


def fm_eval(M: int, k: float, xi_grid) -> np.ndarray:
    """k^(1-2M) F_M(k |xi|), the transform of (lam^2 + k^2)^(-M)."""
    if M not in _FM_POLY:
        raise ValueError("M must be one of 1, 2, 3, 4")
    if k < 1:
        raise ValueError("k must be >= 1")
    u = k * np.abs(np.asarray(xi_grid, float))
    poly = np.polynomial.polynomial.polyval(u, _FM_POLY[M])
    return k ** (1 - 2 * M) * _FM_PREF[M] * poly * np.exp(-u)


def eta(v) -> np.ndarray:
    """C^2 plateau window: 1 on [0, 1/2], 0 on [1, inf), quintic in between."""
    v = np.abs(np.asarray(v, float))
    w = np.clip(2.0 * v - 1.0, 0.0, 1.0)
    return 1.0 - w**3 * (10.0 - 15.0 * w + 6.0 * w**2)


@dataclass(frozen=True)
class SplitSpec:
    M: int
    r: float
    k: float
    fft_points: int = 1 << 18
    lambda_max: float = 2.0e3

    def __post_init__(self):
        if self.M not in _FM_POLY:
            raise ValueError("M must be one of 1, 2, 3, 4")
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        n = self.fft_points
        if n < (1 << 14) or n & (n - 1):
            raise ValueError("fft_points must be a power of two >= 2^14")
        if self.lambda_max <= 0:
            raise ValueError("lambda_max must be positive")

    @property
    def xi_max(self) -> float:
        # Conjugate grid extent: d_xi = pi / lambda_max, N/2 points.
        return math.pi * self.fft_points / (2.0 * self.lambda_max)


def split_eval(spec: SplitSpec, lambda_grid):
    """(G, H) values of the windowed split on the given lambda grid.

    Both parts are cosine transforms of the windowed/complementary symbol
    transform; their sum is checked against (lam^2 + k^2)^(-M) by the caller
    (the reconstruction contract is 1e-8 absolute).
    """
    lam = np.asarray(lambda_grid, float)
    xi_max = spec.xi_max
    if xi_max < 20.0 * max(1.0, spec.k):
        raise ValueError("spectral grid too short: xi_max < 20 max(1, k)")
    n = spec.fft_points // 2 + 1
    # The transform decays like e^(-k xi); truncating once it is far below
    # target accuracy concentrates the quadrature points where it matters.
    xi_cut = min(xi_max, max(1.2 * spec.r, (80.0 + 2 * spec.M * 5.0) / spec.k))
    xi = np.linspace(0.0, xi_cut, n)
    fm = fm_eval(spec.M, spec.k, xi)
    if fm[-1] > 1e-12:
        raise ValueError(
            f"aliasing guard: transform tail {fm[-1]:.2e} exceeds 1e-12 "
            f"at xi={xi_cut:.1f}"
        )
    window = eta(xi / spec.r)
    d_xi = xi[1] - xi[0]
    # Even transform: f(lam) = (1/pi) int_0^inf fhat(xi) cos(lam xi) dxi,
    # composite Simpson (n is odd).
    cos_mat = np.cos(np.outer(lam, xi))
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= d_xi / 3.0
    g_vals = cos_mat @ (fm * window * w) / math.pi
    h_vals = cos_mat @ (fm * (1.0 - window) * w) / math.pi
    return g_vals, h_vals


def symbol(M: int, k: float, lam) -> np.ndarray:
    lam = np.asarray(lam, float)
    return (lam**2 + k**2) ** (-float(M))


def h_sup_at(M: int, r: float, k: float, quad_points: int = 4096) -> float:
    """sup over lam of |H^M_(r,k)|, exactly its value at lam = 0.

    The transform of H is nonnegative, so |H(lam)| <= H(0) with equality at
    0; H(0) is the plain integral of the windowed tail, evaluated by
    trapezoid on [r/2, r] plus the exact exponential-polynomial remainder of
    the unwindowed tail beyond r.
    """
    # Window region [r/2, r].
    xi = np.linspace(r / 2.0, r, quad_points)
    vals = fm_eval(M, k, xi) * (1.0 - eta(xi / r))
    core = np.trapezoid(vals, xi)
    # Beyond r the window is identically 0, so integrate F_M exactly:
    # int_r^inf u^j e^(-ku) du via the incomplete-gamma recurrence.
    tail = 0.0
    u0 = k * r
    # int_{u0}^inf u^j e^(-u) du = e^(-u0) * sum_{m<=j} j!/m! u0^m
    for j, coeff in enumerate(_FM_POLY[M]):
        s = sum(math.factorial(j) / math.factorial(m) * u0**m for m in range(j + 1))
        tail += coeff * math.exp(-u0) * s / k ** (j + 1)
    tail *= _FM_PREF[M] * k ** (1 - 2 * M)
    return float((core + tail) / math.pi)


@dataclass
class SupBoundFit:
    M: int
    C: float
    c: float
    max_residual: float       # worst log-residual / dynamic range of log sup
    pass_: bool
    worst_pair: tuple | None = None


def h_sup_bound(M: int, r_grid, k_grid) -> SupBoundFit:
    """Fit sup_lam |H| ~ C e^(-c k r) over the (r, k) product grid.

    log sup is regressed against k*r by least squares.  sup|H| carries a
    k^(-2M) prefactor and a polynomial window-edge factor on top of the
    exponential law, so the residuals are judged relative to the dynamic
    range of log sup over the grid (the fit explains the bound up to that
    fraction of its total variation); pass requires c >= 0.3 and relative
    residual <= 25%.
    """
    r_grid = np.asarray(list(r_grid), float)
    k_grid = np.asarray(list(k_grid), float)
    if np.any(r_grid < 1) or np.any(r_grid > 8):
        raise ValueError("r_grid must lie in [1, 8]")
    if np.any(k_grid < 1) or np.any(k_grid > 10):
        raise ValueError("k_grid must lie in [1, 10]")
    kr, logs = [], []
    pairs = []
    for r in r_grid:
        for k in k_grid:
            kr.append(k * r)
            logs.append(math.log(h_sup_at(M, r, k)))
            pairs.append((r, k))
    kr = np.array(kr)
    logs = np.array(logs)
    slope, intercept = np.polyfit(kr, logs, 1)
    c = -slope
    resid = np.abs(logs - (slope * kr + intercept))
    dyn = logs.max() - logs.min()
    rel = float(resid.max() / dyn) if dyn > 0 else float(resid.max())
    worst = pairs[int(np.argmax(resid))]
    ok = c >= 0.3 and rel <= 0.25
    return SupBoundFit(M=M, C=float(math.exp(intercept)), c=float(c),
                       max_residual=rel, pass_=bool(ok), worst_pair=worst)

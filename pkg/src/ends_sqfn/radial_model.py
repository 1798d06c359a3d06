"""Discrete non-doubling space: radial ends of different dimensions glued at a hub.

Each end carries a geometric grid in the radial variable with density
``r^(n-1)``; the hub is a single Kirchhoff node joining the first node of
every end.  The Laplacian is the divergence-form graph operator

    (L f)_v = (1/mu_v) * sum_{e ~ v} cond_e (f_v - f_u),

so summation by parts ``<L f, f>_mu = Q(f) = sum_e cond_e (f_u - f_v)^2`` is
exact by construction, the operator is symmetric in the mu-weighted inner
product, and constants are in its kernel at every interior node.  A Dirichlet
condition at the outer radius keeps the operator strictly positive.

Cell convention: node q sits at the right edge of its dual cell, so the
cumulative volume up to a grid radius r equals the analytic integral of the
density exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class EndProfile:
    n: int
    r_min: float = 1.0
    r_max: float = 1e9
    points_per_decade: int = 64

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("asymptotic dimension must be >= 3")
        if self.r_min <= 0 or self.r_max < 1e3 * self.r_min:
            raise ValueError("need r_max >= 1e3 * r_min > 0")
        if self.points_per_decade < 1:
            raise ValueError("points_per_decade must be positive")

    @property
    def num_nodes(self) -> int:
        return int(round(self.points_per_decade * math.log10(self.r_max / self.r_min)))


@dataclass
class RadialFunction:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("function values must be finite")


class ModelManifold:
    """Immutable discrete model; build with build_model()."""

    def __init__(self, ends, radii, measure, edges):
        self.ends = tuple(ends)
        self.radii = radii            # list of per-end radius arrays
        self.measure = measure        # mu_v, hub first
        self.edges = edges            # (u, v, cond, h); v = -1 marks Dirichlet ghost
        self.n_min = min(e.n for e in self.ends)
        self.num_nodes = len(measure)
        self._offsets = np.cumsum([1] + [e.num_nodes for e in self.ends])
        self.stiffness = self._assemble()
        # Edge arrays for gradient work (Dirichlet ghost edges included).
        self.edge_u = np.array([e[0] for e in edges])
        self.edge_v = np.array([e[1] for e in edges])
        self.edge_cond = np.array([e[2] for e in edges])
        self.edge_h = np.array([e[3] for e in edges])
        self.edge_measure = self.edge_cond * self.edge_h**2

    def _assemble(self):
        n = self.num_nodes
        A = sp.lil_matrix((n, n))
        for u, v, cond, _h in self.edges:
            A[u, u] += cond
            if v >= 0:
                A[v, v] += cond
                A[u, v] -= cond
                A[v, u] -= cond
        return A.tocsr()

    # -- indexing -----------------------------------------------------------
    def node_index(self, end_index: int, q: int) -> int:
        return self._offsets[end_index] + q

    def end_slice(self, end_index: int) -> slice:
        return slice(self._offsets[end_index], self._offsets[end_index + 1])

    def node_radius(self, end_index: int) -> np.ndarray:
        return self.radii[end_index]

    # -- operator -----------------------------------------------------------
    def laplacian_apply(self, f: np.ndarray) -> np.ndarray:
        return (self.stiffness @ f) / self.measure

    def quadratic_form(self, f: np.ndarray) -> float:
        diffs = f[self.edge_u] - np.where(self.edge_v >= 0, f[self.edge_v], 0.0)
        return float(np.sum(self.edge_cond * diffs**2))

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(self.measure * f * g))

    # -- geometry -----------------------------------------------------------
    def volume(self, end_index: int, r: float) -> float:
        """Cumulative measure of end nodes with radius <= r."""
        sl = self.end_slice(end_index)
        # Relative slack so a query radius that coincides with a grid node up
        # to rounding still includes that node.
        mask = self.radii[end_index] <= r * (1.0 + 1e-9)
        return float(np.sum(self.measure[sl][mask]))


def build_model(ends) -> ModelManifold:
    ends = list(ends)
    if not 1 <= len(ends) <= 8:
        raise ValueError("need between 1 and 8 ends")
    radii, measures, edges = [], [], []
    hub_measure = sum(e.r_min**e.n / e.n for e in ends)
    measure_parts = [np.array([hub_measure])]
    offset = 1
    for e in ends:
        Q = e.num_nodes
        if Q < 100:
            raise ValueError("each end needs at least 100 nodes")
        rho = 10.0 ** (1.0 / e.points_per_decade)
        r = e.r_min * rho ** np.arange(Q)
        radii.append(r)
        # Node q owns the cell (r_{q-1}, r_q]; the first cell starts at
        # r_min / rho so the hub-adjacent node has positive measure too.
        left = np.concatenate([[e.r_min / rho], r[:-1]])
        mu = (r**e.n - left**e.n) / e.n
        measure_parts.append(mu)
        # Interior edges: interface at the geometric midpoint.
        g = np.sqrt(r[:-1] * r[1:])
        h = np.diff(r)
        for q in range(Q - 1):
            edges.append((offset + q, offset + q + 1, g[q] ** (e.n - 1) / h[q], h[q]))
        # Hub gluing edge.
        h0 = e.r_min * (1 - 1 / rho)
        g0 = e.r_min / math.sqrt(rho)
        edges.append((0, offset, g0 ** (e.n - 1) / h0, h0))
        # Dirichlet edge to the ghost node at r_max.
        hb = e.r_max - r[-1]
        gb = math.sqrt(r[-1] * e.r_max)
        edges.append((offset + Q - 1, -1, gb ** (e.n - 1) / hb, hb))
        offset += Q
    measure = np.concatenate(measure_parts)
    return ModelManifold(ends, radii, measure, edges)


def _smoothstep(w: np.ndarray) -> np.ndarray:
    w = np.clip(w, 0.0, 1.0)
    return w * w * (3.0 - 2.0 * w)


def cutoff(model: ModelManifold, end_index: int, ramp) -> RadialFunction:
    """Smooth ramp 0 -> 1 (cubic smoothstep in log r) on one end."""
    r_a, r_b = ramp
    e = model.ends[end_index]
    if not (e.r_min <= r_a < r_b <= e.r_max / 100):
        raise ValueError("invalid ramp interval")
    vals = np.zeros(model.num_nodes)
    r = model.node_radius(end_index)
    w = (np.log(r) - math.log(r_a)) / (math.log(r_b) - math.log(r_a))
    vals[model.end_slice(end_index)] = _smoothstep(w)
    return RadialFunction(vals, label=f"cutoff(end={end_index}, ramp=({r_a},{r_b}))")


def witness_function(model: ModelManifold, end_index: int, p: float, eps: float,
                     ramp=(1.0, 2.0)) -> RadialFunction:
    """Blow-up witness r^(-(n/p)(1+eps)) times the ramp cutoff."""
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    if not (1 < p <= 20):
        raise ValueError("p must lie in (1, 20]")
    e = model.ends[end_index]
    if e.n * eps * math.log(e.r_max) < 3:
        import warnings
        warnings.warn(
            "outer truncation pollutes the eps-asymptotics "
            f"(n*eps*ln(r_max) = {e.n * eps * math.log(e.r_max):.2f} < 3)",
            stacklevel=2,
        )
    phi = cutoff(model, end_index, ramp)
    vals = phi.values.copy()
    sl = model.end_slice(end_index)
    r = model.node_radius(end_index)
    vals[sl] *= r ** (-(e.n / p) * (1 + eps))
    return RadialFunction(vals, label=f"witness(end={end_index}, p={p}, eps={eps})")

"""Gauss-Legendre quadrature over knot-vector spans and rectangle edges.

Nodes and weights are generated by Newton iteration on the Legendre
recurrence, so no external coefficient tables are involved. Rules live on
the reference interval [-1, 1] and are mapped affinely onto each nonempty
knot span.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Newton iteration loses quartic convergence well before this many points
# would be useful; integrands here never need more.
MAX_POINTS = 16


@dataclass(frozen=True)
class QuadRule:
    """Quadrature nodes and weights on the reference interval [-1, 1].

    Attributes
    ----------
    nodes : ndarray
        Strictly increasing points inside (-1, 1), symmetric about 0.
    weights : ndarray
        Positive weights summing to 2 (the measure of [-1, 1]).
    """

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self) -> int:
        return len(self.nodes)


def _legendre(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate P_n and P_n' at x via the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    # P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), valid off the endpoints
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def _gauss_legendre_cached(npoints: int) -> QuadRule:
    if npoints == 1:
        nodes, weights = np.array([0.0]), np.array([2.0])
    else:
        k = np.arange(npoints)
        # Tricomi-style initial guess, descending in x
        x = np.cos(np.pi * (k + 0.75) / (npoints + 0.5))
        for _ in range(100):
            p, dp = _legendre(npoints, x)
            dx = p / dp
            x -= dx
            if np.max(np.abs(dx)) < 1e-15:
                break
        else:
            raise RuntimeError("Gauss-Legendre Newton iteration did not converge")
        _, dp = _legendre(npoints, x)
        weights = 2.0 / ((1.0 - x * x) * dp * dp)
        # enforce exact +/- symmetry, then sort ascending
        x = 0.5 * (x - x[::-1])
        weights = 0.5 * (weights + weights[::-1])
        nodes, weights = x[::-1].copy(), weights[::-1].copy()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(nodes=nodes, weights=weights)


def gauss_legendre(npoints: int) -> QuadRule:
    """Return the Gauss-Legendre rule with ``npoints`` points on [-1, 1].

    The rule integrates polynomials up to degree 2*npoints - 1 exactly.

    Parameters
    ----------
    npoints : int
        Number of quadrature points, between 1 and 16.
    """
    if not isinstance(npoints, (int, np.integer)):
        raise ValueError(f"npoints must be an integer, got {npoints!r}")
    if not 1 <= npoints <= MAX_POINTS:
        raise ValueError(f"npoints must be in [1, {MAX_POINTS}], got {npoints}")
    return _gauss_legendre_cached(int(npoints))


@dataclass(frozen=True)
class Edge:
    """One edge of an axis-aligned parametric rectangle.

    Attributes
    ----------
    tangent_axis : int
        Axis (0 for x, 1 for y) that varies along the edge.
    fixed_value : float
        Constant coordinate of the other axis on this edge.
    normal : tuple
        Outward unit normal; zero along the tangent axis, +/-1 across it.
    """

    tangent_axis: int
    fixed_value: float
    normal: tuple[float, float]


def _check_edge(edge: Edge) -> None:
    if edge.tangent_axis not in (0, 1):
        raise ValueError(f"invalid edge descriptor: tangent_axis {edge.tangent_axis}")
    if not np.isfinite(edge.fixed_value):
        raise ValueError("invalid edge descriptor: non-finite fixed coordinate")
    normal = np.asarray(edge.normal, dtype=float)
    if normal.shape != (2,):
        raise ValueError("invalid edge descriptor: normal must have two components")
    if normal[edge.tangent_axis] != 0.0 or abs(normal[1 - edge.tangent_axis]) != 1.0:
        raise ValueError(f"invalid edge descriptor: normal {edge.normal}")


def rectangle_edges(kv_x, kv_y) -> dict[str, Edge]:
    """Build the four outward-oriented edges of the rectangle spanned by two knot vectors."""
    x0, x1 = kv_x.domain
    y0, y1 = kv_y.domain
    return {
        "left": Edge(tangent_axis=1, fixed_value=x0, normal=(-1.0, 0.0)),
        "right": Edge(tangent_axis=1, fixed_value=x1, normal=(1.0, 0.0)),
        "bottom": Edge(tangent_axis=0, fixed_value=y0, normal=(0.0, -1.0)),
        "top": Edge(tangent_axis=0, fixed_value=y1, normal=(0.0, 1.0)),
    }


def integrate_spans(kv, f, rule: QuadRule) -> float:
    """Integrate ``f`` over the domain of a knot vector, span by span.

    Parameters
    ----------
    kv : KnotVector
        Supplies the nonempty spans whose union is the integration domain.
    f : callable
        Vectorized integrand; receives an ndarray of points.
    rule : QuadRule
        Reference rule mapped affinely onto every span.
    """
    total = 0.0
    for a, b in kv.spans():
        jac = 0.5 * (b - a)
        pts = 0.5 * (a + b) + jac * rule.nodes
        total += jac * float(rule.weights @ np.asarray(f(pts), dtype=float))
    return total


def integrate_edge_2d(kv_tangent, edge: Edge, f, rule: QuadRule) -> float:
    """Integrate ``f(x, y)`` along one rectangle edge.

    The tangential coordinate runs over the spans of ``kv_tangent``; the
    other coordinate is pinned to ``edge.fixed_value``.
    """
    _check_edge(edge)
    total = 0.0
    for a, b in kv_tangent.spans():
        jac = 0.5 * (b - a)
        t = 0.5 * (a + b) + jac * rule.nodes
        fixed = np.full_like(t, edge.fixed_value)
        if edge.tangent_axis == 0:
            vals = f(t, fixed)
        else:
            vals = f(fixed, t)
        total += jac * float(rule.weights @ np.asarray(vals, dtype=float))
    return total

"""Gauss-Legendre rules and span/edge integration."""

import math

import numpy as np
import pytest

from igaheat.bspline import make_knot_vector
from igaheat.quadrature import (
    Edge,
    gauss_legendre,
    integrate_edge_2d,
    integrate_spans,
    rectangle_edges,
)

UNIT_QUADRATIC = make_knot_vector([0, 0, 0, 1, 1, 1], 2)

# classic closed forms, independent of any numerical generator
KNOWN_RULES = {
    1: ([0.0], [2.0]),
    2: ([-1 / math.sqrt(3), 1 / math.sqrt(3)], [1.0, 1.0]),
    3: ([-math.sqrt(3 / 5), 0.0, math.sqrt(3 / 5)], [5 / 9, 8 / 9, 5 / 9]),
    4: (
        [
            -math.sqrt(3 / 7 + 2 / 7 * math.sqrt(6 / 5)),
            -math.sqrt(3 / 7 - 2 / 7 * math.sqrt(6 / 5)),
            math.sqrt(3 / 7 - 2 / 7 * math.sqrt(6 / 5)),
            math.sqrt(3 / 7 + 2 / 7 * math.sqrt(6 / 5)),
        ],
        [
            (18 - math.sqrt(30)) / 36,
            (18 + math.sqrt(30)) / 36,
            (18 + math.sqrt(30)) / 36,
            (18 - math.sqrt(30)) / 36,
        ],
    ),
    5: (
        [
            -math.sqrt(5 + 2 * math.sqrt(10 / 7)) / 3,
            -math.sqrt(5 - 2 * math.sqrt(10 / 7)) / 3,
            0.0,
            math.sqrt(5 - 2 * math.sqrt(10 / 7)) / 3,
            math.sqrt(5 + 2 * math.sqrt(10 / 7)) / 3,
        ],
        [
            (322 - 13 * math.sqrt(70)) / 900,
            (322 + 13 * math.sqrt(70)) / 900,
            128 / 225,
            (322 + 13 * math.sqrt(70)) / 900,
            (322 - 13 * math.sqrt(70)) / 900,
        ],
    ),
}


def test_single_point_rule_is_midpoint():
    rule = gauss_legendre(1)
    assert rule.nodes.tolist() == [0.0]
    assert rule.weights.tolist() == [2.0]


@pytest.mark.parametrize("npoints", sorted(KNOWN_RULES))
def test_rules_match_closed_forms(npoints):
    rule = gauss_legendre(npoints)
    nodes, weights = KNOWN_RULES[npoints]
    assert np.allclose(rule.nodes, nodes, atol=1e-14, rtol=0)
    assert np.allclose(rule.weights, weights, atol=1e-14, rtol=0)


@pytest.mark.parametrize("npoints", range(1, 17))
def test_rules_match_numpy_generator(npoints):
    rule = gauss_legendre(npoints)
    nodes, weights = np.polynomial.legendre.leggauss(npoints)
    assert np.allclose(rule.nodes, nodes, atol=1e-13, rtol=0)
    assert np.allclose(rule.weights, weights, atol=1e-13, rtol=0)


@pytest.mark.parametrize("npoints", range(1, 17))
def test_polynomial_exactness(npoints):
    # degree 2*npoints - 1 is the guaranteed-exact order
    rule = gauss_legendre(npoints)
    rng = np.random.default_rng(npoints)
    coeffs = rng.uniform(-1.0, 1.0, size=2 * npoints)
    exact = sum(
        c / (k + 1) * (1.0 ** (k + 1) - (-1.0) ** (k + 1))
        for k, c in enumerate(coeffs)
    )
    quad = float(rule.weights @ np.polynomial.polynomial.polyval(rule.nodes, coeffs))
    assert quad == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("bad", [0, -1, 17, 2.5, "3"])
def test_invalid_point_counts_rejected(bad):
    with pytest.raises(ValueError):
        gauss_legendre(bad)


def test_weights_positive_and_sum_to_two():
    for npoints in range(1, 17):
        rule = gauss_legendre(npoints)
        assert np.all(rule.weights > 0)
        assert float(rule.weights.sum()) == pytest.approx(2.0, abs=1e-14)


def test_integrate_constant_over_unit_domain():
    value = integrate_spans(UNIT_QUADRATIC, lambda x: np.ones_like(x),
                            gauss_legendre(3))
    assert value == pytest.approx(1.0, abs=1e-15)


def test_integrate_spans_sine():
    kv = make_knot_vector([0, 0, 0, 0.5, 1, 1, 1.5, 2, 2, 2], 2)
    value = integrate_spans(kv, np.sin, gauss_legendre(8))
    assert value == pytest.approx(1.0 - math.cos(2.0), abs=1e-12)


def test_rectangle_edges_structure():
    kv = make_knot_vector([0, 0, 0, 1, 2, 2, 2], 2)
    edges = rectangle_edges(kv, kv)
    assert set(edges) == {"left", "right", "bottom", "top"}
    assert edges["left"].normal == (-1.0, 0.0)
    assert edges["right"].fixed_value == 2.0
    assert edges["bottom"].tangent_axis == 0
    outward = sum(np.asarray(e.normal) for e in edges.values())
    assert np.all(outward == 0.0)


def test_integrate_edge_constant():
    kv = make_knot_vector([0, 0, 0, 1, 2, 2, 2], 2)
    edge = rectangle_edges(kv, kv)["top"]
    value = integrate_edge_2d(kv, edge, lambda x, y: np.ones_like(x),
                              gauss_legendre(2))
    assert value == pytest.approx(2.0, abs=1e-14)


def test_integrate_edge_uses_fixed_coordinate():
    kv = make_knot_vector([0, 0, 0, 1, 2, 2, 2], 2)
    edges = rectangle_edges(kv, kv)
    # f = x * y separates: along top (y=2) int x*2 dx over [0,2] = 4
    value = integrate_edge_2d(kv, edges["top"], lambda x, y: x * y,
                              gauss_legendre(3))
    assert value == pytest.approx(4.0, abs=1e-13)
    # along right (x=2) the tangential variable is y
    value = integrate_edge_2d(kv, edges["right"], lambda x, y: x * y,
                              gauss_legendre(3))
    assert value == pytest.approx(4.0, abs=1e-13)


def test_malformed_edges_rejected():
    kv = make_knot_vector([0, 0, 0, 1, 1, 1], 2)
    rule = gauss_legendre(2)
    for edge in (
        Edge(tangent_axis=2, fixed_value=0.0, normal=(1.0, 0.0)),
        Edge(tangent_axis=0, fixed_value=float("nan"), normal=(0.0, 1.0)),
        Edge(tangent_axis=0, fixed_value=0.0, normal=(0.5, 0.5)),
        Edge(tangent_axis=0, fixed_value=0.0, normal=(1.0, 0.0)),
    ):
        with pytest.raises(ValueError):
            integrate_edge_2d(kv, edge, lambda x, y: x, rule)

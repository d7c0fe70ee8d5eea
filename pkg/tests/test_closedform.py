"""Single-sigmoid-unit oracles: every algebraic partial checked numerically."""

import math

import numpy as np
import pytest

from igaheat.closedform import (
    _dx_half_partials,
    _dxx_partials,
    _value0_partials,
    pinn_unit_dx,
    pinn_unit_dxx,
    pinn_unit_errors,
    pinn_unit_gradients,
    pinn_unit_value,
    scalar_fit_gradients,
    scalar_fit_value,
    sigmoid,
    two_input_fit_gradients,
    two_input_fit_value,
)

PARAM_SETS_4 = [
    np.array([1.0, 1.0, 1.0, 1.0]),
    np.array([3.0, 3.0, 10.0, -1.0]),
    np.array([-0.7, 0.4, 2.5, 0.1]),
    np.array([1.0, 1.0, 3.0, 1.0]),
]


def central_diff(f, params, k, h=1e-6):
    plus, minus = params.copy(), params.copy()
    plus[k] += h
    minus[k] -= h
    return (f(plus) - f(minus)) / (2 * h)


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(1.0) == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=0)
    # stable in both tails
    assert sigmoid(800.0) == 1.0
    assert sigmoid(-800.0) == pytest.approx(0.0, abs=1e-300)
    assert sigmoid(-30.0) == pytest.approx(math.exp(-30.0), rel=1e-12)


def test_scalar_fit_value_example():
    assert scalar_fit_value((1.0, 1.0, 1.0, 1.0), 0.0) == pytest.approx(
        1.7310585786300049, abs=1e-15)


@pytest.mark.parametrize("params", PARAM_SETS_4)
@pytest.mark.parametrize("n,target", [(0.0, 1.0), (0.25, -0.3), (0.47, 2.0)])
def test_scalar_fit_gradients_match_fd(params, n, target):
    error, grads = scalar_fit_gradients(params, n, target)
    value = scalar_fit_value(params, n)
    assert error == pytest.approx(0.5 * (value - target) ** 2, abs=1e-15)
    for k in range(4):
        fd = central_diff(
            lambda p: scalar_fit_gradients(p, n, target)[0], params, k)
        assert grads[k] == pytest.approx(fd, abs=1e-8)


def test_scalar_fit_zero_error_zeroes_gradients():
    params = np.array([1.0, 1.0, 1.0, 1.0])
    target = scalar_fit_value(params, 0.3)
    error, grads = scalar_fit_gradients(params, 0.3, target)
    assert error == 0.0
    assert np.all(grads == 0.0)


@pytest.mark.parametrize("params", [
    np.array([1.0, 1.0, 1.0, 1.0, 1.0]),
    np.array([0.5, -1.2, 0.3, 2.0, -0.4]),
])
@pytest.mark.parametrize("n,x,target", [(0.1, 0.4, 0.7), (0.5, 0.01, -0.2)])
def test_two_input_fit_gradients_match_fd(params, n, x, target):
    error, grads = two_input_fit_gradients(params, n, x, target)
    value = two_input_fit_value(params, n, x)
    assert error == pytest.approx(0.5 * (value - target) ** 2, abs=1e-15)
    for k in range(5):
        fd = central_diff(
            lambda p: two_input_fit_gradients(p, n, x, target)[0], params, k)
        assert grads[k] == pytest.approx(fd, abs=1e-8)


def test_two_input_reduces_to_scalar_when_x_weight_zero():
    scalar = np.array([0.8, -0.2, 1.5, 0.3])
    two = np.array([0.8, 0.0, -0.2, 1.5, 0.3])
    for n in (0.05, 0.3):
        assert two_input_fit_value(two, n, 0.77) == pytest.approx(
            scalar_fit_value(scalar, n), abs=1e-15)


# --- physics unit ---------------------------------------------------------------


@pytest.mark.parametrize("params", PARAM_SETS_4)
def test_pinn_unit_dx_matches_fd(params):
    for x in (0.0, 0.2, 0.5):
        h = 1e-6
        fd = (pinn_unit_value(params, x + h)
              - pinn_unit_value(params, x - h)) / (2 * h)
        assert pinn_unit_dx(params, x) == pytest.approx(fd, abs=1e-9)


@pytest.mark.parametrize("params", PARAM_SETS_4)
def test_pinn_unit_dxx_matches_fd(params):
    for x in (0.0, 0.2, 0.5):
        h = 1e-5
        fd = (pinn_unit_dx(params, x + h)
              - pinn_unit_dx(params, x - h)) / (2 * h)
        assert pinn_unit_dxx(params, x) == pytest.approx(fd, abs=1e-8)


def test_pinn_unit_errors_definition():
    params = np.array([1.0, 1.0, 3.0, 1.0])
    x, n = 0.3, 0.333
    npi = n * math.pi
    e1, e2, e3 = pinn_unit_errors(params, x, n)
    assert e1 == pytest.approx(
        0.5 * (pinn_unit_dxx(params, x) + npi ** 2 * math.sin(npi * x)) ** 2,
        abs=1e-15)
    assert e2 == pytest.approx(0.5 * pinn_unit_value(params, 0.0) ** 2,
                               abs=1e-15)
    assert e3 == pytest.approx(
        0.5 * (pinn_unit_dx(params, 0.5) - npi * math.cos(0.5 * npi)) ** 2,
        abs=1e-15)


@pytest.mark.parametrize("params", PARAM_SETS_4)
def test_dxx_partials_match_fd(params):
    x = 0.27
    for k in range(4):
        fd = central_diff(lambda p: pinn_unit_dxx(p, x), params, k)
        assert _dxx_partials(params, x)[k] == pytest.approx(fd, abs=1e-7)


@pytest.mark.parametrize("params", PARAM_SETS_4)
def test_value0_partials_match_fd(params):
    for k in range(4):
        fd = central_diff(lambda p: pinn_unit_value(p, 0.0), params, k)
        assert _value0_partials(params)[k] == pytest.approx(fd, abs=1e-9)


@pytest.mark.parametrize("params", PARAM_SETS_4)
def test_dx_half_partials_match_fd(params):
    for k in range(4):
        fd = central_diff(lambda p: pinn_unit_dx(p, 0.5), params, k)
        assert _dx_half_partials(params)[k] == pytest.approx(fd, abs=1e-7)


@pytest.mark.parametrize("params", PARAM_SETS_4)
@pytest.mark.parametrize("x,n", [(0.1, 0.333), (0.44, 0.2)])
def test_pinn_unit_gradients_match_fd(params, x, n):
    g1, g2, g3 = pinn_unit_gradients(params, x, n)
    for term, grad in enumerate((g1, g2, g3)):
        for k in range(4):
            fd = central_diff(
                lambda p: pinn_unit_errors(p, x, n)[term], params, k)
            assert grad[k] == pytest.approx(fd, abs=5e-7)

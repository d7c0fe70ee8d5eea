"""Closed-form values and gradients of one-sigmoid-unit networks.

Three tiny fitting schemes built on ANN(t) = c * sigmoid(w.t + b) + d are
written out term by term: a one-input fit, a two-input fit, and a 1D
physics-residual fit whose loss touches ANN, ANN_x, and ANN_xx. Every
partial derivative here is an explicit algebraic expression, derived and
checked independently of the generic network engine, so these functions
act as exact oracles for backpropagation and input-derivative code.

All losses use the 0.5 * (.)^2 convention.
"""

from __future__ import annotations

import math

import numpy as np


def sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    et = math.exp(t)
    return et / (1.0 + et)


# --- one-input unit: ANN(n) = c*sigmoid(a*n + b) + d ------------------------


def scalar_fit_value(params, n: float) -> float:
    a, b, c, d = params
    return c * sigmoid(a * n + b) + d


def scalar_fit_gradients(params, n: float, target: float):
    """Error 0.5*(ANN(n) - target)^2 and its four partials.

    Returns ``(error, grads)`` with grads ordered (a, b, c, d).
    """
    a, b, c, d = params
    value = scalar_fit_value(params, n)
    diff = value - target
    error = 0.5 * diff * diff
    e = math.exp(-a * n - b)
    grads = np.array(
        [
            c * n * e * diff / (e + 1.0) ** 2,
            c * e * diff / (e + 1.0) ** 2,
            diff / (e + 1.0),
            diff,
        ]
    )
    return error, grads


# --- two-input unit: ANN(n, x) = c*sigmoid(a1*n + a2*x + b) + d -------------


def two_input_fit_value(params, n: float, x: float) -> float:
    a1, a2, b, c, d = params
    return c * sigmoid(a1 * n + a2 * x + b) + d


def two_input_fit_gradients(params, n: float, x: float, target: float):
    """Error 0.5*(ANN(n, x) - target)^2 and its five partials.

    Returns ``(error, grads)`` with grads ordered (a1, a2, b, c, d).
    """
    a1, a2, b, c, d = params
    value = two_input_fit_value(params, n, x)
    diff = value - target
    error = 0.5 * diff * diff
    e = math.exp(-a1 * n - a2 * x - b)
    grads = np.array(
        [
            c * n * e * diff / (e + 1.0) ** 2,
            c * x * e * diff / (e + 1.0) ** 2,
            c * e * diff / (e + 1.0) ** 2,
            diff / (e + 1.0),
            diff,
        ]
    )
    return error, grads


# --- physics unit: PINN(x) = c*sigmoid(a*x + b) + d -------------------------
#
# Trained for u'' + f = 0 on (0, 0.5) with u(0) = 0, u'(0.5) = g(0.5),
# f(x) = (n pi)^2 sin(n pi x), g(x) = n pi cos(n pi x). Three error terms:
#   error1(x)   = 0.5*(PINN_xx(x) + f(x))^2      residual at a sample point
#   error2      = 0.5*(PINN(0))^2                Dirichlet end
#   error3      = 0.5*(PINN_x(0.5) - g(0.5))^2   Neumann end


def pinn_unit_value(params, x: float) -> float:
    a, b, c, d = params
    return c * sigmoid(a * x + b) + d


def pinn_unit_dx(params, x: float) -> float:
    a, b, c, d = params
    e = math.exp(-a * x - b)
    return a * c * e / (e + 1.0) ** 2


def pinn_unit_dxx(params, x: float) -> float:
    a, b, c, d = params
    e = math.exp(-a * x - b)
    return c * (2.0 * a * a * math.exp(-2.0 * a * x - 2.0 * b) / (e + 1.0) ** 3
                - a * a * e / (e + 1.0) ** 2)


def _dxx_partials(params, x: float) -> np.ndarray:
    """Partials of PINN_xx(x) with respect to (a, b, c, d)."""
    a, b, c, d = params
    e = math.exp(-a * x - b)
    e2 = math.exp(-2.0 * a * x - 2.0 * b)
    e3 = math.exp(-3.0 * a * x - 3.0 * b)
    da = c * (
        a * a * x * e / (e + 1.0) ** 2
        - 6.0 * a * a * x * e2 / (e + 1.0) ** 3
        + 6.0 * a * a * x * e3 / (e + 1.0) ** 4
        - 2.0 * a * e / (e + 1.0) ** 2
        + 4.0 * a * e2 / (e + 1.0) ** 3
    )
    ep = math.exp(a * x + b)
    db = c * (a * a * ep * (-4.0 * ep + math.exp(2.0 * a * x + 2.0 * b) + 1.0)
              / (ep + 1.0) ** 4)
    dc = 2.0 * a * a * e2 / (e + 1.0) ** 3 - a * a * e / (e + 1.0) ** 2
    return np.array([da, db, dc, 0.0])


def _value0_partials(params) -> np.ndarray:
    """Partials of PINN(0) with respect to (a, b, c, d)."""
    a, b, c, d = params
    eb = math.exp(-b)
    return np.array([0.0, eb * c / (eb + 1.0) ** 2, 1.0 / (eb + 1.0), 1.0])


def _dx_half_partials(params) -> np.ndarray:
    """Partials of PINN_x(0.5) with respect to (a, b, c, d)."""
    a, b, c, d = params
    denom = (math.exp(0.5 * a + b) + 1.0) ** 3
    da = c * math.exp(b - a) * (
        (1.0 - 0.5 * a) * math.exp(2.0 * a + b) + (0.5 * a + 1.0) * math.exp(1.5 * a)
    ) / denom
    db = a * c * math.exp(b - 0.5 * a) * (math.exp(a) - math.exp(1.5 * a + b)) / denom
    eh = math.exp(-0.5 * a - b)
    dc = a * eh / (eh + 1.0) ** 2
    return np.array([da, db, dc, 0.0])


def pinn_unit_errors(params, x: float, n: float) -> tuple[float, float, float]:
    """The three loss terms (residual at x, Dirichlet at 0, Neumann at 0.5)."""
    npi = n * math.pi
    residual = pinn_unit_dxx(params, x) + npi * npi * math.sin(npi * x)
    flux = pinn_unit_dx(params, 0.5) - npi * math.cos(npi * 0.5)
    value0 = pinn_unit_value(params, 0.0)
    return 0.5 * residual ** 2, 0.5 * value0 ** 2, 0.5 * flux ** 2


def pinn_unit_gradients(params, x: float, n: float):
    """All twelve partials of the three loss terms.

    Returns ``(g1, g2, g3)``: gradients of error1(x), error2, error3 with
    respect to (a, b, c, d), each composed as (residual factor) times the
    closed-form partials of PINN_xx, PINN(0), PINN_x(0.5).
    """
    npi = n * math.pi
    residual = pinn_unit_dxx(params, x) + npi * npi * math.sin(npi * x)
    value0 = pinn_unit_value(params, 0.0)
    flux = pinn_unit_dx(params, 0.5) - npi * math.cos(npi * 0.5)
    g1 = residual * _dxx_partials(params, x)
    g2 = value0 * _value0_partials(params)
    g3 = flux * _dx_half_partials(params)
    return g1, g2, g3

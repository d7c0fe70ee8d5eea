"""One-dimensional single-unit reference pipelines.

The three 2D training schemes are mirrored here at the smallest scale
that still exercises every moving part: a unit fitted to projection
coefficients, a unit fitted to field samples, and a unit fitted to the
physics residual of u'' + f = 0. The projection target is the quadratic
representation of sin(n pi x) on [0, 1] in the basis (1-x)^2, 2x(1-x),
x^2. The Gram matrix here is a literal array of fractions and the 3x3
solve uses Cramer's rule, so this route is independent of the
quadrature-assembled path in :mod:`igaheat.iga` and the two can check
each other.

Training loops take one pass of ``len(dataset)`` seeded random draws
with replacement and apply plain gradient-descent updates with the
closed-form gradients of :mod:`igaheat.closedform`. Each loop has an
engine twin that visits the same samples but pulls its gradients from
the generic network code, so the two trajectories must coincide.
"""

from __future__ import annotations

import math

import numpy as np

from . import closedform
from .iga import sine_projection_rhs
from .neuralnet import (
    Mlp,
    backward,
    backward_input_derivatives,
    forward,
    forward_with_input_derivatives,
)

# Gram matrix of (1-x)^2, 2x(1-x), x^2 on [0, 1].
PROJECTION_MATRIX = np.array(
    [
        [1.0 / 5.0, 1.0 / 10.0, 1.0 / 30.0],
        [1.0 / 10.0, 2.0 / 15.0, 1.0 / 10.0],
        [1.0 / 30.0, 1.0 / 10.0, 1.0 / 5.0],
    ]
)

# Loop start points that reach a usable fit within one pass.
SCALAR_STARTS = ((1.0, 1.0, 1.0, 1.0), (1.0, 1.0, 10.0, -1.0), (3.0, 3.0, 10.0, -1.0))
TWO_INPUT_START = (1.0, 1.0, 1.0, 1.0, 1.0)
PHYSICS_START = (1.0, 1.0, 3.0, 1.0)


def solve_projection_cramer(n: float) -> np.ndarray:
    """Project sin(n pi x) onto the quadratic basis via Cramer's rule."""
    rhs = sine_projection_rhs(n)
    det = np.linalg.det(PROJECTION_MATRIX)
    coeffs = np.empty(3)
    for k in range(3):
        mod = PROJECTION_MATRIX.copy()
        mod[:, k] = rhs
        coeffs[k] = np.linalg.det(mod) / det
    return coeffs


def coefficient_dataset(step: float = 0.01, stop: float = 0.5):
    """Projection coefficients of sin(n pi x) for n = step, 2*step, ..., stop.

    Returns ``(n_values, coefficients)`` with coefficients of shape
    (len(n_values), 3). The default grid has 50 samples.
    """
    count = int(round(stop / step))
    n_values = step * np.arange(1, count + 1)
    coeffs = np.array([solve_projection_cramer(n) for n in n_values])
    return n_values, coeffs


def bernstein_value(coeffs, x):
    """Evaluate u1*(1-x)^2 + u2*2x(1-x) + u3*x^2 (vectorized in x)."""
    u1, u2, u3 = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    return u1 * (1.0 - x) ** 2 + u2 * 2.0 * x * (1.0 - x) + u3 * x ** 2


def field_dataset(n_step: float = 0.001, x_step: float = 0.001, stop: float = 0.5):
    """Tabulated field samples ((n, x) -> projected sin value).

    Every n on the grid is projected once; the projected quadratic is then
    evaluated on the x grid. Returns flat arrays (n, x, y) of equal length
    (default 491 * 491 rows).
    """
    n_values, coeffs = coefficient_dataset(n_step, stop)
    x_count = int(round(stop / x_step))
    x_values = x_step * np.arange(1, x_count + 1)
    basis = np.stack(
        [(1.0 - x_values) ** 2, 2.0 * x_values * (1.0 - x_values), x_values ** 2]
    )
    y = coeffs @ basis
    nn, xx = np.meshgrid(n_values, x_values, indexing="ij")
    return nn.ravel(), xx.ravel(), y.ravel()


def _draw_order(rng_seed: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    return rng.integers(0, size, size=size)


def train_scalar_fit(inputs, targets, start, eta: float = 0.1, seed: int = 0):
    """One pass of stochastic descent on 0.5*(ANN(n) - target)^2.

    Visits len(inputs) random samples (with replacement, seeded) and
    applies the closed-form gradients. Returns (params, per-step errors).
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    params = np.array(start, dtype=float)
    errors = np.empty(len(inputs))
    for step, i in enumerate(_draw_order(seed, len(inputs))):
        error, grads = closedform.scalar_fit_gradients(params, inputs[i], targets[i])
        params -= eta * grads
        errors[step] = error
    return params, errors


def train_two_input_fit(n_inputs, x_inputs, targets, start, eta: float = 0.1,
                        seed: int = 0):
    """One pass of stochastic descent on 0.5*(ANN(n, x) - target)^2."""
    n_inputs = np.asarray(n_inputs, dtype=float)
    x_inputs = np.asarray(x_inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    params = np.array(start, dtype=float)
    errors = np.empty(len(n_inputs))
    for step, i in enumerate(_draw_order(seed, len(n_inputs))):
        error, grads = closedform.two_input_fit_gradients(
            params, n_inputs[i], x_inputs[i], targets[i]
        )
        params -= eta * grads
        errors[step] = error
    return params, errors


def train_physics_unit(x_samples, n: float, start=PHYSICS_START, eta: float = 0.1,
                       seed: int = 0, gradients=closedform.pinn_unit_gradients):
    """One pass of stochastic descent on the three physics error terms.

    Each visited sample triggers three updates in order: the residual
    term at the sample point, then the fixed-end term, then the flux-end
    term, each with the parameters left by the previous update. Returns
    (params, errors) where errors[k] holds the three term values after
    the k-th sample's updates.
    """
    x_samples = np.asarray(x_samples, dtype=float)
    params = np.array(start, dtype=float)
    errors = np.empty((len(x_samples), 3))
    for step, i in enumerate(_draw_order(seed, len(x_samples))):
        x = x_samples[i]
        params -= eta * gradients(params, x, n)[0]
        params -= eta * gradients(params, x, n)[1]
        params -= eta * gradients(params, x, n)[2]
        errors[step] = closedform.pinn_unit_errors(params, x, n)
    return params, errors


# --- engine twins ------------------------------------------------------------


def scalar_unit_mlp(params) -> Mlp:
    """ANN(n) = c*sigmoid(a*n + b) + d as a 1-1-1 network."""
    a, b, c, d = (float(p) for p in params)
    return Mlp(
        weights=[np.array([[a]]), np.array([[c]])],
        biases=[np.array([b]), np.array([d])],
        activations=["sigmoid", "identity"],
    )


def two_input_unit_mlp(params) -> Mlp:
    """ANN(n, x) = c*sigmoid(a1*n + a2*x + b) + d as a 2-1-1 network."""
    a1, a2, b, c, d = (float(p) for p in params)
    return Mlp(
        weights=[np.array([[a1, a2]]), np.array([[c]])],
        biases=[np.array([b]), np.array([d])],
        activations=["sigmoid", "identity"],
    )


def _unit_grads(grads) -> np.ndarray:
    """Flatten 1-unit network gradients to the (weights..., b, c, d) layout."""
    (dw1, db1), (dw2, db2) = grads
    return np.concatenate([dw1[0], db1, dw2[0], db2])


def engine_scalar_fit_gradients(params, n: float, target: float):
    """Generic-engine version of :func:`closedform.scalar_fit_gradients`."""
    mlp = scalar_unit_mlp(params)
    y, cache = forward(mlp, [n])
    diff = float(y[0]) - target
    grads = backward(mlp, cache, np.array([diff]))
    return 0.5 * diff * diff, _unit_grads(grads)


def engine_two_input_fit_gradients(params, n: float, x: float, target: float):
    """Generic-engine version of :func:`closedform.two_input_fit_gradients`."""
    mlp = two_input_unit_mlp(params)
    y, cache = forward(mlp, [n, x])
    diff = float(y[0]) - target
    grads = backward(mlp, cache, np.array([diff]))
    return 0.5 * diff * diff, _unit_grads(grads)


def engine_physics_unit_gradients(params, x: float, n: float):
    """Generic-engine version of :func:`closedform.pinn_unit_gradients`.

    The residual term differentiates the second input derivative, the
    fixed-end term the plain output at 0, and the flux-end term the
    first input derivative at 0.5.
    """
    npi = n * math.pi
    mlp = scalar_unit_mlp(params)

    y, dy, d2y, tape = forward_with_input_derivatives(mlp, [[x]], order=2)
    residual = float(d2y[0, 0]) + npi * npi * math.sin(npi * x)
    g1 = _unit_grads(
        backward_input_derivatives(mlp, tape, d2y_bar=np.array([[residual]]))
    )

    y0, cache = forward(mlp, [0.0])
    g2 = _unit_grads(backward(mlp, cache, np.array([float(y0[0])])))

    _, dyh, _, tape1 = forward_with_input_derivatives(mlp, [[0.5]], order=1)
    flux = float(dyh[0, 0]) - npi * math.cos(npi * 0.5)
    g3 = _unit_grads(
        backward_input_derivatives(mlp, tape1, dy_bar=np.array([[flux]]))
    )
    return g1, g2, g3


def train_physics_unit_engine(x_samples, n: float, start=PHYSICS_START,
                              eta: float = 0.1, seed: int = 0):
    """Engine-gradient twin of :func:`train_physics_unit` (same visit order)."""
    return train_physics_unit(
        x_samples, n, start, eta, seed, gradients=engine_physics_unit_gradients
    )


def physics_unit_deviation(params, n: float, num: int = 501) -> float:
    """max |c*sigmoid(a*x+b)+d - sin(n pi x)| over [0, 0.5]."""
    xs = np.linspace(0.0, 0.5, num)
    values = np.array([closedform.pinn_unit_value(params, x) for x in xs])
    return float(np.max(np.abs(values - np.sin(n * math.pi * xs))))

"""Dense feed-forward networks in double precision with explicit calculus.

Everything a training loop needs is spelled out here by hand: forward
evaluation, reverse-mode parameter gradients, forward-propagated input
derivatives (first order, and diagonal second order for residual losses),
and the adjoint of that derivative propagation so losses built on u_x or
u_xx can be differentiated with respect to the weights. Optimizers are
plain SGD and Adam with bias correction, plus a reduce-on-plateau
learning-rate rule.

Conventions: weights have shape (n_out, n_in), inputs are row vectors or
(batch, n_in) arrays, one activation tag per layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("identity", "relu", "sigmoid", "tanh")


class TrainingDivergedError(RuntimeError):
    """Raised when a loss becomes NaN or infinite during training."""


@dataclass(eq=False)
class Mlp:
    """Layer weights, biases, and activation tags of a dense network."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[str]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]


def init_mlp(layer_sizes, activations, seed: int) -> Mlp:
    """Create a network with Glorot-uniform weights and zero biases.

    Parameters
    ----------
    layer_sizes : sequence of int
        [input_dim, hidden..., output_dim], all positive.
    activations : sequence of str
        One tag per layer (len(layer_sizes) - 1 entries), each one of
        'identity', 'relu', 'sigmoid', 'tanh'.
    seed : int
        Seeds the weight draws; identical seeds give identical networks.
    """
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError(f"layer_sizes must be >= 2 positive entries, got {layer_sizes}")
    acts = list(activations)
    if len(acts) != len(sizes) - 1:
        raise ValueError(
            f"need {len(sizes) - 1} activation tags for {len(sizes)} layer sizes, got {len(acts)}"
        )
    for tag in acts:
        if tag not in ACTIVATIONS:
            raise ValueError(f"unknown activation {tag!r}, expected one of {ACTIVATIONS}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return Mlp(weights=weights, biases=biases, activations=acts)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activation(tag: str, z: np.ndarray, order: int):
    """Return (f, f', ..., f^(order)) of the activation evaluated at z."""
    if tag == "identity":
        out = [z, np.ones_like(z)]
        while len(out) <= order:
            out.append(np.zeros_like(z))
    elif tag == "relu":
        # subgradient convention: derivative 0 at the kink
        f1 = (z > 0).astype(z.dtype)
        out = [np.maximum(z, 0.0), f1]
        while len(out) <= order:
            out.append(np.zeros_like(z))
    elif tag == "sigmoid":
        s = _sigmoid(z)
        out = [s]
        if order >= 1:
            out.append(s * (1.0 - s))
        if order >= 2:
            out.append(out[1] * (1.0 - 2.0 * s))
        if order >= 3:
            out.append(out[2] * (1.0 - 2.0 * s) - 2.0 * out[1] ** 2)
    elif tag == "tanh":
        t = np.tanh(z)
        out = [t]
        if order >= 1:
            out.append(1.0 - t * t)
        if order >= 2:
            out.append(-2.0 * t * out[1])
        if order >= 3:
            out.append(-2.0 * out[1] ** 2 - 2.0 * t * out[2])
    else:
        raise ValueError(f"unknown activation {tag!r}")
    return tuple(out[: order + 1])


def _as_batch(mlp: Mlp, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != mlp.input_dim:
        raise ValueError(f"input shape {np.shape(x)} does not match input_dim {mlp.input_dim}")
    return arr, single


def forward(mlp: Mlp, x) -> tuple[np.ndarray, dict]:
    """Evaluate the network.

    Returns the output (squeezed to 1D for a single input vector) and a
    cache consumed by :func:`backward`.
    """
    a, single = _as_batch(mlp, x)
    inputs, zs = [], []
    for w, b, tag in zip(mlp.weights, mlp.biases, mlp.activations):
        inputs.append(a)
        z = a @ w.T + b
        zs.append(z)
        (a,) = _activation(tag, z, 0)
    cache = {"inputs": inputs, "zs": zs, "single": single}
    return (a[0] if single else a), cache


def backward(mlp: Mlp, cache: dict, output_grad) -> list[tuple[np.ndarray, np.ndarray]]:
    """Reverse-mode parameter gradients.

    ``output_grad`` is dLoss/d(output) with the same shape the forward
    pass returned; gradients are summed over the batch. Returns one
    (dW, db) pair per layer.
    """
    delta = np.asarray(output_grad, dtype=float)
    if cache["single"]:
        delta = delta[None, :]
    if delta.shape != cache["zs"][-1].shape:
        raise ValueError(
            f"output_grad shape {np.shape(output_grad)} does not match output {cache['zs'][-1].shape}"
        )
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(mlp.weights)  # type: ignore
    for layer in reversed(range(len(mlp.weights))):
        z = cache["zs"][layer]
        a_prev = cache["inputs"][layer]
        _, f1 = _activation(mlp.activations[layer], z, 1)
        dz = delta * f1
        grads[layer] = (dz.T @ a_prev, dz.sum(axis=0))
        delta = dz @ mlp.weights[layer]
    return grads


def _check_derivative_request(mlp: Mlp, order: int) -> None:
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    if mlp.output_dim != 1:
        raise ValueError(
            f"input derivatives require a scalar output, got output_dim {mlp.output_dim}"
        )
    if order == 2 and "relu" in mlp.activations:
        raise ValueError(
            "second input derivatives of relu networks vanish almost everywhere; "
            "use a smooth activation"
        )


def forward_with_input_derivatives(mlp: Mlp, x, order: int = 2):
    """Forward pass that also carries d(output)/dx_k (and the diagonal
    second derivatives for order 2) through every layer.

    Returns ``(y, dy, d2y, tape)`` where y has shape (batch,), dy and d2y
    (batch, input_dim); d2y is None for order 1. The tape feeds
    :func:`backward_input_derivatives`.
    """
    _check_derivative_request(mlp, order)
    a, single = _as_batch(mlp, x)
    nb, nd = a.shape
    u = np.broadcast_to(np.eye(nd), (nb, nd, nd)).copy()
    v = np.zeros((nb, nd, nd)) if order == 2 else None
    tape = {"layers": [], "single": single, "order": order}
    deriv_order = 3 if order == 2 else 2
    for w, b, tag in zip(mlp.weights, mlp.biases, mlp.activations):
        z = a @ w.T + b
        t = u @ w.T
        s = v @ w.T if order == 2 else None
        facts = _activation(tag, z, deriv_order)
        f = facts[0]
        f1 = facts[1]
        f2 = facts[2]
        f3 = facts[3] if order == 2 else None
        tape["layers"].append(
            {"a_in": a, "u_in": u, "v_in": v, "t": t, "s": s, "f1": f1, "f2": f2, "f3": f3}
        )
        a = f
        u = f1[:, None, :] * t
        if order == 2:
            v = f2[:, None, :] * t * t + f1[:, None, :] * s
    y = a[:, 0]
    dy = u[:, :, 0]
    d2y = v[:, :, 0] if order == 2 else None
    return y, dy, d2y, tape


def input_derivatives(mlp: Mlp, x, order: int = 1):
    """Derivatives of the scalar output with respect to the inputs.

    For ``order == 1`` returns the gradient d(output)/dx_k; for
    ``order == 2`` returns ``(gradient, diagonal)`` where the diagonal
    holds d2(output)/dx_k2. Batched inputs give (batch, input_dim) arrays.
    """
    _, dy, d2y, tape = forward_with_input_derivatives(mlp, x, order)
    if tape["single"]:
        dy = dy[0]
        d2y = d2y[0] if d2y is not None else None
    return dy if order == 1 else (dy, d2y)


def backward_input_derivatives(mlp: Mlp, tape: dict, y_bar=None, dy_bar=None, d2y_bar=None):
    """Parameter gradients of a loss touching y, dy/dx_k, and d2y/dx_k2.

    The adjoints mirror the outputs of
    :func:`forward_with_input_derivatives`: ``y_bar`` (batch,), ``dy_bar``
    and ``d2y_bar`` (batch, input_dim). Missing adjoints count as zero.
    Returns one (dW, db) pair per layer, summed over the batch.
    """
    layers = tape["layers"]
    order = tape["order"]
    last = layers[-1]
    nb = last["a_in"].shape[0]
    nd = last["u_in"].shape[1]

    a_bar = np.zeros((nb, 1))
    if y_bar is not None:
        arr = np.asarray(y_bar, dtype=float)
        a_bar[:, 0] = arr if not tape["single"] else arr.reshape(-1)
    u_bar = np.zeros((nb, nd, 1))
    if dy_bar is not None:
        u_bar[:, :, 0] = np.asarray(dy_bar, dtype=float).reshape(nb, nd)
    v_bar = None
    if order == 2:
        v_bar = np.zeros((nb, nd, 1))
        if d2y_bar is not None:
            v_bar[:, :, 0] = np.asarray(d2y_bar, dtype=float).reshape(nb, nd)
    elif d2y_bar is not None:
        raise ValueError("d2y_bar supplied but the tape was built with order 1")

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(mlp.weights)  # type: ignore
    for layer in reversed(range(len(mlp.weights))):
        rec = layers[layer]
        f1, f2, f3 = rec["f1"], rec["f2"], rec["f3"]
        t, s = rec["t"], rec["s"]
        # outputs of this layer were: a = f(z), u_k = f1*t_k, v_k = f2*t_k^2 + f1*s_k
        z_bar = a_bar * f1 + np.sum(u_bar * t, axis=1) * f2
        t_bar = u_bar * f1[:, None, :]
        if v_bar is not None:
            z_bar += np.sum(v_bar * (t * t), axis=1) * f3
            z_bar += np.sum(v_bar * s, axis=1) * f2
            t_bar += 2.0 * v_bar * f2[:, None, :] * t
            s_bar = v_bar * f1[:, None, :]
        dw = np.einsum("bo,bi->oi", z_bar, rec["a_in"])
        dw += np.einsum("bko,bki->oi", t_bar, rec["u_in"])
        db = z_bar.sum(axis=0)
        if v_bar is not None:
            dw += np.einsum("bko,bki->oi", s_bar, rec["v_in"])
            v_bar = s_bar @ mlp.weights[layer]
        a_bar = z_bar @ mlp.weights[layer]
        u_bar = t_bar @ mlp.weights[layer]
        grads[layer] = (dw, db)
    return grads


# --- optimizers -------------------------------------------------------------


def sgd_step(mlp: Mlp, grads, lr: float) -> Mlp:
    """Plain gradient-descent update: theta <- theta - lr * grad (in place)."""
    for (w, b), (dw, db) in zip(zip(mlp.weights, mlp.biases), grads):
        w -= lr * dw
        b -= lr * db
    return mlp


@dataclass
class AdamState:
    """First/second moment accumulators and step counter for Adam."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def init_adam(mlp: Mlp, lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
    state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    for w, b in zip(mlp.weights, mlp.biases):
        state.m.append((np.zeros_like(w), np.zeros_like(b)))
        state.v.append((np.zeros_like(w), np.zeros_like(b)))
    return state


def adam_step(mlp: Mlp, grads, state: AdamState) -> Mlp:
    """One Adam update with bias correction (in place)."""
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for layer, (dw, db) in enumerate(grads):
        for slot, (param, grad) in enumerate(
            ((mlp.weights[layer], dw), (mlp.biases[layer], db))
        ):
            m = state.m[layer][slot]
            v = state.v[layer][slot]
            m *= state.beta1
            m += (1.0 - state.beta1) * grad
            v *= state.beta2
            v += (1.0 - state.beta2) * grad * grad
            param -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return mlp


@dataclass
class PlateauScheduler:
    """Reduce-on-plateau learning-rate rule.

    An epoch improves when its loss drops below best * (1 - rel_threshold).
    After ``patience`` consecutive non-improving epochs the rate is
    multiplied by ``factor``, floored at ``min_lr``; the rate never
    increases.
    """

    lr: float
    factor: float = 0.5
    patience: int = 50
    min_lr: float = 1e-6
    rel_threshold: float = 1e-4
    best: float = math.inf
    wait: int = 0


def plateau_step(sched: PlateauScheduler, loss: float) -> float:
    """Feed one epoch loss to the scheduler; returns the updated rate."""
    if not math.isfinite(loss):
        raise TrainingDivergedError(f"non-finite loss {loss}")
    if loss < sched.best * (1.0 - sched.rel_threshold):
        sched.best = loss
        sched.wait = 0
    else:
        sched.wait += 1
        if sched.wait >= sched.patience:
            sched.lr = max(sched.lr * sched.factor, sched.min_lr)
            sched.wait = 0
    return sched.lr


# --- serialization ----------------------------------------------------------

DOCUMENT_FORMAT = "igaheat-mlp"


def mlp_to_document(mlp: Mlp, meta: dict | None = None) -> str:
    """Serialize to a self-describing JSON text document.

    Floats are written in shortest round-trip decimal form, so loading
    reproduces every weight bit for bit.
    """
    doc = {
        "format": DOCUMENT_FORMAT,
        "layer_sizes": mlp.layer_sizes,
        "activations": list(mlp.activations),
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist()}
            for w, b in zip(mlp.weights, mlp.biases)
        ],
    }
    if meta:
        doc["meta"] = dict(meta)
    return json.dumps(doc, indent=2)


def mlp_from_document(text: str) -> tuple[Mlp, dict]:
    """Parse a document produced by :func:`mlp_to_document`.

    Returns the network and its metadata dict (empty when absent).
    """
    doc = json.loads(text)
    if doc.get("format") != DOCUMENT_FORMAT:
        raise ValueError(f"not a {DOCUMENT_FORMAT} document")
    sizes = doc["layer_sizes"]
    weights, biases = [], []
    for layer, rec in enumerate(doc["layers"]):
        w = np.asarray(rec["weights"], dtype=float)
        b = np.asarray(rec["bias"], dtype=float)
        if w.shape != (sizes[layer + 1], sizes[layer]) or b.shape != (sizes[layer + 1],):
            raise ValueError(f"layer {layer} arrays do not match layer_sizes {sizes}")
        weights.append(w)
        biases.append(b)
    mlp = Mlp(weights=weights, biases=biases, activations=list(doc["activations"]))
    if len(mlp.activations) != len(weights):
        raise ValueError("activation count does not match layer count")
    for tag in mlp.activations:
        if tag not in ACTIVATIONS:
            raise ValueError(f"unknown activation {tag!r}")
    return mlp, doc.get("meta", {})


def save_mlp(mlp: Mlp, path, meta: dict | None = None) -> None:
    with open(path, "w") as handle:
        handle.write(mlp_to_document(mlp, meta))
        handle.write("\n")


def load_mlp(path) -> tuple[Mlp, dict]:
    with open(path) as handle:
        return mlp_from_document(handle.read())

"""Training pipelines for the three approximation schemes.

Three ways to approximate the parameterized L-shape solution with a
network are implemented side by side:

* a coefficient network mapping the heating parameter n to the full
  spline coefficient vector,
* a direct network mapping (n, x, y) to the field value, and
* a physics-trained network for one fixed n, fitted to the interior
  residual and the boundary conditions at collocation points with no
  solver-generated labels.

The first two are judged against the solver fields they were trained
on. The physics route never sees solver output, so its field is judged
against a refined solve standing in for the continuum solution; at the
training mesh the solver's own discretization error already exceeds
the accuracy bar, which would make the comparison meaningless.
"""

from __future__ import annotations

import csv
import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from .bspline import SplineField2D, make_field, sample_field_grid
from .iga import (
    HeatProblem,
    dirichlet_flat_indices,
    heating_g,
    lshape_mask,
    pointwise_mse,
    solve_heat_problem,
)
from .neuralnet import (
    Mlp,
    TrainingDivergedError,
    PlateauScheduler,
    adam_step,
    backward,
    backward_input_derivatives,
    forward,
    forward_with_input_derivatives,
    init_adam,
    init_mlp,
    plateau_step,
)

N_RANGE = (0.05, 0.5)
DEFAULT_N_COUNT = 24
DEFAULT_SPLIT_SEED = 0


def default_n_grid(count: int = DEFAULT_N_COUNT,
                   n_range: tuple[float, float] = N_RANGE) -> np.ndarray:
    """Evenly spaced heating parameters on (lo, hi], hi included."""
    lo, hi = n_range
    if not (count >= 1 and hi > lo > 0):
        raise ValueError(f"invalid n grid request: count={count}, range={n_range}")
    return lo + (hi - lo) * np.arange(1, count + 1) / count


def split_indices(count: int, test_fraction: float = 0.2,
                  seed: int = DEFAULT_SPLIT_SEED) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle split into (train, test) index arrays, both sorted."""
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in [0, 1), got {test_fraction}")
    order = np.random.default_rng(seed).permutation(count)
    n_test = int(round(count * test_fraction))
    return np.sort(order[n_test:]), np.sort(order[:n_test])


@dataclass(frozen=True)
class CoeffDataset:
    """Solved coefficient vectors per heating parameter, one shared mesh."""

    n_values: np.ndarray
    coefficients: np.ndarray  # shape (len(n_values), num_coefficients)
    mesh: int
    degree: int

    def __post_init__(self):
        if self.coefficients.shape[0] != len(self.n_values):
            raise ValueError("one coefficient row per n value required")
        self.n_values.setflags(write=False)
        self.coefficients.setflags(write=False)

    def problem(self, n: float) -> HeatProblem:
        return HeatProblem(n=n, mesh=self.mesh, degree=self.degree)


@dataclass(frozen=True)
class DirectDataset:
    """Flat (n, x, y) -> u samples of solved fields, one shared mesh."""

    n: np.ndarray
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    mesh: int
    degree: int

    def __post_init__(self):
        sizes = {arr.shape for arr in (self.n, self.x, self.y, self.u)}
        if len(sizes) != 1:
            raise ValueError("n, x, y, u must have identical shapes")
        for arr in (self.n, self.x, self.y, self.u):
            arr.setflags(write=False)

    @property
    def inputs(self) -> np.ndarray:
        return np.column_stack([self.n, self.x, self.y])


def generate_coeff_dataset(template: HeatProblem, n_values) -> CoeffDataset:
    """Solve the problem once per n and stack the coefficient vectors."""
    n_values = np.asarray(n_values, dtype=float)
    rows = []
    for n in n_values:
        try:
            field2d = solve_heat_problem(dataclasses.replace(template, n=float(n)))
        except Exception as exc:
            raise RuntimeError(f"solver failed for n={n}") from exc
        rows.append(field2d.coefficients.ravel())
    return CoeffDataset(
        n_values=n_values.copy(),
        coefficients=np.array(rows),
        mesh=template.mesh,
        degree=template.degree,
    )


def generate_direct_dataset(template: HeatProblem, n_values,
                            grid: int = 50) -> DirectDataset:
    """Sample solved fields on a grid, keeping only points on the L shape."""
    n_values = np.asarray(n_values, dtype=float)
    cols: list[np.ndarray] = [[], [], [], []]  # type: ignore[list-item]
    for n in n_values:
        try:
            field2d = solve_heat_problem(dataclasses.replace(template, n=float(n)))
        except Exception as exc:
            raise RuntimeError(f"solver failed for n={n}") from exc
        xs, ys, values = sample_field_grid(field2d, grid, grid)
        keep = lshape_mask(xs, ys)
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        cols[0].append(np.full(keep.sum(), float(n)))
        cols[1].append(xx[keep])
        cols[2].append(yy[keep])
        cols[3].append(values[keep])
    n_col, x_col, y_col, u_col = (np.concatenate(c) for c in cols)
    return DirectDataset(n=n_col, x=x_col, y=y_col, u=u_col,
                         mesh=template.mesh, degree=template.degree)


# --- dataset CSV round trip --------------------------------------------------


def coeff_dataset_to_csv(dataset: CoeffDataset, path) -> None:
    width = dataset.coefficients.shape[1]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n"] + [f"u_{k}" for k in range(width)])
        for n, row in zip(dataset.n_values, dataset.coefficients):
            writer.writerow([repr(float(n))] + [repr(float(v)) for v in row])


def coeff_dataset_from_csv(path, mesh: int, degree: int) -> CoeffDataset:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header[0] != "n" or header[1] != "u_0":
            raise ValueError(f"unexpected coefficient dataset header: {header[:2]}")
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows)
    return CoeffDataset(n_values=data[:, 0], coefficients=data[:, 1:],
                        mesh=mesh, degree=degree)


def direct_dataset_to_csv(dataset: DirectDataset, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "x", "y", "u"])
        for row in zip(dataset.n, dataset.x, dataset.y, dataset.u):
            writer.writerow([repr(float(v)) for v in row])


def direct_dataset_from_csv(path, mesh: int, degree: int) -> DirectDataset:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != ["n", "x", "y", "u"]:
            raise ValueError(f"unexpected field dataset header: {header}")
        data = np.array([[float(v) for v in row] for row in reader])
    return DirectDataset(n=data[:, 0], x=data[:, 1], y=data[:, 2], u=data[:, 3],
                         mesh=mesh, degree=degree)


# --- training loops -----------------------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by the supervised training loops."""

    hidden: tuple[int, ...] = (100, 100)
    activation: str = "relu"
    epochs: int = 2000
    lr: float = 1e-3
    batch_size: int | None = None  # None = full batch
    seed: int = 0
    test_fraction: float = 0.2
    split_seed: int = DEFAULT_SPLIT_SEED
    plateau_factor: float = 0.5
    plateau_patience: int = 50
    min_lr: float = 1e-6


@dataclass
class TrainReport:
    """What a training run did: loss path, final metrics, bookkeeping."""

    epoch_losses: list[float]
    final_train_mse: float
    final_test_mse: float | None
    seconds: float
    epochs: int
    final_lr: float
    seed: int


def _epoch_batches(rng: np.random.Generator, count: int,
                   batch_size: int | None) -> list[np.ndarray]:
    if batch_size is None or batch_size >= count:
        return [np.arange(count)]
    order = rng.permutation(count)
    return [order[k : k + batch_size] for k in range(0, count, batch_size)]


def _mse_and_grad(mlp: Mlp, inputs: np.ndarray, targets: np.ndarray):
    pred, cache = forward(mlp, inputs)
    diff = pred - targets
    loss = float(np.mean(diff ** 2))
    grads = backward(mlp, cache, 2.0 * diff / diff.size)
    return loss, grads


def _predict_mse(mlp: Mlp, inputs: np.ndarray, targets: np.ndarray) -> float:
    pred, _ = forward(mlp, inputs)
    return float(np.mean((pred - targets) ** 2))


def _fold_normalization(mlp: Mlp, mid: np.ndarray, half: np.ndarray,
                        mu: np.ndarray, sd: np.ndarray) -> Mlp:
    """Absorb affine input/output normalization into the edge layers.

    The trained network saw (x - mid) / half and standardized targets;
    rewriting the first layer as W/half, b - W (mid/half) and the last
    as sd W, sd b + mu makes the network exact on raw coordinates, so a
    plain forward pass needs no side-car scaling data.
    """
    if mlp.activations[-1] != "identity":
        raise ValueError("output normalization requires an identity output layer")
    mlp.weights[0] = mlp.weights[0] / half
    mlp.biases[0] = mlp.biases[0] - mlp.weights[0] @ mid
    mlp.weights[-1] = sd[:, None] * mlp.weights[-1]
    mlp.biases[-1] = sd * mlp.biases[-1] + mu
    return mlp


def _fit_supervised(inputs: np.ndarray, targets: np.ndarray,
                    config: FitConfig, groups=None) -> tuple[Mlp, TrainReport]:
    started = time.perf_counter()
    count = inputs.shape[0]
    if groups is None:
        train_idx, test_idx = split_indices(count, config.test_fraction,
                                            config.split_seed)
    else:
        # split whole groups (e.g. all samples of one n) to keep the test
        # side genuinely unseen
        _, codes = np.unique(np.asarray(groups), return_inverse=True)
        g_train, g_test = split_indices(codes.max() + 1, config.test_fraction,
                                        config.split_seed)
        train_idx = np.flatnonzero(np.isin(codes, g_train))
        test_idx = np.flatnonzero(np.isin(codes, g_test))
    # normalize inputs to [-1, 1] and standardize targets on the train rows;
    # constant columns keep unit scale
    lo, hi = inputs[train_idx].min(axis=0), inputs[train_idx].max(axis=0)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    half = np.where(half > 0.0, half, 1.0)
    mu, sd = targets[train_idx].mean(axis=0), targets[train_idx].std(axis=0)
    sd = np.where(sd > 0.0, sd, 1.0)
    x_norm = (inputs - mid) / half
    y_norm = (targets - mu) / sd

    layer_sizes = (inputs.shape[1], *config.hidden, targets.shape[1])
    activations = [config.activation] * len(config.hidden) + ["identity"]
    mlp = init_mlp(layer_sizes, activations, seed=config.seed)
    state = init_adam(mlp, lr=config.lr)
    sched = PlateauScheduler(lr=config.lr, factor=config.plateau_factor,
                             patience=config.plateau_patience,
                             min_lr=config.min_lr)
    rng = np.random.default_rng(config.seed)
    losses: list[float] = []
    for _ in range(config.epochs):
        batch_losses = []
        for idx in _epoch_batches(rng, len(train_idx), config.batch_size):
            rows = train_idx[idx]
            loss, grads = _mse_and_grad(mlp, x_norm[rows], y_norm[rows])
            adam_step(mlp, grads, state)
            batch_losses.append(loss)
        epoch_loss = float(np.mean(batch_losses))
        losses.append(epoch_loss)
        state.lr = plateau_step(sched, epoch_loss)
    _fold_normalization(mlp, mid, half, mu, sd)
    report = TrainReport(
        epoch_losses=losses,
        final_train_mse=_predict_mse(mlp, inputs[train_idx], targets[train_idx]),
        final_test_mse=(_predict_mse(mlp, inputs[test_idx], targets[test_idx])
                        if len(test_idx) else None),
        seconds=time.perf_counter() - started,
        epochs=config.epochs,
        final_lr=sched.lr,
        seed=config.seed,
    )
    return mlp, report


def train_coefficient_net(dataset: CoeffDataset,
                          config: FitConfig) -> tuple[Mlp, TrainReport]:
    """Fit n -> coefficient vector by mean squared error."""
    if len(dataset.n_values) == 0:
        raise ValueError("empty dataset")
    return _fit_supervised(dataset.n_values[:, None], dataset.coefficients, config)


def train_direct_net(dataset: DirectDataset,
                     config: FitConfig) -> tuple[Mlp, TrainReport]:
    """Fit (n, x, y) -> u by mean squared error; the split holds out whole
    n values, never single points of a seen field."""
    if len(dataset.n) == 0:
        raise ValueError("empty dataset")
    return _fit_supervised(dataset.inputs, dataset.u[:, None], config,
                           groups=dataset.n)


def predict_coefficients(mlp: Mlp, n: float, template: HeatProblem) -> np.ndarray:
    """Network coefficient vector for one n, constrained entries zeroed.

    The solver targets are exactly zero on the removed-quarter block, so
    the prediction is clamped there rather than asking the network to
    reproduce an all-zero output block.
    """
    if mlp.output_dim != template.num_coefficients:
        raise ValueError(
            f"network outputs {mlp.output_dim} values, problem has "
            f"{template.num_coefficients} coefficients"
        )
    pred, _ = forward(mlp, np.array([float(n)]))
    coeffs = np.asarray(pred, dtype=float).ravel().copy()
    coeffs[dirichlet_flat_indices(template)] = 0.0
    return coeffs


def predict_field_from_coeffs(mlp: Mlp, n: float,
                              template: HeatProblem) -> SplineField2D:
    """Reshape the network's coefficient prediction into a spline field."""
    coeffs = predict_coefficients(mlp, n, template)
    kv = template.knot_vector()
    return make_field(kv, kv, coeffs.reshape(kv.num_basis, kv.num_basis))


# --- physics-trained network --------------------------------------------------


@dataclass(frozen=True)
class PinnProblem:
    """Fixed-n collocation sets and loss weights for physics training."""

    n: float
    interior: np.ndarray        # (P, 2) points inside the L shape
    dirichlet: np.ndarray       # (D, 2) points on the two internal edges
    neumann: np.ndarray         # (E, 2) points on the external edges
    neumann_normals: np.ndarray  # (E, 2) outward unit normals
    w_pde: float = 1.0
    w_dirichlet: float = 1.0
    w_neumann: float = 1.0

    def __post_init__(self):
        if self.neumann.shape != self.neumann_normals.shape:
            raise ValueError("one normal per external collocation point required")
        for arr in (self.interior, self.dirichlet, self.neumann,
                    self.neumann_normals):
            arr.setflags(write=False)


def build_pinn_problem(n: float, interior_count: int = 1000,
                       per_edge: int = 200, seed: int = 0,
                       weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
                       ) -> PinnProblem:
    """Seeded uniform collocation on the L shape.

    Interior points are rejection-sampled from the square; external edges
    are the four heated sides with the removed-quarter segments trimmed
    off; internal edges are the two re-entrant sides, where the solution
    is pinned to zero.
    """
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 2))
    while len(pts) < interior_count:
        cand = rng.uniform(0.0, 2.0, size=(4 * interior_count, 2))
        keep = (cand[:, 0] >= 1.0) | (cand[:, 1] >= 1.0)
        pts = np.concatenate([pts, cand[keep]])
    interior = pts[:interior_count]

    def edge(count, x_range, y_range, normal):
        xs = (np.full(count, x_range) if np.isscalar(x_range)
              else rng.uniform(*x_range, size=count))
        ys = (np.full(count, y_range) if np.isscalar(y_range)
              else rng.uniform(*y_range, size=count))
        points = np.column_stack([xs, ys])
        normals = np.tile(np.asarray(normal, dtype=float), (count, 1))
        return points, normals

    external = [
        edge(per_edge, (1.0, 2.0), 0.0, (0.0, -1.0)),   # bottom, trimmed
        edge(per_edge, 2.0, (0.0, 2.0), (1.0, 0.0)),    # right
        edge(per_edge, (0.0, 2.0), 2.0, (0.0, 1.0)),    # top
        edge(per_edge, 0.0, (1.0, 2.0), (-1.0, 0.0)),   # left, trimmed
    ]
    neumann = np.concatenate([p for p, _ in external])
    normals = np.concatenate([m for _, m in external])
    internal = [
        edge(per_edge, 1.0, (0.0, 1.0), (-1.0, 0.0)),   # x = 1 side
        edge(per_edge, (0.0, 1.0), 1.0, (0.0, -1.0)),   # y = 1 side
    ]
    dirichlet = np.concatenate([p for p, _ in internal])
    return PinnProblem(n=float(n), interior=interior, dirichlet=dirichlet,
                       neumann=neumann, neumann_normals=normals,
                       w_pde=weights[0], w_dirichlet=weights[1],
                       w_neumann=weights[2])


def _neumann_targets(problem: PinnProblem) -> np.ndarray:
    pts, normals = problem.neumann, problem.neumann_normals
    targets = np.empty(len(pts))
    for k, ((x, y), nrm) in enumerate(zip(pts, normals)):
        targets[k] = heating_g(problem.n, x - 1.0, y - 1.0, nrm)
    return targets


def pinn_loss(mlp: Mlp, problem: PinnProblem):
    """(total, pde term, fixed-boundary term, heated-boundary term).

    total is exactly the weighted sum of the three reported terms.
    """
    _, _, d2y, _ = forward_with_input_derivatives(mlp, problem.interior, order=2)
    pde = float(np.mean(d2y.sum(axis=1) ** 2))
    u_dir, _ = forward(mlp, problem.dirichlet)
    dirichlet = float(np.mean(u_dir ** 2))
    _, dy, _, _ = forward_with_input_derivatives(mlp, problem.neumann, order=1)
    flux = np.sum(dy * problem.neumann_normals, axis=1) - _neumann_targets(problem)
    neumann = float(np.mean(flux ** 2))
    total = (problem.w_pde * pde + problem.w_dirichlet * dirichlet
             + problem.w_neumann * neumann)
    return total, pde, dirichlet, neumann


def _pinn_loss_and_grads(mlp: Mlp, problem: PinnProblem, neumann_targets):
    _, _, d2y, tape2 = forward_with_input_derivatives(mlp, problem.interior,
                                                      order=2)
    residual = d2y.sum(axis=1)
    pde = float(np.mean(residual ** 2))
    scale = problem.w_pde * 2.0 / len(residual)
    d2y_bar = np.repeat((scale * residual)[:, None], 2, axis=1)
    grads = backward_input_derivatives(mlp, tape2, d2y_bar=d2y_bar)

    u_dir, cache = forward(mlp, problem.dirichlet)
    dirichlet = float(np.mean(u_dir ** 2))
    gd = backward(mlp, cache,
                  problem.w_dirichlet * 2.0 * u_dir / u_dir.size)

    _, dy, _, tape1 = forward_with_input_derivatives(mlp, problem.neumann,
                                                     order=1)
    flux = np.sum(dy * problem.neumann_normals, axis=1) - neumann_targets
    neumann = float(np.mean(flux ** 2))
    dy_bar = ((problem.w_neumann * 2.0 / len(flux)) * flux)[:, None] \
        * problem.neumann_normals
    gn = backward_input_derivatives(mlp, tape1, dy_bar=dy_bar)

    total = (problem.w_pde * pde + problem.w_dirichlet * dirichlet
             + problem.w_neumann * neumann)
    summed = [(a[0] + b[0] + c[0], a[1] + b[1] + c[1])
              for a, b, c in zip(grads, gd, gn)]
    return total, summed


@dataclass(frozen=True)
class PinnConfig:
    """Knobs for the physics training loop."""

    hidden: tuple[int, ...] = (50, 50)
    activation: str = "tanh"
    epochs: int = 6250
    lr: float = 3e-3
    seed: int = 0
    plateau_factor: float = 0.5
    plateau_patience: int = 125
    min_lr: float = 1e-5
    chunks: int = 4           # optimizer steps per epoch; 1 = full batch
    resample_every: int = 0   # redraw collocation every k epochs; 0 = never
    resample_seed: int = 1_000_000


def train_pinn(problem: PinnProblem, config: PinnConfig) -> tuple[Mlp, TrainReport]:
    """Physics-residual training; no solver data enters the loop.

    Each epoch visits every collocation point once, split over
    ``config.chunks`` optimizer steps by a seeded shuffle: the flop count
    per epoch is unchanged but the Adam step count multiplies. With
    ``resample_every`` set, the collocation set is redrawn every that
    many epochs from ``resample_seed + epoch``.
    """
    started = time.perf_counter()
    smallest = min(len(problem.interior), len(problem.dirichlet),
                   len(problem.neumann))
    if not 1 <= config.chunks <= max(1, smallest):
        raise ValueError(f"chunks must be in [1, {smallest}], "
                         f"got {config.chunks}")
    layer_sizes = (2, *config.hidden, 1)
    activations = [config.activation] * len(config.hidden) + ["identity"]
    mlp = init_mlp(layer_sizes, activations, seed=config.seed)
    state = init_adam(mlp, lr=config.lr)
    sched = PlateauScheduler(lr=config.lr, factor=config.plateau_factor,
                             patience=config.plateau_patience,
                             min_lr=config.min_lr)
    # tanh layers start saturated on one side when every input is positive,
    # so the loop sees coordinates shifted to be symmetric about the square's
    # center; the shift has unit Jacobian (no residual term changes) and is
    # folded back into the first layer afterwards
    shift = np.array([1.0, 1.0])

    def centered_view(raw: PinnProblem):
        view = dataclasses.replace(
            raw,
            interior=raw.interior - shift,
            dirichlet=raw.dirichlet - shift,
            neumann=raw.neumann - shift,
        )
        return view, _neumann_targets(raw)

    centered, targets = centered_view(problem)
    rng = np.random.default_rng(config.seed)
    losses: list[float] = []
    for ep in range(config.epochs):
        if config.resample_every and ep and ep % config.resample_every == 0:
            redrawn = build_pinn_problem(
                problem.n, len(problem.interior), len(problem.neumann) // 4,
                seed=config.resample_seed + ep,
                weights=(problem.w_pde, problem.w_dirichlet, problem.w_neumann))
            centered, targets = centered_view(redrawn)
        if config.chunks == 1:
            loss, grads = _pinn_loss_and_grads(mlp, centered, targets)
            adam_step(mlp, grads, state)
            epoch_loss = loss
        else:
            order_i = rng.permutation(len(centered.interior))
            order_n = rng.permutation(len(centered.neumann))
            order_d = rng.permutation(len(centered.dirichlet))
            chunk_losses = []
            for k in range(config.chunks):
                si = order_i[k::config.chunks]
                sn = order_n[k::config.chunks]
                sd = order_d[k::config.chunks]
                sub = dataclasses.replace(
                    centered,
                    interior=centered.interior[si],
                    dirichlet=centered.dirichlet[sd],
                    neumann=centered.neumann[sn],
                    neumann_normals=centered.neumann_normals[sn],
                )
                loss, grads = _pinn_loss_and_grads(mlp, sub, targets[sn])
                adam_step(mlp, grads, state)
                chunk_losses.append(loss)
            epoch_loss = float(np.mean(chunk_losses))
        losses.append(epoch_loss)
        state.lr = plateau_step(sched, epoch_loss)
    _fold_normalization(mlp, shift, np.ones(2), np.zeros(1), np.ones(1))
    final = losses[-1] if losses else pinn_loss(mlp, problem)[0]
    report = TrainReport(
        epoch_losses=losses,
        final_train_mse=final,
        final_test_mse=None,
        seconds=time.perf_counter() - started,
        epochs=config.epochs,
        final_lr=sched.lr,
        seed=config.seed,
    )
    return mlp, report


def pinn_field_values(mlp: Mlp, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Network values on a tensor grid, shape (len(xs), len(ys))."""
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    values, _ = forward(mlp, pts)
    return values.reshape(len(xs), len(ys))


def direct_field_values(mlp: Mlp, n: float, xs: np.ndarray,
                        ys: np.ndarray) -> np.ndarray:
    """Direct-network values at fixed n on a tensor grid."""
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack(
        [np.full(xx.size, float(n)), xx.ravel(), yy.ravel()])
    values, _ = forward(mlp, pts)
    return values.reshape(len(xs), len(ys))


# --- evaluation ----------------------------------------------------------------


PINN_REFERENCE = HeatProblem(n=1.0, mesh=40, degree=3)


def evaluate_methods(template: HeatProblem, n_test,
                     coeff_predict=None, direct_predict=None,
                     pinn_predict=None, pinn_n: float | None = None,
                     train_seconds: dict[str, float] | None = None,
                     pinn_reference: HeatProblem = PINN_REFERENCE,
                     grid: int = 100) -> list[dict]:
    """Per-n and aggregate error rows for the trained methods.

    Predictors are callables: ``coeff_predict(n)`` returns a flat
    coefficient vector, ``direct_predict(n, xs, ys)`` a value grid of
    shape (len(xs), len(ys)), ``pinn_predict(xs, ys)`` the same for the
    fixed-n physics network. Fields are compared on the L shape only.
    Rows are dicts with keys method, n, coeff_mse, pointwise_mse,
    train_seconds; inapplicable entries hold None.
    """
    seconds = train_seconds or {}
    rows: list[dict] = []

    solves = {}

    def solved(n: float) -> SplineField2D:
        if n not in solves:
            solves[n] = solve_heat_problem(dataclasses.replace(template, n=n))
        return solves[n]

    def grid_mse(values: np.ndarray, reference: SplineField2D) -> float:
        xs, ys, ref = sample_field_grid(reference, grid, grid)
        mask = lshape_mask(xs, ys)
        return float(np.mean((values(xs, ys) - ref)[mask] ** 2))

    for method, predictor in (("coeff", coeff_predict), ("direct", direct_predict)):
        if predictor is None:
            continue
        coeff_col, point_col = [], []
        for n in n_test:
            n = float(n)
            reference = solved(n)
            if method == "coeff":
                coeffs = np.asarray(predictor(n), dtype=float)
                cmse = float(np.mean((coeffs - reference.coefficients.ravel()) ** 2))
                kv = template.knot_vector()
                pred_field = make_field(
                    kv, kv, coeffs.reshape(kv.num_basis, kv.num_basis))
                pmse = pointwise_mse(pred_field, reference, nx=grid, ny=grid)
            else:
                cmse = None
                pmse = grid_mse(lambda xs, ys: predictor(n, xs, ys), reference)
            coeff_col.append(cmse)
            point_col.append(pmse)
            rows.append({"method": method, "n": n, "coeff_mse": cmse,
                         "pointwise_mse": pmse, "train_seconds": None})
        rows.append({
            "method": method, "n": "all",
            "coeff_mse": (float(np.mean(coeff_col)) if method == "coeff" else None),
            "pointwise_mse": float(np.mean(point_col)),
            "train_seconds": seconds.get(method),
        })

    if pinn_predict is not None:
        if pinn_n is None:
            raise ValueError("pinn_n required with pinn_predict")
        reference = solve_heat_problem(
            dataclasses.replace(pinn_reference, n=float(pinn_n)))
        pmse = grid_mse(pinn_predict, reference)
        rows.append({"method": "pinn", "n": float(pinn_n), "coeff_mse": None,
                     "pointwise_mse": pmse, "train_seconds": None})
        rows.append({"method": "pinn", "n": "all", "coeff_mse": None,
                     "pointwise_mse": pmse,
                     "train_seconds": seconds.get("pinn")})
    return rows

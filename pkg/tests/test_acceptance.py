"""End-to-end acceptance checks, one test per shipped guarantee.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line
per criterion. Expensive artifacts are shared through session fixtures:
the nine-system solve sweep feeds the dof-count and residual checks, and
each trained network feeds its own accuracy check plus the three-method
comparison. Every tolerance is pinned below next to the criterion that
uses it.
"""

import dataclasses
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from igaheat.bspline import (
    eval_basis,
    eval_basis_derivatives,
    make_knot_vector,
    sample_field_grid,
)
from igaheat.closedform import (
    pinn_unit_gradients,
    scalar_fit_gradients,
    two_input_fit_gradients,
)
from igaheat.config import ExperimentConfig
from igaheat.iga import (
    HeatProblem,
    assemble_l2_projection,
    build_heat_system,
    lshape_knot_vector,
    mass_matrix_1d,
    sine_projection_rhs,
    solve_heat_problem,
    solve_system,
    unit_quadratic_basis,
)
from igaheat.neuralnet import mlp_to_document
from igaheat.reference1d import (
    engine_physics_unit_gradients,
    engine_scalar_fit_gradients,
    engine_two_input_fit_gradients,
    physics_unit_deviation,
    train_physics_unit,
)
from igaheat.report import (
    heatmap_svg,
    loss_curve_svg,
    read_comparison_csv,
    write_comparison_csv,
    write_loss_csv,
)
from igaheat.training import (
    build_pinn_problem,
    coeff_dataset_to_csv,
    default_n_grid,
    direct_field_values,
    evaluate_methods,
    generate_coeff_dataset,
    generate_direct_dataset,
    pinn_field_values,
    predict_coefficients,
    split_indices,
    train_coefficient_net,
    train_direct_net,
    train_pinn,
)

MATRIX_TOL = 1e-12        # quadratic mass matrix entries
RHS_TOL = 1e-10           # sine load entries vs quadrature
ENGINE_TOL = 1e-12        # engine vs closed-form partials
PARTITION_TOL = 1e-12     # basis partition of unity
FD_TOL = 1e-6             # basis derivative vs central difference
PROJECTION_TOL = 1e-10    # spline-member recovery
RESIDUAL_TOL = 1e-10      # relative linear-system residual
ACCURACY_BAR = 1e-4       # network mean squared errors
MEMORIZATION_BAR = 1e-8   # single-sample training loss
UNIT_DEVIATION_BAR = 0.05  # 1D physics unit vs exact sine

DOF_TABLE = {
    (10, 1): 121, (10, 2): 169, (10, 3): 225,
    (20, 1): 441, (20, 2): 529, (20, 3): 625,
    (40, 1): 1681, (40, 2): 1849, (40, 3): 2025,
}

FRACTION_MASS_MATRIX = np.array([
    [1 / 5, 1 / 10, 1 / 30],
    [1 / 10, 2 / 15, 1 / 10],
    [1 / 30, 1 / 10, 1 / 5],
])

NAMED_KNOT_VECTORS = [
    ([0, 0, 0, 1, 2, 2, 2], 2),
    ([0, 0, 0, 0.5, 1, 1, 1.5, 2, 2, 2], 2),
    ([0, 0, 0, 1, 2, 2, 3, 4, 4, 4], 2),
    ([0, 0, 0, 1, 1, 1], 2),
]


def dense_values(kv, x: float) -> np.ndarray:
    basis = eval_basis(kv, x)
    out = np.zeros(kv.num_basis)
    out[basis.first_index:basis.first_index + len(basis.values)] = basis.values
    return out


def dense_first_derivative(kv, x: float) -> np.ndarray:
    basis = eval_basis_derivatives(kv, x, 1)
    out = np.zeros(kv.num_basis)
    lo = basis.first_index
    out[lo:lo + basis.derivatives.shape[1]] = basis.derivatives[1]
    return out


# --- shared artifacts ---------------------------------------------------------


@pytest.fixture(scope="session")
def experiment() -> ExperimentConfig:
    """The shipped default experiment; every training check reads it."""
    return ExperimentConfig()


@pytest.fixture(scope="session")
def family(experiment):
    fam = experiment.family
    n_values = default_n_grid(fam.count, (fam.n_low, fam.n_high))
    train_idx, test_idx = split_indices(fam.count, fam.test_fraction,
                                        fam.split_seed)
    return n_values, train_idx, test_idx


@pytest.fixture(scope="session")
def solve_sweep():
    started = time.perf_counter()
    runs = {}
    for mesh in (10, 20, 40):
        for degree in (1, 2, 3):
            problem = HeatProblem(n=1.0, mesh=mesh, degree=degree)
            system = build_heat_system(problem)
            runs[(mesh, degree)] = (problem, system, solve_system(system))
    return {"runs": runs, "seconds": time.perf_counter() - started}


@pytest.fixture(scope="session")
def coeff_run(experiment, family):
    n_values, _, test_idx = family
    template = experiment.problem.template()
    started = time.perf_counter()
    dataset = generate_coeff_dataset(template, n_values)
    mlp, report = train_coefficient_net(dataset, experiment.coeff_fit())
    rows = evaluate_methods(
        template, n_values[test_idx],
        coeff_predict=lambda n: predict_coefficients(mlp, n, template))
    seconds = time.perf_counter() - started
    return {"template": template, "mlp": mlp, "report": report,
            "rows": rows, "seconds": seconds}


@pytest.fixture(scope="session")
def direct_run(experiment, family):
    n_values, _, test_idx = family
    template = experiment.problem.template()
    started = time.perf_counter()
    dataset = generate_direct_dataset(template, n_values,
                                      grid=experiment.direct.grid)
    mlp, report = train_direct_net(dataset, experiment.direct_fit())
    rows = evaluate_methods(
        template, n_values[test_idx],
        direct_predict=lambda n, xs, ys: direct_field_values(mlp, n, xs, ys))
    seconds = time.perf_counter() - started
    return {"template": template, "dataset": dataset, "mlp": mlp,
            "report": report, "rows": rows, "seconds": seconds}


@pytest.fixture(scope="session")
def pinn_run(experiment):
    p = experiment.pinn
    started = time.perf_counter()
    problem = build_pinn_problem(p.n, p.interior, p.per_edge,
                                 seed=p.collocation_seed,
                                 weights=(p.w_pde, p.w_dirichlet, p.w_neumann))
    mlp, report = train_pinn(problem, experiment.pinn_fit())
    reference = HeatProblem(n=p.n, mesh=p.reference_mesh,
                            degree=p.reference_degree)
    rows = evaluate_methods(
        experiment.problem.template(), [],
        pinn_predict=lambda xs, ys: pinn_field_values(mlp, xs, ys),
        pinn_n=p.n, pinn_reference=reference)
    seconds = time.perf_counter() - started
    return {"mlp": mlp, "report": report, "rows": rows,
            "reference": reference, "seconds": seconds}


# --- criteria -----------------------------------------------------------------


def test_criterion_01_quadratic_projection_pieces():
    """Unit-interval quadratic mass matrix and sine load check out.

    The matrix assembly is quadrature-based, so it is compared against
    the exact fraction matrix; the load vector is closed-form, so it is
    compared against adaptive quadrature of basis times sine. Draws stay
    in (0.05, 0.5): far below that every evaluation route loses trailing
    digits to cancellation, which would test arithmetic, not the code.
    """
    started = time.perf_counter()
    kv = unit_quadratic_basis()
    matrix_err = float(np.max(np.abs(mass_matrix_1d(kv) - FRACTION_MASS_MATRIX)))

    rng = np.random.default_rng(11)
    rhs_err = 0.0
    for n in 0.05 + 0.45 * rng.random(10):
        got = sine_projection_rhs(float(n))
        want = np.array([
            quad(lambda t, k=k: dense_values(kv, t)[k] * math.sin(n * math.pi * t),
                 0.0, 1.0, epsabs=1e-13)[0]
            for k in range(3)
        ])
        rhs_err = max(rhs_err, float(np.max(np.abs(got - want))))
    seconds = time.perf_counter() - started
    print(f"criterion 1: matrix err {matrix_err:.2e}, rhs err {rhs_err:.2e}, "
          f"{seconds:.2f}s")
    assert matrix_err < MATRIX_TOL
    assert rhs_err < RHS_TOL
    assert seconds < 1.0


def test_criterion_02_engine_matches_unit_closed_forms():
    """Generic-engine gradients equal the hand-derived unit partials.

    1,000 random draws per unit: the scalar fit (4 partials), the
    two-input fit (5 partials), and the three physics terms (12 partials).
    """
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = {"scalar": 0.0, "two_input": 0.0, "physics": 0.0}

    for _ in range(1000):
        params = rng.uniform(-2.0, 2.0, size=4)
        n = float(rng.uniform(0.05, 0.5))
        target = float(rng.uniform(-1.0, 1.0))
        e_ref, g_ref = scalar_fit_gradients(params, n, target)
        e_eng, g_eng = engine_scalar_fit_gradients(params, n, target)
        worst["scalar"] = max(worst["scalar"], abs(e_ref - e_eng),
                              float(np.max(np.abs(g_ref - g_eng))))

    for _ in range(1000):
        params = rng.uniform(-2.0, 2.0, size=5)
        n = float(rng.uniform(0.05, 0.5))
        x = float(rng.uniform(0.0, 0.5))
        target = float(rng.uniform(-1.0, 1.0))
        e_ref, g_ref = two_input_fit_gradients(params, n, x, target)
        e_eng, g_eng = engine_two_input_fit_gradients(params, n, x, target)
        worst["two_input"] = max(worst["two_input"], abs(e_ref - e_eng),
                                 float(np.max(np.abs(g_ref - g_eng))))

    for _ in range(1000):
        params = rng.uniform(-2.0, 2.0, size=4)
        n = float(rng.uniform(0.05, 0.5))
        x = float(rng.uniform(0.0, 0.5))
        ref = pinn_unit_gradients(params, x, n)
        eng = engine_physics_unit_gradients(params, x, n)
        worst["physics"] = max(worst["physics"],
                               max(float(np.max(np.abs(np.asarray(b) - a)))
                                   for a, b in zip(ref, eng)))

    seconds = time.perf_counter() - started
    print(f"criterion 2: worst diffs {worst}, {seconds:.2f}s")
    assert all(v < ENGINE_TOL for v in worst.values())
    assert seconds < 5.0


def test_criterion_03_basis_function_properties():
    """Partition of unity, non-negativity, local support, derivative vs FD."""
    started = time.perf_counter()
    worst_pou = 0.0
    worst_fd = 0.0
    for knots, degree in NAMED_KNOT_VECTORS:
        kv = make_knot_vector(knots, degree)
        a, b = kv.domain
        grid = np.union1d(np.linspace(a, b, 201), np.unique(kv.knots))
        table = np.array([dense_values(kv, x) for x in grid])
        worst_pou = max(worst_pou, float(np.max(np.abs(table.sum(axis=1) - 1.0))))
        assert float(table.min()) >= 0.0
        for i in range(kv.num_basis):
            lo, hi = kv.support(i)
            outside = (grid < lo - 1e-9) | (grid > hi + 1e-9)
            assert np.all(table[outside, i] == 0.0)
        h = 1e-6
        for lo, hi in kv.spans():
            for x in np.linspace(lo, hi, 9)[1:-1]:
                exact = dense_first_derivative(kv, x)
                fd = (dense_values(kv, x + h) - dense_values(kv, x - h)) / (2 * h)
                worst_fd = max(worst_fd, float(np.max(np.abs(exact - fd))))
    seconds = time.perf_counter() - started
    print(f"criterion 3: partition err {worst_pou:.2e}, fd err {worst_fd:.2e}, "
          f"{seconds:.2f}s")
    assert worst_pou < PARTITION_TOL
    assert worst_fd < FD_TOL
    assert seconds < 5.0


def test_criterion_04_projection_recovers_spline_member():
    """Projecting a random member of the spline space returns its coefficients."""
    started = time.perf_counter()
    kv = lshape_knot_vector(10, 2)
    rng = np.random.default_rng(42)
    coeffs = rng.uniform(-1.0, 1.0, size=(kv.num_basis, kv.num_basis))

    def f(x, y):
        xs, ys = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        bx = np.array([dense_values(kv, v) for v in xs.ravel()])
        by = np.array([dense_values(kv, v) for v in ys.ravel()])
        return np.einsum("pa,ab,pb->p", bx, coeffs, by).reshape(xs.shape)

    system = assemble_l2_projection(kv, kv, f)
    recovered = solve_system(system).reshape(kv.num_basis, kv.num_basis)
    err = float(np.max(np.abs(recovered - coeffs)))
    seconds = time.perf_counter() - started
    print(f"criterion 4: recovery err {err:.2e}, {seconds:.2f}s")
    assert err < PROJECTION_TOL
    assert seconds < 10.0


def test_criterion_05_dof_counts(solve_sweep):
    """All nine mesh/degree systems expose the documented coefficient counts."""
    counts = {}
    for key, (problem, system, _) in solve_sweep["runs"].items():
        assert problem.num_coefficients == system.matrix.shape[0]
        assert system.matrix.shape[0] == system.matrix.shape[1]
        assert system.rhs.shape == (system.matrix.shape[0],)
        counts[key] = system.matrix.shape[0]
    print(f"criterion 5: dof counts {counts}")
    assert counts == DOF_TABLE


def test_criterion_06_solver_residuals(solve_sweep):
    """Relative residual of every solved system, largest one included."""
    worst = 0.0
    for (mesh, degree), (_, system, solution) in solve_sweep["runs"].items():
        rhs_norm = float(np.max(np.abs(system.rhs)))
        assert rhs_norm > 0.0
        residual = float(np.max(np.abs(system.matrix @ solution - system.rhs)))
        worst = max(worst, residual / rhs_norm)
    seconds = solve_sweep["seconds"]
    print(f"criterion 6: worst relative residual {worst:.2e}, sweep {seconds:.1f}s")
    assert worst < RESIDUAL_TOL
    assert seconds < 60.0


def test_criterion_07_coefficient_network(coeff_run, experiment, family):
    """Coefficient network: held-out accuracy plus single-sample memorization."""
    _, train_idx, _ = family
    assert len(train_idx) == 19
    assert experiment.coeff.epochs == 2000
    aggregate = coeff_run["rows"][-1]
    assert aggregate["method"] == "coeff" and aggregate["n"] == "all"

    single = generate_coeff_dataset(coeff_run["template"], [0.25])
    memo_cfg = dataclasses.replace(experiment.coeff_fit(), test_fraction=0.0)
    _, memo_report = train_coefficient_net(single, memo_cfg)

    seconds = coeff_run["seconds"] + memo_report.seconds
    print(f"criterion 7: held-out coeff mse {aggregate['coeff_mse']:.3e}, "
          f"pointwise mse {aggregate['pointwise_mse']:.3e}, "
          f"memorization {memo_report.final_train_mse:.3e}, {seconds:.1f}s")
    assert aggregate["coeff_mse"] < ACCURACY_BAR
    assert aggregate["pointwise_mse"] < ACCURACY_BAR
    assert memo_report.final_train_mse < MEMORIZATION_BAR
    assert seconds < 600.0


def test_criterion_08_direct_field_network(direct_run, experiment):
    """Direct field network accuracy on held-out heating parameters.

    The shipped run extends the 40-epoch baseline; the baseline itself is
    reproduced here and its held-out error printed for reference, while
    the accuracy bar applies to the shipped configuration.
    """
    aggregate = direct_run["rows"][-1]
    assert aggregate["method"] == "direct" and aggregate["n"] == "all"

    baseline_cfg = dataclasses.replace(experiment.direct_fit(), epochs=40)
    _, baseline_report = train_direct_net(direct_run["dataset"], baseline_cfg)

    seconds = direct_run["seconds"] + baseline_report.seconds
    print(f"criterion 8: held-out pointwise mse {aggregate['pointwise_mse']:.3e} "
          f"({experiment.direct.epochs} epochs), 40-epoch baseline "
          f"{baseline_report.final_test_mse:.3e}, {seconds:.1f}s")
    assert aggregate["pointwise_mse"] < ACCURACY_BAR
    assert seconds < 600.0


def test_criterion_09_physics_trained_network(pinn_run, experiment):
    """Physics-only training reaches the accuracy bar at fixed heating.

    The network is judged against a refined solve (mesh 40, cubic) standing
    in for the continuum field: the training-scale mesh's own discretization
    error at this heating exceeds the bar, so comparing against it would
    measure the reference, not the network.
    """
    mlp = pinn_run["mlp"]
    p = experiment.pinn
    assert mlp.layer_sizes == [2, *p.hidden, 1]
    assert list(p.hidden) == [50, 50]
    assert mlp.activations == ["tanh", "tanh", "identity"]
    aggregate = pinn_run["rows"][-1]
    assert aggregate["method"] == "pinn" and aggregate["n"] == "all"
    seconds = pinn_run["seconds"]
    print(f"criterion 9: pointwise mse {aggregate['pointwise_mse']:.3e} vs "
          f"mesh {p.reference_mesh} degree {p.reference_degree} reference, "
          f"{seconds:.1f}s")
    assert aggregate["pointwise_mse"] < ACCURACY_BAR
    assert seconds < 600.0


def test_criterion_10_three_method_comparison(coeff_run, direct_run, pinn_run,
                                              experiment, family, tmp_path):
    """One table compares all three methods; each clears the accuracy bar.

    The relative ordering of the three errors is printed for inspection
    but deliberately not asserted: it depends on training budgets, and
    pinning it would turn a qualitative observation into a flaky gate.
    """
    n_values, _, test_idx = family
    template = coeff_run["template"]
    coeff_mlp = coeff_run["mlp"]
    direct_mlp = direct_run["mlp"]
    pinn_mlp = pinn_run["mlp"]
    rows = evaluate_methods(
        template, n_values[test_idx],
        coeff_predict=lambda n: predict_coefficients(coeff_mlp, n, template),
        direct_predict=lambda n, xs, ys: direct_field_values(direct_mlp, n, xs, ys),
        pinn_predict=lambda xs, ys: pinn_field_values(pinn_mlp, xs, ys),
        pinn_n=experiment.pinn.n,
        train_seconds={"coeff": coeff_run["seconds"],
                       "direct": direct_run["seconds"],
                       "pinn": pinn_run["seconds"]},
        pinn_reference=pinn_run["reference"])

    path = tmp_path / "comparison.csv"
    write_comparison_csv(rows, path)
    table = read_comparison_csv(path)
    aggregate = {row["method"]: row for row in table if row["n"] == "all"}
    assert set(aggregate) == {"coeff", "direct", "pinn"}
    order = sorted(aggregate, key=lambda m: aggregate[m]["pointwise_mse"])
    summary = ", ".join(f"{m}={aggregate[m]['pointwise_mse']:.3e}"
                        for m in order)
    print(f"criterion 10: {summary} (ordering observed, not asserted)")
    for method in ("coeff", "direct", "pinn"):
        assert aggregate[method]["pointwise_mse"] < ACCURACY_BAR
        assert aggregate[method]["train_seconds"] is not None


def test_criterion_11_unit_physics_loop():
    """The 4-parameter physics loop lands within 0.05 of the exact sine."""
    xs = 0.01 * np.arange(1, 51)
    params, errors = train_physics_unit(xs, 0.333, eta=0.1, seed=0)
    deviation = physics_unit_deviation(params, 0.333)
    print(f"criterion 11: max deviation {deviation:.4f} after {len(errors)} "
          f"samples, final params {np.round(params, 4).tolist()}")
    assert deviation < UNIT_DEVIATION_BAR


def test_criterion_12_seeded_reruns_are_byte_identical(tmp_path, experiment,
                                                       family):
    """Rerunning each seeded pipeline stage reproduces its outputs exactly.

    Covers dataset generation, all three training loops, both figure
    writers, and the comparison table. The direct and physics loops rerun
    at reduced epoch counts: the loops draw from the same seeded generators
    regardless of length, so equality at k epochs exercises the identical
    code path the shipped counts use, without doubling a multi-minute run.
    Only wall-clock fields are exempt, and none appear in these artifacts.
    """
    n_values, _, _ = family
    template = experiment.problem.template()
    subset = n_values[:4]

    def bytes_of(name, writer):
        path = tmp_path / name
        writer(path)
        return path.read_bytes()

    pairs = {}

    datasets = [generate_coeff_dataset(template, subset) for _ in range(2)]
    pairs["coeff dataset csv"] = [
        bytes_of(f"coeff_{k}.csv", lambda p, d=d: coeff_dataset_to_csv(d, p))
        for k, d in enumerate(datasets)
    ]

    full = generate_coeff_dataset(template, n_values)
    coeff_docs, coeff_losses = [], []
    for _ in range(2):
        mlp, report = train_coefficient_net(full, experiment.coeff_fit())
        coeff_docs.append(mlp_to_document(mlp, {"method": "coeff"}))
        coeff_losses.append(report.epoch_losses)
    pairs["coeff model document"] = coeff_docs
    pairs["coeff loss csv"] = [
        bytes_of(f"loss_{k}.csv", lambda p, ls=ls: write_loss_csv(ls, p))
        for k, ls in enumerate(coeff_losses)
    ]

    direct_data = generate_direct_dataset(template, subset,
                                          grid=experiment.direct.grid)
    direct_cfg = dataclasses.replace(experiment.direct_fit(), epochs=30)
    pairs["direct model document"] = [
        mlp_to_document(train_direct_net(direct_data, direct_cfg)[0],
                        {"method": "direct"})
        for _ in range(2)
    ]

    p = experiment.pinn
    pinn_cfg = dataclasses.replace(experiment.pinn_fit(), epochs=300)
    pairs["physics model document"] = [
        mlp_to_document(
            train_pinn(build_pinn_problem(p.n, p.interior, p.per_edge,
                                          seed=p.collocation_seed),
                       pinn_cfg)[0],
            {"method": "pinn"})
        for _ in range(2)
    ]

    small = solve_heat_problem(HeatProblem(n=1.0, mesh=4, degree=2))
    xs, ys, values = sample_field_grid(small, 40, 40)
    pairs["heatmap svg"] = [
        bytes_of(f"map_{k}.svg",
                 lambda p: heatmap_svg(xs, ys, values, p, "field"))
        for k in range(2)
    ]
    losses = coeff_losses[0][:200]
    pairs["loss curve svg"] = [
        bytes_of(f"curve_{k}.svg", lambda p: loss_curve_svg(losses, p, "loss"))
        for k in range(2)
    ]

    rows = [
        {"method": "coeff", "n": 0.25, "coeff_mse": 1.5e-5,
         "pointwise_mse": 2.5e-6, "train_seconds": None},
        {"method": "coeff", "n": "all", "coeff_mse": 1.5e-5,
         "pointwise_mse": 2.5e-6, "train_seconds": None},
    ]
    pairs["comparison csv"] = [
        bytes_of(f"table_{k}.csv", lambda p: write_comparison_csv(rows, p))
        for k in range(2)
    ]

    mismatched = [name for name, (first, second) in pairs.items()
                  if first != second]
    print(f"criterion 12: {len(pairs)} artifact kinds rerun, "
          f"mismatches: {mismatched or 'none'}")
    assert not mismatched

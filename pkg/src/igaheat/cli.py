"""Command-line front end: dataset, train, eval, compare, appendix.

Every command reads one JSON config (all defaults apply when --config
is omitted), writes its artifacts atomically into the output directory,
and exits nonzero with a diagnostic on failure. Wall-clock timing lands
only in report JSON files and the train_seconds column; all other
outputs are byte-reproducible for a fixed config.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import closedform, reference1d, report
from .config import ExperimentConfig, load_config
from .iga import (
    HeatProblem,
    lshape_mask,
    mass_matrix_1d,
    project_sine_1d,
    solve_heat_problem,
    unit_quadratic_basis,
)
from .bspline import sample_field_grid
from .neuralnet import Mlp, load_mlp, save_mlp
from .training import (
    TrainReport,
    build_pinn_problem,
    coeff_dataset_to_csv,
    default_n_grid,
    direct_dataset_to_csv,
    direct_field_values,
    evaluate_methods,
    generate_coeff_dataset,
    generate_direct_dataset,
    pinn_field_values,
    predict_coefficients,
    predict_field_from_coeffs,
    split_indices,
    train_coefficient_net,
    train_direct_net,
    train_pinn,
)

METHODS = ("coeff", "direct", "pinn")


@contextlib.contextmanager
def _atomic(path: Path):
    """Write via a sibling temp file, renaming onto the target on success."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def _read_config(path: str | None) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def _prepare_out(config: ExperimentConfig, override: str | None) -> Path:
    out = Path(override) if override else Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _override_seed(config: ExperimentConfig, seed: int | None,
                   methods=METHODS) -> ExperimentConfig:
    if seed is None:
        return config
    replaced = {
        m: dataclasses.replace(getattr(config, m), seed=seed) for m in methods
    }
    return dataclasses.replace(config, **replaced)


def _family_n_values(config: ExperimentConfig) -> np.ndarray:
    fam = config.family
    return default_n_grid(fam.count, (fam.n_low, fam.n_high))


def _test_n_values(config: ExperimentConfig) -> np.ndarray:
    # same seeded split the supervised trainings use internally
    fam = config.family
    _, test = split_indices(fam.count, fam.test_fraction, fam.split_seed)
    return _family_n_values(config)[test]


def _fmt(value, spec: str = ".6e") -> str:
    if value is None:
        return "-"
    if isinstance(value, str):
        return value
    return format(value, spec)


def _row_line(row: dict) -> str:
    return (f"  {row['method']:>6}  n={_fmt(row['n'], 'g'):>8}"
            f"  coeff_mse={_fmt(row['coeff_mse'])}"
            f"  pointwise_mse={_fmt(row['pointwise_mse'])}")


# --- training shared by cmd_train and cmd_compare ----------------------------


def _train_method(config: ExperimentConfig, method: str):
    """Train one method from the config; returns (mlp, report, model meta)."""
    template = config.problem.template()
    meta = {"method": method, "mesh": config.problem.mesh,
            "degree": config.problem.degree}
    if method == "coeff":
        dataset = generate_coeff_dataset(template, _family_n_values(config))
        mlp, train_report = train_coefficient_net(dataset, config.coeff_fit())
    elif method == "direct":
        dataset = generate_direct_dataset(
            template, _family_n_values(config), grid=config.direct.grid)
        mlp, train_report = train_direct_net(dataset, config.direct_fit())
    elif method == "pinn":
        p = config.pinn
        problem = build_pinn_problem(
            p.n, p.interior, p.per_edge, seed=p.collocation_seed,
            weights=(p.w_pde, p.w_dirichlet, p.w_neumann))
        mlp, train_report = train_pinn(problem, config.pinn_fit())
        meta.update(n=p.n, reference_mesh=p.reference_mesh,
                    reference_degree=p.reference_degree)
    else:
        raise ValueError(f"unknown method {method!r}")
    if method != "pinn":
        fam = config.family
        meta.update(n_low=fam.n_low, n_high=fam.n_high, count=fam.count,
                    test_fraction=fam.test_fraction, split_seed=fam.split_seed)
    return mlp, train_report, meta


def _report_dict(method: str, train_report: TrainReport) -> dict:
    return {
        "method": method,
        "epochs": train_report.epochs,
        "seed": train_report.seed,
        "final_train_mse": train_report.final_train_mse,
        "final_test_mse": train_report.final_test_mse,
        "final_lr": train_report.final_lr,
        "seconds": train_report.seconds,
    }


def _write_training_files(out: Path, method: str, mlp: Mlp,
                          train_report: TrainReport, meta: dict) -> Path:
    model_path = out / f"model_{method}.json"
    with _atomic(model_path) as path:
        save_mlp(mlp, path, meta)
    with _atomic(out / f"loss_{method}.csv") as path:
        report.write_loss_csv(train_report.epoch_losses, path)
    with _atomic(out / f"report_{method}.json") as path:
        with open(path, "w") as handle:
            json.dump(_report_dict(method, train_report), handle, indent=2)
            handle.write("\n")
    return model_path


def _print_training_summary(method: str, train_report: TrainReport) -> None:
    test = ("-" if train_report.final_test_mse is None
            else f"{train_report.final_test_mse:.3e}")
    print(f"trained {method}: train mse {train_report.final_train_mse:.3e}, "
          f"test mse {test} ({train_report.seconds:.1f}s)")


# --- commands -----------------------------------------------------------------


def cmd_dataset(config_path: str | None, out_override: str | None) -> int:
    config = _read_config(config_path)
    out = _prepare_out(config, out_override)
    template = config.problem.template()
    n_values = _family_n_values(config)

    coeff = generate_coeff_dataset(template, n_values)
    with _atomic(out / "coeff_dataset.csv") as path:
        coeff_dataset_to_csv(coeff, path)
    print(f"wrote {out / 'coeff_dataset.csv'} "
          f"({len(coeff.n_values)} samples x {coeff.coefficients.shape[1]} "
          "coefficients)")

    direct = generate_direct_dataset(template, n_values,
                                     grid=config.direct.grid)
    with _atomic(out / "direct_dataset.csv") as path:
        direct_dataset_to_csv(direct, path)
    print(f"wrote {out / 'direct_dataset.csv'} ({len(direct.n)} rows)")
    return 0


def cmd_train(config_path: str | None, method: str, seed: int | None,
              out_override: str | None) -> int:
    config = _override_seed(_read_config(config_path), seed, (method,))
    out = _prepare_out(config, out_override)
    mlp, train_report, meta = _train_method(config, method)
    model_path = _write_training_files(out, method, mlp, train_report, meta)
    _print_training_summary(method, train_report)
    print(f"wrote {model_path}")
    return 0


def cmd_eval(model_path: str, config_path: str | None,
             out_override: str | None) -> int:
    config = _read_config(config_path)
    out = _prepare_out(config, out_override)
    mlp, meta = load_mlp(model_path)
    method = meta.get("method")
    template = config.problem.template()

    if method == "coeff":
        rows = evaluate_methods(
            template, _test_n_values(config),
            coeff_predict=lambda n: predict_coefficients(mlp, n, template))
    elif method == "direct":
        rows = evaluate_methods(
            template, _test_n_values(config),
            direct_predict=lambda n, xs, ys: direct_field_values(mlp, n, xs, ys))
    elif method == "pinn":
        n = float(meta.get("n", config.pinn.n))
        reference = HeatProblem(n=n, mesh=config.pinn.reference_mesh,
                                degree=config.pinn.reference_degree)
        rows = evaluate_methods(
            template, [],
            pinn_predict=lambda xs, ys: pinn_field_values(mlp, xs, ys),
            pinn_n=n, pinn_reference=reference)
    else:
        raise ValueError(
            f"model file carries no known method tag (got {method!r})")

    metrics_path = out / f"metrics_{method}.csv"
    with _atomic(metrics_path) as path:
        report.write_comparison_csv(rows, path)
    for row in rows:
        print(_row_line(row))
    print(f"wrote {metrics_path}")
    return 0


def _error_map(out: Path, name: str, title: str, predicted: np.ndarray,
               reference_values: np.ndarray, xs: np.ndarray,
               ys: np.ndarray) -> None:
    difference = np.abs(predicted - reference_values)
    difference[~lshape_mask(xs, ys)] = np.nan
    with _atomic(out / name) as path:
        report.heatmap_svg(xs, ys, difference, path, title)


def cmd_compare(config_path: str | None, seed: int | None,
                out_override: str | None) -> int:
    config = _override_seed(_read_config(config_path), seed)
    out = _prepare_out(config, out_override)
    template = config.problem.template()

    trained: dict[str, tuple[Mlp, TrainReport]] = {}
    for method in METHODS:
        mlp, train_report, meta = _train_method(config, method)
        trained[method] = (mlp, train_report)
        _write_training_files(out, method, mlp, train_report, meta)
        with _atomic(out / f"loss_{method}.svg") as path:
            report.loss_curve_svg(train_report.epoch_losses, path,
                                  f"{method} training loss")
        _print_training_summary(method, train_report)

    coeff_mlp = trained["coeff"][0]
    direct_mlp = trained["direct"][0]
    pinn_mlp = trained["pinn"][0]
    p = config.pinn
    pinn_reference = HeatProblem(n=p.n, mesh=p.reference_mesh,
                                 degree=p.reference_degree)
    n_test = _test_n_values(config)
    rows = evaluate_methods(
        template, n_test,
        coeff_predict=lambda n: predict_coefficients(coeff_mlp, n, template),
        direct_predict=lambda n, xs, ys: direct_field_values(direct_mlp, n, xs, ys),
        pinn_predict=lambda xs, ys: pinn_field_values(pinn_mlp, xs, ys),
        pinn_n=p.n,
        train_seconds={m: trained[m][1].seconds for m in METHODS},
        pinn_reference=pinn_reference)
    with _atomic(out / "comparison.csv") as path:
        report.write_comparison_csv(rows, path)

    # error heatmaps: the two data-trained nets at one held-out n against
    # the solver they were trained on, the physics net at its fixed n
    # against the refined solve
    grid = 100
    n_show = float(n_test[len(n_test) // 2])
    shown = solve_heat_problem(dataclasses.replace(template, n=n_show))
    xs, ys, shown_values = sample_field_grid(shown, grid, grid)
    _, _, coeff_values = sample_field_grid(
        predict_field_from_coeffs(coeff_mlp, n_show, template), grid, grid)
    _error_map(out, "error_coeff.svg",
               f"|coefficient net - solver|, n={n_show:g}",
               coeff_values, shown_values, xs, ys)
    _error_map(out, "error_direct.svg",
               f"|direct net - solver|, n={n_show:g}",
               direct_field_values(direct_mlp, n_show, xs, ys),
               shown_values, xs, ys)
    ref_solution = solve_heat_problem(pinn_reference)
    xs_r, ys_r, ref_values = sample_field_grid(ref_solution, grid, grid)
    _error_map(out, "error_pinn.svg",
               f"|physics net - refined solver|, n={p.n:g}",
               pinn_field_values(pinn_mlp, xs_r, ys_r), ref_values, xs_r, ys_r)

    for row in rows:
        print(_row_line(row))
    print(f"wrote {out / 'comparison.csv'} and SVG maps in {out}")
    return 0


# --- the three 1D walk-throughs -----------------------------------------------


def _appendix_scalar() -> int:
    """Coefficients-of-a-projection fit: three one-unit nets, one per entry."""
    literal = reference1d.PROJECTION_MATRIX
    assembled = mass_matrix_1d(unit_quadratic_basis())
    print("3x3 projection system (rows):")
    for row in literal:
        print("   " + "  ".join(f"{v:.12f}" for v in row))
    print(f"literal vs assembled Gram matrix: max |diff| = "
          f"{np.max(np.abs(literal - assembled)):.3e}")

    n_values, coeffs = reference1d.coefficient_dataset()
    print(f"\ndataset: {len(n_values)} samples of n -> (u1, u2, u3)")
    for n, (u1, u2, u3) in zip(n_values, coeffs):
        print(f"   n={n:.2f}  u1={u1: .12f}  u2={u2: .12f}  u3={u3: .12f}")

    print("\nclosed-form Cramer solve vs assembled LU solve:")
    worst = 0.0
    for n in n_values:
        worst = max(worst, float(np.max(np.abs(
            reference1d.solve_projection_cramer(n) - project_sine_1d(n)))))
    print(f"   max coefficient |diff| over the dataset = {worst:.3e}")

    print("\none pass of seeded stochastic descent per coefficient "
          "(eta=0.1, 50 draws with replacement):")
    fitted = []
    for k, start in enumerate(reference1d.SCALAR_STARTS):
        params, errors = reference1d.train_scalar_fit(
            n_values, coeffs[:, k], start)
        fitted.append(params)
        param_text = " ".join(f"{v: .6f}" for v in params)
        print(f"   unit {k + 1}: start {start} -> params ({param_text}), "
              f"final error {errors[-1]:.3e}")

    n_eval = 0.333
    xs = 0.01 * np.arange(0, 51)
    predicted = sum(
        closedform.scalar_fit_value(params, n_eval) * basis
        for params, basis in zip(fitted, [
            (1.0 - xs) ** 2, 2.0 * xs * (1.0 - xs), xs ** 2]))
    deviation = float(np.max(np.abs(predicted - np.sin(n_eval * np.pi * xs))))
    print(f"\ncomposite fit at n={n_eval}: "
          f"max |fit(x) - sin(n pi x)| on [0, 0.5] = {deviation:.4f}")

    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        params = rng.uniform(-2.0, 2.0, size=4)
        n = rng.uniform(0.0, 0.5)
        target = rng.uniform(-1.0, 1.0)
        _, grads = closedform.scalar_fit_gradients(params, n, target)
        _, engine = reference1d.engine_scalar_fit_gradients(params, n, target)
        worst = max(worst, float(np.max(np.abs(grads - engine))))
    print(f"closed-form vs engine gradients: max |diff| = {worst:.3e} "
          "over 200 random draws")
    return 0


def _appendix_two_input() -> int:
    """Field fit: one unit taking (n, x), one pass over the full table."""
    n_inputs, x_inputs, targets = reference1d.field_dataset()
    print(f"field dataset: {len(targets)} samples of (n, x) -> projected value")

    params, errors = reference1d.train_two_input_fit(
        n_inputs, x_inputs, targets, reference1d.TWO_INPUT_START)
    param_text = " ".join(f"{v: .6f}" for v in params)
    print(f"start {reference1d.TWO_INPUT_START} -> params ({param_text})")
    print(f"final error {errors[-1]:.3e}, "
          f"mean over last 1000 steps {np.mean(errors[-1000:]):.3e}")

    n_eval = 0.333
    xs = 0.01 * np.arange(0, 51)
    predicted = np.array(
        [closedform.two_input_fit_value(params, n_eval, x) for x in xs])
    deviation = float(np.max(np.abs(predicted - np.sin(n_eval * np.pi * xs))))
    print(f"fit at n={n_eval}: max |fit(x) - sin(n pi x)| on [0, 0.5] = "
          f"{deviation:.4f}")

    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        params = rng.uniform(-2.0, 2.0, size=5)
        n = rng.uniform(0.0, 0.5)
        x = rng.uniform(0.0, 0.5)
        target = rng.uniform(-1.0, 1.0)
        _, grads = closedform.two_input_fit_gradients(params, n, x, target)
        _, engine = reference1d.engine_two_input_fit_gradients(
            params, n, x, target)
        worst = max(worst, float(np.max(np.abs(grads - engine))))
    print(f"closed-form vs engine gradients: max |diff| = {worst:.3e} "
          "over 200 random draws")
    return 0


def _appendix_physics() -> int:
    """Physics fit: one unit trained on residual + boundary terms, no labels."""
    n = 0.333
    x_samples = 0.01 * np.arange(1, 51)
    print(f"physics unit, n={n}: 50 sample points on (0, 0.5], "
          f"start {reference1d.PHYSICS_START}, eta=0.1")

    params, errors = reference1d.train_physics_unit(x_samples, n)
    param_text = " ".join(f"{v: .6f}" for v in params)
    print(f"trained params ({param_text})")
    print("final error terms: residual {0:.3e}, fixed end {1:.3e}, "
          "flux end {2:.3e}".format(*errors[-1]))

    deviation = reference1d.physics_unit_deviation(params, n)
    print(f"max |fit(x) - sin(n pi x)| on [0, 0.5] = {deviation:.4f}")

    engine_params, _ = reference1d.train_physics_unit_engine(x_samples, n)
    print(f"closed-form vs engine training twin: max parameter |diff| = "
          f"{np.max(np.abs(params - engine_params)):.3e}")
    return 0


def cmd_appendix(which: str) -> int:
    runner = {"a": _appendix_scalar, "b": _appendix_two_input,
              "c": _appendix_physics}[which]
    return runner()


# --- argument plumbing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igaheat",
        description="L-shape heat solver and neural approximation trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    dataset = sub.add_parser(
        "dataset", help="solve the family and write the training tables")
    train = sub.add_parser(
        "train", help="train one method; writes model, loss curve, report")
    evaluate = sub.add_parser(
        "eval", help="score a saved model against the solver")
    compare = sub.add_parser(
        "compare", help="train all three methods and write the comparison table")
    appendix = sub.add_parser(
        "appendix", help="run a 1D walk-through and print oracle agreement")

    for p in (dataset, train, evaluate, compare):
        p.add_argument("--config", help="JSON config path (defaults when omitted)")
        p.add_argument("--out", help="output directory (overrides the config)")
    for p in (train, compare):
        p.add_argument("--seed", type=int,
                       help="override the training init seed(s)")
    train.add_argument("--method", required=True, choices=METHODS)
    evaluate.add_argument("model", help="model JSON written by train/compare")
    appendix.add_argument("which", choices=("a", "b", "c"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "dataset":
            return cmd_dataset(args.config, args.out)
        if args.command == "train":
            return cmd_train(args.config, args.method, args.seed, args.out)
        if args.command == "eval":
            return cmd_eval(args.model, args.config, args.out)
        if args.command == "compare":
            return cmd_compare(args.config, args.seed, args.out)
        return cmd_appendix(args.which)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

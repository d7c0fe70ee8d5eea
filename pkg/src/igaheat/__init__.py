"""Isogeometric heat solver on an L shape plus neural approximation schemes.

The library side exposes the B-spline machinery, the Galerkin solver,
the network engine, and the three training pipelines; the ``igaheat``
command drives dataset generation, training, evaluation, comparison,
and the 1D walk-throughs.
"""

from .bspline import (
    BasisEval,
    KnotVector,
    SplineField2D,
    eval_basis,
    eval_basis_derivatives,
    eval_field,
    make_field,
    make_knot_vector,
    sample_field_grid,
)
from .quadrature import QuadRule, gauss_legendre
from .iga import (
    HeatProblem,
    LinearSystem,
    SingularMatrixError,
    assemble_l2_projection,
    assemble_neumann_load,
    assemble_stiffness,
    build_heat_system,
    dirichlet_flat_indices,
    export_coefficients_csv,
    export_solution_csv,
    heating_g,
    lshape_knot_vector,
    lshape_mask,
    mass_matrix_1d,
    pointwise_mse,
    project_sine_1d,
    sine_projection_rhs,
    solve_heat_problem,
    solve_system,
    stiffness_matrix_1d,
    unit_quadratic_basis,
)
from .neuralnet import (
    AdamState,
    Mlp,
    PlateauScheduler,
    TrainingDivergedError,
    adam_step,
    backward,
    backward_input_derivatives,
    forward,
    forward_with_input_derivatives,
    init_adam,
    init_mlp,
    input_derivatives,
    load_mlp,
    mlp_from_document,
    mlp_to_document,
    plateau_step,
    save_mlp,
    sgd_step,
)
from .training import (
    CoeffDataset,
    DirectDataset,
    FitConfig,
    PinnConfig,
    PinnProblem,
    TrainReport,
    build_pinn_problem,
    coeff_dataset_from_csv,
    coeff_dataset_to_csv,
    default_n_grid,
    direct_dataset_from_csv,
    direct_dataset_to_csv,
    direct_field_values,
    evaluate_methods,
    generate_coeff_dataset,
    generate_direct_dataset,
    pinn_field_values,
    pinn_loss,
    predict_coefficients,
    predict_field_from_coeffs,
    split_indices,
    train_coefficient_net,
    train_direct_net,
    train_pinn,
)
from .config import (
    ExperimentConfig,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
)

__version__ = "0.1.0"

"""Experiment configuration: one JSON document drives every command.

The schema is a nested key/value structure with a dataclass per section.
Unknown keys are rejected rather than ignored so a typo cannot silently
fall back to a default; missing keys take the documented defaults.
parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields

from .iga import HeatProblem
from .training import (
    DEFAULT_N_COUNT,
    DEFAULT_SPLIT_SEED,
    FitConfig,
    N_RANGE,
    PinnConfig,
)


@dataclass(frozen=True)
class ProblemConfig:
    """Discretization of the L-shape problem."""

    mesh: int = 10
    degree: int = 2

    def template(self, n: float = 1.0) -> HeatProblem:
        return HeatProblem(n=n, mesh=self.mesh, degree=self.degree)


@dataclass(frozen=True)
class FamilyConfig:
    """Heating-parameter family and train/test protocol."""

    n_low: float = N_RANGE[0]
    n_high: float = N_RANGE[1]
    count: int = DEFAULT_N_COUNT
    test_fraction: float = 0.2
    split_seed: int = DEFAULT_SPLIT_SEED

    def __post_init__(self):
        if not 0 < self.n_low < self.n_high:
            raise ValueError(f"need 0 < n_low < n_high, got {self.n_low}, {self.n_high}")


@dataclass(frozen=True)
class CoeffNetConfig:
    """Coefficient-network knobs (n -> all spline coefficients)."""

    hidden: tuple[int, ...] = (100, 100)
    activation: str = "tanh"
    epochs: int = 2000
    lr: float = 3e-3
    batch_size: int | None = None
    seed: int = 0
    plateau_factor: float = 0.5
    plateau_patience: int = 100
    min_lr: float = 1e-6


@dataclass(frozen=True)
class DirectNetConfig:
    """Direct-network knobs ((n, x, y) -> u)."""

    hidden: tuple[int, ...] = (100, 100)
    activation: str = "tanh"
    epochs: int = 500
    lr: float = 5e-3
    batch_size: int | None = 1024
    seed: int = 0
    plateau_factor: float = 0.5
    plateau_patience: int = 40
    min_lr: float = 1e-6
    grid: int = 50


@dataclass(frozen=True)
class PinnRunConfig:
    """Physics-network knobs for one fixed heating parameter."""

    n: float = 1.0
    hidden: tuple[int, ...] = (50, 50)
    activation: str = "tanh"
    epochs: int = 6250
    lr: float = 3e-3
    seed: int = 0
    plateau_factor: float = 0.5
    plateau_patience: int = 125
    min_lr: float = 1e-5
    chunks: int = 4
    resample_every: int = 0
    interior: int = 4000
    per_edge: int = 800
    collocation_seed: int = 0
    w_pde: float = 1.0
    w_dirichlet: float = 50.0
    w_neumann: float = 50.0
    reference_mesh: int = 40
    reference_degree: int = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, nested by concern."""

    problem: ProblemConfig = field(default_factory=ProblemConfig)
    family: FamilyConfig = field(default_factory=FamilyConfig)
    coeff: CoeffNetConfig = field(default_factory=CoeffNetConfig)
    direct: DirectNetConfig = field(default_factory=DirectNetConfig)
    pinn: PinnRunConfig = field(default_factory=PinnRunConfig)
    output_dir: str = "out"

    def __post_init__(self):
        expected = self.problem.template().num_coefficients
        # output width is derived, not configured; nothing to cross-check
        # beyond a constructible problem
        if expected <= 0:
            raise ValueError("problem yields no coefficients")

    def coeff_fit(self) -> FitConfig:
        c, f = self.coeff, self.family
        return FitConfig(hidden=c.hidden, activation=c.activation,
                         epochs=c.epochs, lr=c.lr, batch_size=c.batch_size,
                         seed=c.seed, test_fraction=f.test_fraction,
                         split_seed=f.split_seed,
                         plateau_factor=c.plateau_factor,
                         plateau_patience=c.plateau_patience, min_lr=c.min_lr)

    def direct_fit(self) -> FitConfig:
        c, f = self.direct, self.family
        return FitConfig(hidden=c.hidden, activation=c.activation,
                         epochs=c.epochs, lr=c.lr, batch_size=c.batch_size,
                         seed=c.seed, test_fraction=f.test_fraction,
                         split_seed=f.split_seed,
                         plateau_factor=c.plateau_factor,
                         plateau_patience=c.plateau_patience, min_lr=c.min_lr)

    def pinn_fit(self) -> PinnConfig:
        c = self.pinn
        return PinnConfig(hidden=c.hidden, activation=c.activation,
                          epochs=c.epochs, lr=c.lr, seed=c.seed,
                          plateau_factor=c.plateau_factor,
                          plateau_patience=c.plateau_patience, min_lr=c.min_lr,
                          chunks=c.chunks, resample_every=c.resample_every)


_SECTIONS = {
    "problem": ProblemConfig,
    "family": FamilyConfig,
    "coeff": CoeffNetConfig,
    "direct": DirectNetConfig,
    "pinn": PinnRunConfig,
}


def _dataclass_from_dict(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ValueError(f"{path}: unknown keys {unknown}; valid keys are "
                         f"{sorted(known)}")
    kwargs = {}
    for name, value in data.items():
        if name == "hidden":
            value = tuple(int(v) for v in value)
        kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ValueError(f"config root: expected a mapping, got {type(data).__name__}")
    valid = set(_SECTIONS) | {"output_dir"}
    unknown = sorted(set(data) - valid)
    if unknown:
        raise ValueError(f"config root: unknown keys {unknown}; valid keys are "
                         f"{sorted(valid)}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _dataclass_from_dict(cls, data[name], name)
    if "output_dir" in data:
        if not isinstance(data["output_dir"], str):
            raise ValueError("output_dir: expected a string")
        kwargs["output_dir"] = data["output_dir"]
    return ExperimentConfig(**kwargs)


def config_to_dict(config: ExperimentConfig) -> dict:
    data = dataclasses.asdict(config)
    for section in data.values():
        if isinstance(section, dict) and isinstance(section.get("hidden"), tuple):
            section["hidden"] = list(section["hidden"])
    return data


def load_config(path) -> ExperimentConfig:
    with open(path) as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as handle:
        json.dump(config_to_dict(config), handle, indent=2)
        handle.write("\n")

"""Domain types, the unified search space and population plumbing.

Every task is searched through a shared genotype space ``[0, 1]^D`` where
``D`` is the largest native dimension among the tasks. A task reads only
the first ``native_dim`` coordinates and rescales them into its own box.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid run settings or unknown vocabulary."""


class ModelError(ValueError):
    """Raised when a probability model cannot be fitted."""


class DataError(ValueError):
    """Raised when population data is malformed (non-finite, wrong shape)."""


class ModelKind(str, Enum):
    GAUSSIAN = "Gaussian"
    EXPONENTIAL = "Exponential"
    GAMMA = "Gamma"
    BETA = "Beta"

    @classmethod
    def parse(cls, value: str | ModelKind) -> ModelKind:
        if isinstance(value, cls):
            return value
        for kind in cls:
            if kind.value.lower() == str(value).lower():
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ConfigurationError(f"unknown model kind {value!r}; expected one of: {valid}")


class TransferStrategy(str, Enum):
    PD = "PD"
    PD1 = "PD-1"
    SR = "SR"
    MR = "MR"
    SH = "SH"
    MH = "MH"

    @classmethod
    def parse(cls, value: str | TransferStrategy) -> TransferStrategy:
        if isinstance(value, cls):
            return value
        for strategy in cls:
            if strategy.value.upper() == str(value).upper():
                return strategy
        valid = ", ".join(s.value for s in cls)
        raise ConfigurationError(f"unknown transfer strategy {value!r}; expected one of: {valid}")


PFSampler = Callable[[int, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class TaskDefinition:
    """One optimization task in its native coordinates.

    ``evaluator`` takes a ``(k, native_dim)`` matrix and returns the
    ``(k, n_objectives)`` objective matrix. It must be deterministic.
    ``pf_sampler(count, rng)`` returns ``count`` points on the Pareto front.
    """

    native_dim: int
    n_objectives: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    evaluator: Callable[[np.ndarray], np.ndarray]
    pf_sampler: PFSampler | None = None
    name: str = "task"

    def __post_init__(self):
        lb = np.asarray(self.lower_bounds, dtype=float).reshape(-1)
        ub = np.asarray(self.upper_bounds, dtype=float).reshape(-1)
        if self.native_dim < 1 or self.n_objectives < 1:
            raise ConfigurationError("native_dim and n_objectives must be positive")
        if lb.shape != (self.native_dim,) or ub.shape != (self.native_dim,):
            raise ConfigurationError("bounds must have length native_dim")
        if not np.all(lb < ub):
            raise ConfigurationError("lower_bounds must be strictly below upper_bounds")
        object.__setattr__(self, "lower_bounds", lb)
        object.__setattr__(self, "upper_bounds", ub)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        out = np.asarray(self.evaluator(np.atleast_2d(x)), dtype=float)
        if out.shape != (np.atleast_2d(x).shape[0], self.n_objectives):
            raise DataError(
                f"{self.name}: evaluator returned shape {out.shape}, "
                f"expected ({np.atleast_2d(x).shape[0]}, {self.n_objectives})"
            )
        return out[0] if single else out


@dataclass(frozen=True)
class MultiTaskProblem:
    task1: TaskDefinition
    task2: TaskDefinition
    name: str = "problem"

    @property
    def tasks(self) -> tuple[TaskDefinition, TaskDefinition]:
        return (self.task1, self.task2)

    @property
    def unified_dim(self) -> int:
        return max(self.task1.native_dim, self.task2.native_dim)


@dataclass
class RunConfig:
    """Algorithm settings. Defaults follow the common settings table."""

    population_size: int = 200
    max_generations: int = 1000
    max_evaluations: int = 200_000
    scale_factor: float = 0.01
    mutation_probability: float | None = None  # None -> 1/N
    mutation_index: float = 20.0
    crossover_probability: float = 0.3  # baseline only
    crossover_index: float = 20.0  # baseline only
    model_kind: ModelKind = ModelKind.GAUSSIAN
    transfer_strategy: TransferStrategy = TransferStrategy.PD
    seed: int = 0
    ref_points: int = 10_000
    indicator: str | None = None  # None -> problem default

    def __post_init__(self):
        self.model_kind = ModelKind.parse(self.model_kind)
        self.transfer_strategy = TransferStrategy.parse(self.transfer_strategy)
        if self.population_size < 2 or self.population_size % 2:
            raise ConfigurationError("population_size must be a positive even integer >= 2")
        if self.max_generations < 0:
            raise ConfigurationError("max_generations must be nonnegative")
        if self.max_evaluations < 1:
            raise ConfigurationError("max_evaluations must be positive")
        if self.scale_factor <= 0:
            raise ConfigurationError("scale_factor must be positive")
        if self.mutation_probability is None:
            self.mutation_probability = 1.0 / self.population_size
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ConfigurationError("mutation_probability must lie in [0, 1]")
        if self.mutation_index <= 0 or self.crossover_index <= 0:
            raise ConfigurationError("distribution indices must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.indicator is not None and self.indicator not in ("igd", "igd+"):
            raise ConfigurationError("indicator must be 'igd' or 'igd+'")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model_kind"] = self.model_kind.value
        d["transfer_strategy"] = self.transfer_strategy.value
        return d


@dataclass
class Individual:
    genotype: np.ndarray
    objectives: np.ndarray | None = None
    rank: int | None = None
    crowding: float | None = None
    task: int | None = field(default=None, compare=False)


def genotype_matrix(pop: Sequence[Individual] | np.ndarray) -> np.ndarray:
    """Stack genotypes into an ``(N, D)`` float matrix."""
    if isinstance(pop, np.ndarray):
        return np.atleast_2d(np.asarray(pop, dtype=float))
    if len(pop) == 0:
        return np.empty((0, 0))
    return np.vstack([np.asarray(ind.genotype, dtype=float) for ind in pop])


def objective_matrix(pop: Sequence[Individual] | np.ndarray) -> np.ndarray:
    if isinstance(pop, np.ndarray):
        return np.atleast_2d(np.asarray(pop, dtype=float))
    if any(ind.objectives is None for ind in pop):
        raise DataError("individual has not been evaluated")
    return np.vstack([np.asarray(ind.objectives, dtype=float) for ind in pop])


def initialize_population(problem: MultiTaskProblem, N: int, rng: np.random.Generator) -> list[Individual]:
    if N < 2:
        raise ConfigurationError("population size must be at least 2")
    X = rng.random((N, problem.unified_dim))
    return [Individual(genotype=x) for x in X]


def split_population(pop: Sequence[Individual]) -> tuple[list[Individual], list[Individual]]:
    """Even indices go to task 1, odd indices to task 2."""
    if len(pop) % 2:
        raise ConfigurationError("population size must be even to split into two tasks")
    first, second = list(pop[0::2]), list(pop[1::2])
    for ind in first:
        ind.task = 0
    for ind in second:
        ind.task = 1
    return first, second


def decode(genotype: np.ndarray, task: TaskDefinition) -> np.ndarray:
    """Map unified genotype(s) to the task's native box.

    Accepts a single vector or an ``(N, D)`` matrix.
    """
    g = np.asarray(genotype, dtype=float)
    if g.shape[-1] < task.native_dim:
        raise DataError(f"genotype length {g.shape[-1]} shorter than native_dim {task.native_dim}")
    head = g[..., : task.native_dim]
    return task.lower_bounds + head * (task.upper_bounds - task.lower_bounds)


def encode(x: np.ndarray, task: TaskDefinition, unified_dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`decode`; padding coordinates (if any) are set to 0.5."""
    x = np.asarray(x, dtype=float)
    u = (x - task.lower_bounds) / (task.upper_bounds - task.lower_bounds)
    if unified_dim is None or unified_dim == task.native_dim:
        return u
    pad = np.full(x.shape[:-1] + (unified_dim - task.native_dim,), 0.5)
    return np.concatenate([u, pad], axis=-1)

"""The two-task generational loop and a single-task NSGA-II baseline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ConfigurationError,
    MultiTaskProblem,
    RunConfig,
    TaskDefinition,
    TransferStrategy,
    decode,
    genotype_matrix,
    initialize_population,
    split_population,
)
from .metrics import INDICATORS
from .probmodel import average_error, fit, fitting_error, product_argmax
from .problems import pf_sample
from .sorting import nondominated_levels, select_indices
from .transfer import generate_offspring, knowledge_source, polynomial_mutation

TRACE_COLUMNS = ("generation", "evaluations", "task", "igd_or_igdplus", "e_g", "d1", "mean_w")
SELECTION_PF_POINTS = 1000


class RunError(RuntimeError):
    """Raised when a task evaluator fails mid-run."""


@dataclass(frozen=True)
class TraceRow:
    generation: int
    evaluations: int
    task: int
    indicator: float
    e_g: float
    d1: float
    mean_w: float

    def as_tuple(self) -> tuple:
        return (self.generation, self.evaluations, self.task, self.indicator, self.e_g, self.d1, self.mean_w)


@dataclass
class RunResult:
    problem: str
    config: dict
    seed: int
    indicator: str
    trace: list[TraceRow] = field(default_factory=list)
    archive_objectives: list[np.ndarray] = field(default_factory=list)
    archive_genotypes: list[np.ndarray] = field(default_factory=list)
    final_indicator: list[float] = field(default_factory=list)
    evaluations: int = 0
    wall_time: float = 0.0
    baseline: bool = False
    final_models: list[dict] = field(default_factory=list)

    def fitting_errors(self, task: int) -> list[float]:
        return [row.e_g for row in self.trace if row.task == task and np.isfinite(row.e_g)]

    def average_errors(self) -> list[float]:
        return [
            average_error(errs) if (errs := self.fitting_errors(t + 1)) else float("nan")
            for t in range(len(self.archive_objectives))
        ]

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "seed": self.seed,
            "baseline": self.baseline,
            "indicator": self.indicator,
            "config": self.config,
            "evaluations": self.evaluations,
            "generations": max((r.generation for r in self.trace), default=0),
            "wall_time": self.wall_time,
            "final_indicator": [float(v) for v in self.final_indicator],
            "archive_sizes": [int(a.shape[0]) for a in self.archive_objectives],
        }


def _evaluate(task: TaskDefinition, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.empty((0, task.n_objectives))
    try:
        F = task.evaluate(decode(X, task))
    except Exception as exc:  # noqa: BLE001 - any evaluator fault aborts the run
        raise RunError(f"evaluator of task {task.name!r} failed: {exc}") from exc
    if not np.all(np.isfinite(F)):
        raise RunError(f"evaluator of task {task.name!r} returned non-finite objectives")
    return F


def _first_front(F: np.ndarray) -> np.ndarray:
    return np.flatnonzero(nondominated_levels(F) == 0)


def _indicator_name(config: RunConfig, default: str) -> str:
    return config.indicator or default


def _reference_sets(tasks, count: int) -> list[np.ndarray | None]:
    return [pf_sample(t, count) if t.pf_sampler is not None else None for t in tasks]


def _score(name: str, ref: np.ndarray | None, F: np.ndarray) -> float:
    if ref is None or F.shape[0] == 0:
        return float("nan")
    return INDICATORS[name](ref, F)


def run(problem: MultiTaskProblem, config: RunConfig, indicator: str = "igd") -> RunResult:
    """Optimise both tasks of ``problem`` with distribution-based transfer.

    ``indicator`` ("igd" or "igd+") is used unless the config names one.
    Stops after ``max_generations`` or when the shared evaluation budget is
    exhausted, whichever comes first; the last generation may be partial.
    """
    started = time.perf_counter()
    ind_name = _indicator_name(config, indicator)
    N = config.population_size
    if N > config.max_evaluations:
        raise ConfigurationError("evaluation budget smaller than the initial population")
    rng = np.random.default_rng(config.seed)
    tasks = problem.tasks
    refs = _reference_sets(tasks, config.ref_points)
    selection_pf = [None, None]
    if config.transfer_strategy in (TransferStrategy.SH, TransferStrategy.MH):
        selection_pf = [pf_sample(t, SELECTION_PF_POINTS) for t in tasks]

    subpops = split_population(initialize_population(problem, N, rng))
    X = [genotype_matrix(sp) for sp in subpops]
    F = [_evaluate(t, x) for t, x in zip(tasks, X)]
    evaluations = N
    n_sub = N // 2
    result = RunResult(problem.name, config.to_dict(), config.seed, ind_name)

    for gen in range(1, config.max_generations + 1):
        remaining = config.max_evaluations - evaluations
        if remaining <= 0:
            break
        models = [fit(x, config.model_kind) for x in X]
        errors = [fitting_error(x, m) for x, m in zip(X, models)]
        if config.transfer_strategy in (TransferStrategy.PD, TransferStrategy.PD1):
            shared = product_argmax(models[0], models[1])
            sources = [shared, shared]
        else:
            sources = [
                knowledge_source(
                    config.transfer_strategy, X[t], X[1 - t], models[t], models[1 - t], rng,
                    other_objectives=F[1 - t], other_pf=selection_pf[1 - t],
                )
                for t in (0, 1)
            ]
        offspring = [generate_offspring(X[t], models[t], sources[t], config, rng) for t in (0, 1)]
        for t in (0, 1):
            children = offspring[t].genotypes[:remaining]
            remaining -= children.shape[0]
            FC = _evaluate(tasks[t], children)
            evaluations += children.shape[0]
            pool_X = np.vstack([X[t], children])
            pool_F = np.vstack([F[t], FC])
            keep, _, _ = select_indices(pool_F, n_sub)
            X[t], F[t] = pool_X[keep], pool_F[keep]
            front = _first_front(F[t])
            result.trace.append(
                TraceRow(
                    gen, evaluations, t + 1, _score(ind_name, refs[t], F[t][front]),
                    errors[t], offspring[t].d1, float(np.mean(offspring[t].weights)),
                )
            )

    for t in (0, 1):
        front = _first_front(F[t])
        result.final_models.append(fit(X[t], config.model_kind).to_dict())
        result.archive_genotypes.append(X[t][front])
        result.archive_objectives.append(F[t][front])
        result.final_indicator.append(_score(ind_name, refs[t], F[t][front]))
    result.evaluations = evaluations
    result.wall_time = time.perf_counter() - started
    return result


def sbx_crossover(p1: np.ndarray, p2: np.ndarray, eta_c: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover on the unit box; each variable crosses with probability 0.5."""
    u = rng.random(p1.shape)
    swap = rng.random(p1.shape) < 0.5
    beta = np.where(u <= 0.5, (2.0 * u) ** (1.0 / (eta_c + 1.0)), (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_c + 1.0)))
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    c1 = np.where(swap, c1, p1)
    c2 = np.where(swap, c2, p2)
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def _tournament(rank: np.ndarray, crowd: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.integers(rank.size, size=count)
    b = rng.integers(rank.size, size=count)
    a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] >= crowd[b]))
    return np.where(a_wins, a, b)


def single_task_baseline(
    task: TaskDefinition,
    config: RunConfig,
    indicator: str = "igd",
    task_index: int = 1,
    name: str | None = None,
) -> RunResult:
    """Plain NSGA-II on one task with half the population and half the budget."""
    started = time.perf_counter()
    ind_name = _indicator_name(config, indicator)
    rng = np.random.default_rng(config.seed)
    n_sub = config.population_size // 2
    budget = config.max_evaluations // 2
    if n_sub > budget:
        raise ConfigurationError("evaluation budget smaller than the initial population")
    ref = _reference_sets([task], config.ref_points)[0]
    result = RunResult(name or task.name, config.to_dict(), config.seed, ind_name, baseline=True)

    X = rng.random((n_sub, task.native_dim))
    F = _evaluate(task, X)
    evaluations = n_sub
    keep, rank, crowd = select_indices(F, n_sub)
    X, F = X[keep], F[keep]

    for gen in range(1, config.max_generations + 1):
        remaining = budget - evaluations
        if remaining <= 0:
            break
        mates = _tournament(rank, crowd, 2 * ((n_sub + 1) // 2), rng)
        p1, p2 = X[mates[0::2]], X[mates[1::2]]
        c1, c2 = sbx_crossover(p1, p2, config.crossover_index, rng)
        cross = rng.random(p1.shape[0]) < config.crossover_probability
        c1 = np.where(cross[:, None], c1, p1)
        c2 = np.where(cross[:, None], c2, p2)
        children = np.vstack([c1, c2])[:n_sub]
        children = polynomial_mutation(children, config.mutation_probability, config.mutation_index, rng)
        children = children[:remaining]
        FC = _evaluate(task, children)
        evaluations += children.shape[0]
        pool_X, pool_F = np.vstack([X, children]), np.vstack([F, FC])
        keep, rank, crowd = select_indices(pool_F, n_sub)
        X, F = pool_X[keep], pool_F[keep]
        front = _first_front(F)
        result.trace.append(
            TraceRow(gen, evaluations, task_index, _score(ind_name, ref, F[front]), float("nan"), float("nan"), float("nan"))
        )

    front = _first_front(F)
    result.archive_genotypes.append(X[front])
    result.archive_objectives.append(F[front])
    result.final_indicator.append(_score(ind_name, ref, F[front]))
    result.evaluations = evaluations
    result.wall_time = time.perf_counter() - started
    return result

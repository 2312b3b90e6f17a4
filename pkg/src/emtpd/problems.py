"""Benchmark problems: MaF members, the decision-space shift, the six
two-task many-objective compositions, a controllable toy pair and a
plug-in registry.

All MaF members use ``D = n + K - 1`` variables in ``[0, 1]`` with ``K = 10``
distance variables; the first ``n - 1`` variables position a point on the
front and the rest control convergence.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import partial

import numpy as np

from .core import ConfigurationError, MultiTaskProblem, TaskDefinition

DISTANCE_VARS = 10
SHIFT = 0.05
TOY_DIM = 10


class UnsupportedTaskError(ValueError):
    """Raised when a task has no analytic Pareto-front sampler."""


def _sphere(pos: np.ndarray) -> np.ndarray:
    """Map ``(N, M-1)`` position variables to the positive unit sphere."""
    n = pos.shape[0]
    ones = np.ones((n, 1))
    cosines = np.cumprod(np.hstack([ones, np.cos(pos * np.pi / 2)]), axis=1)[:, ::-1]
    sines = np.hstack([ones, np.sin(pos[:, ::-1] * np.pi / 2)])
    return cosines * sines


def _linear(pos: np.ndarray) -> np.ndarray:
    """Map position variables to the unit simplex."""
    n = pos.shape[0]
    ones = np.ones((n, 1))
    prods = np.cumprod(np.hstack([ones, pos]), axis=1)[:, ::-1]
    return prods * np.hstack([ones, 1.0 - pos[:, ::-1]])


def _rastrigin_g(xm: np.ndarray) -> np.ndarray:
    k = xm.shape[1]
    return 100.0 * (k + ((xm - 0.5) ** 2 - np.cos(20.0 * np.pi * (xm - 0.5))).sum(axis=1))


def maf1(X: np.ndarray, n: int) -> np.ndarray:
    """Inverted linear front: sum of objectives is ``(n - 1)(1 + g)``."""
    g = ((X[:, n - 1 :] - 0.5) ** 2).sum(axis=1)
    return (1.0 + g)[:, None] * (1.0 - _linear(X[:, : n - 1]))


def maf3(X: np.ndarray, n: int) -> np.ndarray:
    """Convex front with a multimodal distance function."""
    g = _rastrigin_g(X[:, n - 1 :])
    f = (1.0 + g)[:, None] * _sphere(X[:, : n - 1])
    return np.hstack([f[:, : n - 1] ** 4, f[:, n - 1 :] ** 2])


def maf4(X: np.ndarray, n: int) -> np.ndarray:
    """Inverted, badly scaled concave front (objective i scaled by 2^i)."""
    g = _rastrigin_g(X[:, n - 1 :])
    f = (1.0 + g)[:, None] * (1.0 - _sphere(X[:, : n - 1]))
    return f * 2.0 ** np.arange(1, n + 1)


def maf5(X: np.ndarray, n: int) -> np.ndarray:
    """Concave, badly scaled front with strongly biased position variables."""
    pos = X[:, : n - 1] ** 100
    g = ((X[:, n - 1 :] - 0.5) ** 2).sum(axis=1)
    f = (1.0 + g)[:, None] * _sphere(pos)
    return f * 2.0 ** np.arange(n, 0, -1)


def maf6(X: np.ndarray, n: int, manifold_dim: int = 2) -> np.ndarray:
    """Degenerate front: a ``manifold_dim - 1`` dimensional arc on the unit sphere."""
    X = X.copy()
    g = ((X[:, n - 1 :] - 0.5) ** 2).sum(axis=1)
    tmp = g[:, None]
    X[:, manifold_dim - 1 : n - 1] = (1.0 + 2.0 * tmp * X[:, manifold_dim - 1 : n - 1]) / (2.0 + 2.0 * tmp)
    return (1.0 + 100.0 * g)[:, None] * _sphere(X[:, : n - 1])


MAF_FUNCTIONS: dict[str, Callable[[np.ndarray, int], np.ndarray]] = {
    "MaF1": maf1,
    "MaF3": maf3,
    "MaF4": maf4,
    "MaF5": maf5,
    "MaF6": maf6,
}


def _positive_sphere(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    z = np.abs(rng.standard_normal((count, n)))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _maf_front(which: str, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if count == 0:
        return np.empty((0, n))
    if which == "MaF1":
        return 1.0 - rng.dirichlet(np.ones(n), size=count)
    if which == "MaF3":
        y = _positive_sphere(count, n, rng)
        return np.hstack([y[:, : n - 1] ** 4, y[:, n - 1 :] ** 2])
    if which == "MaF4":
        return (1.0 - _positive_sphere(count, n, rng)) * 2.0 ** np.arange(1, n + 1)
    if which == "MaF5":
        return _positive_sphere(count, n, rng) * 2.0 ** np.arange(n, 0, -1)
    # MaF6: evenly spaced along the one-dimensional arc
    pos = np.full((count, n - 1), 0.5)
    if n > 1:
        pos[:, 0] = np.linspace(0.0, 1.0, count)
    return _sphere(pos)


def maf_native_dim(n: int) -> int:
    return n + DISTANCE_VARS - 1


def maf_evaluate(which: str, x: np.ndarray, n: int) -> np.ndarray:
    """Objective vector(s) of MaF member ``which`` with ``n`` objectives."""
    if which not in MAF_FUNCTIONS:
        raise ConfigurationError(f"unknown MaF function {which!r}; expected one of {sorted(MAF_FUNCTIONS)}")
    if n < 2:
        raise ConfigurationError("MaF functions need at least 2 objectives")
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    if X.shape[1] != maf_native_dim(n):
        raise ConfigurationError(f"{which} with n={n} expects {maf_native_dim(n)} variables, got {X.shape[1]}")
    out = MAF_FUNCTIONS[which](X, n)
    return out[0] if x.ndim == 1 else out


def maf_task(which: str, n: int) -> TaskDefinition:
    if which not in MAF_FUNCTIONS:
        raise ConfigurationError(f"unknown MaF function {which!r}")
    if n < 2:
        raise ConfigurationError("MaF functions need at least 2 objectives")
    d = maf_native_dim(n)
    return TaskDefinition(
        native_dim=d,
        n_objectives=n,
        lower_bounds=np.zeros(d),
        upper_bounds=np.ones(d),
        evaluator=partial(MAF_FUNCTIONS[which], n=n),
        pf_sampler=lambda count, rng: _maf_front(which, n, count, rng),
        name=which,
    )


def shift_wrapper(base: TaskDefinition, r: float = SHIFT) -> TaskDefinition:
    """Evaluate ``base`` at ``z = p - r`` clamped into the base domain.

    The optimal set moves by ``+r`` per coordinate; the front itself is
    unchanged, so the base sampler is reused.
    """
    width = float(np.min(base.upper_bounds - base.lower_bounds))
    if not 0 <= r < width:
        raise ConfigurationError(f"shift {r} must lie in [0, {width})")

    def shifted(X: np.ndarray) -> np.ndarray:
        return base.evaluator(np.clip(X - r, base.lower_bounds, base.upper_bounds))

    return TaskDefinition(
        native_dim=base.native_dim,
        n_objectives=base.n_objectives,
        lower_bounds=base.lower_bounds,
        upper_bounds=base.upper_bounds,
        evaluator=shifted,
        pf_sampler=base.pf_sampler,
        name=f"{base.name}*" if r else base.name,
    )


MTMAOP_COMPOSITION: dict[str, tuple[tuple[str, bool], tuple[str, bool], str]] = {
    "MaF-HS1": (("MaF3", False), ("MaF4", False), "HS"),
    "MaF-HS2": (("MaF4", False), ("MaF6", False), "HS"),
    "MaF-MS1": (("MaF1", False), ("MaF5", True), "MS"),
    "MaF-MS2": (("MaF5", False), ("MaF6", True), "MS"),
    "MaF-LS1": (("MaF4", False), ("MaF5", False), "LS"),
    "MaF-LS2": (("MaF3", False), ("MaF6", False), "LS"),
}

# n -> (N, G, FEs)
MTMAOP_SETTINGS: dict[int, tuple[int, int, int]] = {
    10: (230, 300, 69_000),
    20: (420, 300, 126_000),
    30: (466, 300, 139_500),  # tabulated N=465 is odd; the split needs an even size
}


def build_mtmaop(name: str, n: int) -> MultiTaskProblem:
    if name not in MTMAOP_COMPOSITION:
        raise ConfigurationError(f"unknown MTMaOP {name!r}; expected one of {sorted(MTMAOP_COMPOSITION)}")
    tasks = []
    for which, shifted in MTMAOP_COMPOSITION[name][:2]:
        task = maf_task(which, n)
        tasks.append(shift_wrapper(task, SHIFT) if shifted else task)
    return MultiTaskProblem(tasks[0], tasks[1], name=name)


def pf_sample(task: TaskDefinition, count: int, seed: int = 0) -> np.ndarray:
    """``count`` Pareto-front points of ``task``; deterministic in ``seed``."""
    if task.pf_sampler is None:
        raise UnsupportedTaskError(f"task {task.name!r} has no Pareto-front sampler")
    if count < 0:
        raise ValueError("count must be nonnegative")
    return np.asarray(task.pf_sampler(count, np.random.default_rng(seed)), dtype=float).reshape(count, task.n_objectives)


def _toy_objectives(X: np.ndarray, centre: float) -> np.ndarray:
    g = ((X[:, 1:] - centre) ** 2).sum(axis=1)
    theta = X[:, 0] * np.pi / 2
    return (1.0 + g)[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])


def _toy_front(count: int, rng: np.random.Generator) -> np.ndarray:
    if count == 0:
        return np.empty((0, 2))
    return _positive_sphere(count, 2, rng)


def toy_task(centre: float, dim: int = TOY_DIM, name: str = "toy") -> TaskDefinition:
    """Bi-objective quarter-circle front; optimal distance variables equal ``centre``."""
    return TaskDefinition(
        native_dim=dim,
        n_objectives=2,
        lower_bounds=np.zeros(dim),
        upper_bounds=np.ones(dim),
        evaluator=partial(_toy_objectives, centre=centre),
        pf_sampler=_toy_front,
        name=name,
    )


def toy_problem(offset: float, dim: int = TOY_DIM) -> MultiTaskProblem:
    """Two sphere-distance tasks whose optimal distance variables sit at
    ``0.5 -/+ offset/2``, i.e. ``offset`` apart in every distance coordinate."""
    if not 0.0 <= offset <= 1.0:
        raise ConfigurationError("offset must lie in [0, 1]")
    t1 = toy_task(0.5 - offset / 2, dim, name="toy-a")
    t2 = toy_task(0.5 + offset / 2, dim, name="toy-b")
    return MultiTaskProblem(t1, t2, name=f"toy-{offset:g}")


@dataclass(frozen=True)
class ProblemSpec:
    """Registry entry. ``builder(n_objectives)`` returns the two-task problem."""

    name: str
    builder: Callable[[int], MultiTaskProblem]
    similarity_class: str
    indicator: str = "igd+"
    default_objectives: int = 10


REGISTRY: dict[str, ProblemSpec] = {}


def register(spec: ProblemSpec, *, replace: bool = False) -> None:
    """Add a problem to the registry (plug-ins such as external MTMOP suites use this)."""
    if spec.similarity_class not in ("HS", "MS", "LS"):
        raise ConfigurationError("similarity_class must be HS, MS or LS")
    if spec.name in REGISTRY and not replace:
        raise ConfigurationError(f"problem {spec.name!r} already registered")
    REGISTRY[spec.name] = spec


def get_problem(name: str, n_objectives: int | None = None) -> MultiTaskProblem:
    spec = get_spec(name)
    return spec.builder(spec.default_objectives if n_objectives is None else n_objectives)


def get_spec(name: str) -> ProblemSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigurationError(f"unknown problem {name!r}; expected one of: {', '.join(sorted(REGISTRY))}") from None


for _name, (_, _, _cls) in MTMAOP_COMPOSITION.items():
    register(ProblemSpec(_name, partial(build_mtmaop, _name), _cls, indicator="igd+", default_objectives=10))



def _toy_builder(offset: float, n: int) -> MultiTaskProblem:
    if n != 2:
        raise ConfigurationError("toy problems are bi-objective")
    return toy_problem(offset)


register(ProblemSpec("toy-HS", partial(_toy_builder, 0.0), "HS", indicator="igd", default_objectives=2))
register(ProblemSpec("toy-MS", partial(_toy_builder, 0.4), "MS", indicator="igd", default_objectives=2))
register(ProblemSpec("toy-LS", partial(_toy_builder, 0.8), "LS", indicator="igd", default_objectives=2))

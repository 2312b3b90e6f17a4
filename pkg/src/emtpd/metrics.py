"""Quality indicators and the inter-task similarity measure."""

from __future__ import annotations

import warnings
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import MultiTaskProblem, decode
from .sorting import nondominated_levels

_REF_CHUNK = 1024


class IndicatorError(ValueError):
    """Raised when an indicator receives an empty or mismatched set."""


@dataclass(frozen=True)
class ReferenceSet:
    points: np.ndarray
    source: str = "analytic-PF"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise IndicatorError("reference set is empty")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_file(cls, path: str | Path) -> ReferenceSet:
        """Whitespace-separated numbers, one objective vector per line."""
        return cls(np.loadtxt(path, dtype=float, ndmin=2), source="file")

    def __len__(self) -> int:
        return self.points.shape[0]


def _pair(refset: ReferenceSet | np.ndarray, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Z = refset.points if isinstance(refset, ReferenceSet) else np.atleast_2d(np.asarray(refset, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise IndicatorError("solution set is empty")
    if Z.size == 0:
        raise IndicatorError("reference set is empty")
    if Z.shape[1] != A.shape[1]:
        raise IndicatorError(f"dimension mismatch: reference {Z.shape[1]} vs solutions {A.shape[1]}")
    return Z, A


def _mean_min_distance(Z: np.ndarray, A: np.ndarray, one_sided: bool) -> float:
    mins = np.empty(Z.shape[0])
    for start in range(0, Z.shape[0], _REF_CHUNK):
        diff = A[None, :, :] - Z[start : start + _REF_CHUNK, None, :]
        if one_sided:
            diff = np.maximum(diff, 0.0)
        mins[start : start + _REF_CHUNK] = np.sqrt((diff * diff).sum(axis=2).min(axis=1))
    return float(mins.sum() / Z.shape[0])


def igd(refset: ReferenceSet | np.ndarray, A: np.ndarray) -> float:
    """Mean distance from each reference point to its nearest solution."""
    return _mean_min_distance(*_pair(refset, A), one_sided=False)


def igd_plus(refset: ReferenceSet | np.ndarray, A: np.ndarray) -> float:
    """IGD with the dominance-aware distance ``sqrt(sum(max(a - z, 0)^2))``.

    A solution that weakly dominates a reference point is at distance 0 from it.
    """
    return _mean_min_distance(*_pair(refset, A), one_sided=True)


INDICATORS: dict[str, Callable[[ReferenceSet | np.ndarray, np.ndarray], float]] = {
    "igd": igd,
    "igd+": igd_plus,
}


def rank_by_levels(F: np.ndarray) -> np.ndarray:
    """Ordinal rank of each row: non-domination level first, then the sum of
    min-max normalised objectives, then row index."""
    F = np.asarray(F, dtype=float)
    levels = nondominated_levels(F)
    lo, hi = F.min(axis=0), F.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    score = ((F - lo) / span).sum(axis=1)
    order = np.lexsort((np.arange(F.shape[0]), score, levels))
    ranks = np.empty(F.shape[0], dtype=np.int64)
    ranks[order] = np.arange(F.shape[0])
    return ranks


def similarity(
    problem: MultiTaskProblem,
    K: int,
    rng: np.random.Generator,
    rank_rule: Callable[[np.ndarray], np.ndarray] = rank_by_levels,
) -> float:
    """Pearson correlation of the two tasks' rankings of K random genotypes."""
    if K < 10:
        raise ValueError("similarity needs at least 10 samples")
    X = rng.random((K, problem.unified_dim))
    r1 = rank_rule(problem.task1.evaluate(decode(X, problem.task1))).astype(float)
    r2 = rank_rule(problem.task2.evaluate(decode(X, problem.task2))).astype(float)
    cov = np.mean((r1 - r1.mean()) * (r2 - r2.mean()))
    return float(cov / (r1.std() * r2.std()))


def classify_similarity(sim: float) -> str:
    """Band label: LS for (0, 1/3], MS for (1/3, 2/3], HS for (2/3, 1].

    Nonpositive values fall outside every band; they are labelled LS with a warning.
    """
    if sim <= 0:
        warnings.warn(f"similarity {sim} is not positive; labelling LS", RuntimeWarning, stacklevel=2)
        return "LS"
    if sim <= 1 / 3:
        return "LS"
    if sim <= 2 / 3:
        return "MS"
    return "HS"

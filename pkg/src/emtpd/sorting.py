"""Non-dominated sorting, crowding distance and NSGA-II style survival."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .core import DataError, Individual, objective_matrix

_CHUNK = 512


def _as_objectives(pop: Sequence[Individual] | np.ndarray) -> np.ndarray:
    if isinstance(pop, np.ndarray):
        F = np.asarray(pop, dtype=float)
        if F.ndim != 2:
            raise DataError("objective matrix must be two-dimensional")
        return F
    lengths = {len(ind.objectives) for ind in pop if ind.objectives is not None}
    if len(lengths) > 1:
        raise DataError("mixed objective lengths")
    return objective_matrix(pop) if len(pop) else np.empty((0, 0))


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """Pareto dominance for minimisation."""
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_levels(F: np.ndarray) -> np.ndarray:
    """Front index (0-based) of every row of ``F``.

    The dominance relation is stored as a packed bit matrix, so this scales to
    a few times 10^4 points.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    levels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return levels
    packed = np.empty((n, (n + 7) // 8), dtype=np.uint8)
    dominated_count = np.zeros(n, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        block = F[start : start + _CHUNK, None, :]
        le = np.all(block <= F[None, :, :], axis=2)
        lt = np.any(block < F[None, :, :], axis=2)
        dom = le & lt  # dom[i, j]: row i dominates row j
        dominated_count += dom.sum(axis=0)
        packed[start : start + _CHUNK] = np.packbits(dom, axis=1)
    front = np.flatnonzero(dominated_count == 0)
    level = 0
    while front.size:
        levels[front] = level
        dominated_count[front] = -1
        released = np.unpackbits(packed[front], axis=1, count=n).sum(axis=0, dtype=np.int64)
        dominated_count -= released
        front = np.flatnonzero(dominated_count == 0)
        level += 1
    return levels


def fast_nondominated_sort(pop: Sequence[Individual] | np.ndarray) -> list[list[int]]:
    """Partition indices into successive non-dominated fronts."""
    F = _as_objectives(pop)
    levels = nondominated_levels(F)
    if levels.size == 0:
        return []
    return [np.flatnonzero(levels == k).tolist() for k in range(levels.max() + 1)]


def crowding_distance(front: Sequence[Individual] | np.ndarray) -> np.ndarray:
    """Crowding distance with boundary points at +inf.

    Objectives with zero range within the front add nothing to interior points.
    """
    F = _as_objectives(front)
    n, m = F.shape
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        col = F[order, k]
        span = col[-1] - col[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def select_indices(F: np.ndarray, n_keep: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices of the ``n_keep`` survivors of the pool ``F``.

    Fronts fill in ascending order; the last admitted front is truncated by
    descending crowding distance with ties kept in pool order. Returns
    ``(indices, rank, crowding)`` for the survivors.
    """
    F = np.asarray(F, dtype=float)
    levels = nondominated_levels(F)
    crowd = np.zeros(F.shape[0])
    chosen: list[np.ndarray] = []
    taken = 0
    for k in range(levels.max() + 1 if levels.size else 0):
        members = np.flatnonzero(levels == k)
        cd = crowding_distance(F[members])
        crowd[members] = cd
        if taken + members.size <= n_keep:
            chosen.append(members)
            taken += members.size
        else:
            order = np.argsort(-cd, kind="stable")
            chosen.append(members[order[: n_keep - taken]])
            taken = n_keep
        if taken == n_keep:
            break
    idx = np.concatenate(chosen) if chosen else np.empty(0, dtype=np.int64)
    return idx, levels[idx], crowd[idx]


def environmental_selection(
    parents: Sequence[Individual],
    offspring: Sequence[Individual],
    N_sub: int,
) -> list[Individual]:
    """(mu + lambda) truncation of ``parents + offspring`` down to ``N_sub``."""
    pool = list(parents) + list(offspring)
    idx, rank, crowd = select_indices(_as_objectives(pool), N_sub)
    survivors = []
    for i, r, c in zip(idx, rank, crowd):
        ind = pool[i]
        ind.rank = int(r)
        ind.crowding = float(c)
        survivors.append(ind)
    return survivors

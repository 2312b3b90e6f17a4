"""Two-stage adaptive knowledge transfer and offspring generation.

Stage one moves each parent toward the cross-task knowledge point by an
adaptive fraction ``w = d2 / (d1 + d2)``. Stage two adds isotropic Gaussian
noise whose scale grows with ``d1 + d2``. Offspring are then polynomially
mutated and clamped to the unit box.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from .core import ConfigurationError, Individual, RunConfig, TransferStrategy, genotype_matrix, objective_matrix
from .probmodel import FittedModel, product_argmax


def distances(m: np.ndarray, mp: np.ndarray, p: np.ndarray) -> tuple[float, float]:
    m, mp, p = (np.asarray(v, dtype=float) for v in (m, mp, p))
    if not (m.shape == mp.shape == p.shape):
        raise ValueError(f"length mismatch: {m.shape}, {mp.shape}, {p.shape}")
    return float(np.linalg.norm(m - mp)), float(np.linalg.norm(m - p))


def adaptive_weight(d1: float | np.ndarray, d2: float | np.ndarray) -> float | np.ndarray:
    """``d2 / (d1 + d2)``, with 0.5 when both distances vanish."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if np.any(d1 < 0) or np.any(d2 < 0):
        raise ValueError("distances must be nonnegative")
    total = d1 + d2
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(total > 0, d2 / total, 0.5)
    return float(w) if w.ndim == 0 else w


def stage_one(p: np.ndarray, mp: np.ndarray, w: float | np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if p.ndim == 2 and w.ndim == 1:
        w = w[:, None]
    return p + w * (np.asarray(mp, dtype=float) - p)


def stage_two(
    p_prime: np.ndarray,
    d1: float,
    d2: float | np.ndarray,
    F: float,
    D: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Add ``F * (d1 + d2) / D`` scaled standard normal noise, then clamp."""
    if F <= 0 or D < 1:
        raise ValueError("F must be positive and D at least 1")
    p_prime = np.asarray(p_prime, dtype=float)
    magnitude = F * (d1 + np.asarray(d2, dtype=float)) / D
    if p_prime.ndim == 2 and magnitude.ndim == 1:
        magnitude = magnitude[:, None]
    q = rng.standard_normal(p_prime.shape)
    return np.clip(p_prime + magnitude * q, 0.0, 1.0)


def polynomial_mutation(c: np.ndarray, p_m: float, eta_m: float, rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation on the unit box.

    Each coordinate mutates independently with probability ``p_m``. Works on
    a single vector or a matrix of row vectors.
    """
    y = np.array(c, dtype=float, copy=True)
    mask = rng.random(y.shape) < p_m
    r = rng.random(y.shape)
    if not mask.any():
        return y
    mut_pow = 1.0 / (eta_m + 1.0)
    delta1 = y  # (y - 0) / (1 - 0)
    delta2 = 1.0 - y
    low = r < 0.5
    with np.errstate(invalid="ignore"):
        val_low = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - delta1) ** (eta_m + 1.0)
        val_high = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - delta2) ** (eta_m + 1.0)
        deltaq = np.where(low, val_low**mut_pow - 1.0, 1.0 - val_high**mut_pow)
    y = np.where(mask, y + deltaq, y)
    return np.clip(y, 0.0, 1.0)


def _closest_to_front(F: np.ndarray, pf: np.ndarray, count: int) -> np.ndarray:
    d = np.full(F.shape[0], np.inf)
    for start in range(0, pf.shape[0], 2048):
        chunk = pf[start : start + 2048]
        dist = np.sqrt(((F[:, None, :] - chunk[None, :, :]) ** 2).sum(axis=-1)).min(axis=1)
        d = np.minimum(d, dist)
    return np.argsort(d, kind="stable")[:count]


def knowledge_source(
    strategy: TransferStrategy | str,
    own_subpop: Sequence[Individual] | np.ndarray,
    other_subpop: Sequence[Individual] | np.ndarray,
    own_model: FittedModel | None,
    other_model: FittedModel | None,
    rng: np.random.Generator,
    *,
    other_objectives: np.ndarray | None = None,
    other_pf: np.ndarray | None = None,
) -> np.ndarray:
    """Knowledge point a task's parents are pulled toward.

    PD and PD-1 use the product argmax of the two models. SR/MR draw one or
    three random genotypes from the other task (MR averages them). SH/MH use
    the other task's one or three individuals closest to its Pareto front
    reference set ``other_pf`` (MH averages them).
    """
    strategy = TransferStrategy.parse(strategy)
    if strategy in (TransferStrategy.PD, TransferStrategy.PD1):
        return product_argmax(own_model, other_model)
    other = genotype_matrix(other_subpop)
    n = other.shape[0]
    if strategy is TransferStrategy.SR:
        return other[rng.integers(n)].copy()
    if strategy is TransferStrategy.MR:
        idx = rng.choice(n, size=min(3, n), replace=False)
        return other[idx].mean(axis=0)
    if other_pf is None:
        raise ConfigurationError(f"strategy {strategy.value} needs a Pareto-front reference set")
    F = other_objectives if other_objectives is not None else objective_matrix(other_subpop)
    count = 1 if strategy is TransferStrategy.SH else min(3, n)
    return other[_closest_to_front(np.asarray(F, dtype=float), np.asarray(other_pf, dtype=float), count)].mean(axis=0)


class Offspring(NamedTuple):
    genotypes: np.ndarray
    d1: float
    weights: np.ndarray


def generate_offspring(
    subpop: Sequence[Individual] | np.ndarray,
    own_model: FittedModel,
    mp: np.ndarray,
    config: RunConfig,
    rng: np.random.Generator,
) -> Offspring:
    """One offspring per parent through both transfer stages and mutation."""
    X = genotype_matrix(subpop)
    m = own_model.mode_point
    mp = np.asarray(mp, dtype=float)
    d1 = float(np.linalg.norm(m - mp))
    d2 = np.linalg.norm(X - m, axis=1)
    w = adaptive_weight(np.full_like(d2, d1), d2)
    children = stage_one(X, mp, w)
    if config.transfer_strategy is not TransferStrategy.PD1:
        children = stage_two(children, d1, d2, config.scale_factor, X.shape[1], rng)
    children = polynomial_mutation(np.clip(children, 0.0, 1.0), config.mutation_probability, config.mutation_index, rng)
    return Offspring(np.clip(children, 0.0, 1.0), d1, np.atleast_1d(w))

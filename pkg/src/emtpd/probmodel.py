"""Per-dimension maximum-likelihood models of a subpopulation.

Each decision dimension gets its own univariate density fitted to the
subpopulation's coordinates. The fitted models yield a mode point (where
each marginal density peaks on ``[0, 1]``) and, for a pair of tasks, the
point maximising the product of their marginals.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, digamma, gammaln, polygamma

from .core import DataError, ConfigurationError, Individual, ModelError, ModelKind, genotype_matrix

VARIANCE_FLOOR = 1e-12
CLAMP_EPS = 1e-6
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-9
GRID_POINTS = 10_000
GOLDEN_ITERS = 30
BETA_MAX_CONCENTRATION = 1e6

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

PARAM_NAMES = {
    ModelKind.GAUSSIAN: ("mean", "variance"),
    ModelKind.EXPONENTIAL: ("rate",),
    ModelKind.GAMMA: ("shape", "scale"),
    ModelKind.BETA: ("alpha", "beta"),
}


@dataclass(frozen=True)
class FittedModel:
    """Fitted marginals: ``params[j]`` holds the parameter tuple of dimension j."""

    kind: ModelKind
    params: np.ndarray  # (D, n_params)
    mode_point: np.ndarray  # (D,)

    @property
    def dim(self) -> int:
        return self.params.shape[0]

    def to_dict(self) -> dict:
        names = PARAM_NAMES[self.kind]
        return {
            "kind": self.kind.value,
            "params": [dict(zip(names, map(float, row))) for row in self.params],
            "mode": [float(v) for v in self.mode_point],
        }


def _prepare(samples: np.ndarray, kind: ModelKind) -> np.ndarray:
    if kind is ModelKind.GAUSSIAN:
        return samples
    # log-likelihoods of the bounded-support families diverge at 0 and 1
    return np.clip(samples, CLAMP_EPS, 1.0 - CLAMP_EPS)


def _fit_gamma(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=0)
    var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
    s = np.log(mean) - np.log(x).mean(axis=0)
    s = np.maximum(s, 0.0)
    k = mean**2 / var
    for _ in range(NEWTON_MAX_ITER):
        f = np.log(k) - digamma(k) - s
        fprime = 1.0 / k - polygamma(1, k)
        step = f / fprime
        k_new = k - step
        k_new = np.where(k_new > 0, k_new, k / 2.0)
        done = np.abs(k_new - k) <= NEWTON_TOL * np.maximum(1.0, k)
        k = k_new
        if np.all(done):
            break
    return np.column_stack([k, mean / k])


def _fit_beta(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=0)
    var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
    common = np.clip(mean * (1.0 - mean) / var - 1.0, 1e-3, BETA_MAX_CONCENTRATION)
    a = np.maximum(mean * common, 1e-3)
    b = np.maximum((1.0 - mean) * common, 1e-3)
    log_x = np.log(x).mean(axis=0)
    log_1mx = np.log1p(-x).mean(axis=0)
    for _ in range(NEWTON_MAX_ITER):
        with np.errstate(divide="ignore", invalid="ignore"):
            psi_ab = digamma(a + b)
            g1 = digamma(a) - psi_ab - log_x
            g2 = digamma(b) - psi_ab - log_1mx
            t_ab = polygamma(1, a + b)
            j11 = polygamma(1, a) - t_ab
            j22 = polygamma(1, b) - t_ab
            j12 = -t_ab
            det = j11 * j22 - j12 * j12
            da = (j22 * g1 - j12 * g2) / det
            db = (j11 * g2 - j12 * g1) / det
        # near-constant columns drive the Hessian singular; keep the current estimate there
        stuck = ~(np.isfinite(da) & np.isfinite(db))
        da = np.where(stuck, 0.0, da)
        db = np.where(stuck, 0.0, db)
        scale = np.ones_like(a)
        # halve the step until both parameters stay positive
        for _ in range(60):
            bad = (a - scale * da <= 0) | (b - scale * db <= 0)
            if not bad.any():
                break
            scale = np.where(bad, scale / 2.0, scale)
        a_new = a - scale * da
        b_new = b - scale * db
        done = (np.abs(a_new - a) <= NEWTON_TOL * np.maximum(1.0, a)) & (
            np.abs(b_new - b) <= NEWTON_TOL * np.maximum(1.0, b)
        )
        a, b = a_new, b_new
        if np.all(done):
            break
    return np.column_stack([a, b])


def estimate_params(samples: np.ndarray, kind: ModelKind) -> np.ndarray:
    """MLE parameters per column of ``samples`` (shape ``(N, D)``)."""
    kind = ModelKind.parse(kind)
    x = _prepare(np.asarray(samples, dtype=float), kind)
    if kind is ModelKind.GAUSSIAN:
        return np.column_stack([x.mean(axis=0), np.maximum(x.var(axis=0), VARIANCE_FLOOR)])
    if kind is ModelKind.EXPONENTIAL:
        return (1.0 / x.mean(axis=0))[:, None]
    if kind is ModelKind.GAMMA:
        return _fit_gamma(x)
    return _fit_beta(x)


def log_density(kind: ModelKind, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Log of the fitted density; ``params`` columns broadcast against ``x``."""
    p = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is ModelKind.GAUSSIAN:
            mu, var = p[..., 0], p[..., 1]
            out = -0.5 * np.log(2.0 * np.pi * var) - (x - mu) ** 2 / (2.0 * var)
        elif kind is ModelKind.EXPONENTIAL:
            lam = p[..., 0]
            out = np.log(lam) - lam * x
        elif kind is ModelKind.GAMMA:
            k, theta = p[..., 0], p[..., 1]
            out = (k - 1.0) * np.log(x) - x / theta - gammaln(k) - k * np.log(theta)
            out = np.where((x == 0) & (k == 1.0), -np.log(theta), out)
        else:
            a, b = p[..., 0], p[..., 1]
            out = (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - betaln(a, b)
            out = np.where((x == 0) & (a == 1.0), -betaln(a, b), out)
            out = np.where((x == 1) & (b == 1.0), -betaln(a, b), out)
    return np.where(np.isnan(out), -np.inf, out)


def mode(model_or_kind: FittedModel | ModelKind, params: np.ndarray | None = None) -> np.ndarray:
    """Per-dimension maximiser of the density restricted to ``[0, 1]``."""
    if isinstance(model_or_kind, FittedModel):
        kind, p = model_or_kind.kind, model_or_kind.params
    else:
        kind, p = ModelKind.parse(model_or_kind), np.atleast_2d(params)
    if kind is ModelKind.GAUSSIAN:
        return np.clip(p[:, 0], 0.0, 1.0)
    if kind is ModelKind.EXPONENTIAL:
        return np.zeros(p.shape[0])
    if kind is ModelKind.GAMMA:
        k, theta = p[:, 0], p[:, 1]
        return np.where(k > 1.0, np.clip((k - 1.0) * theta, 0.0, 1.0), 0.0)
    a, b = p[:, 0], p[:, 1]
    interior = (a > 1.0) & (b > 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = (a - 1.0) / (a + b - 2.0)
    # boundary case: the side with the steeper singularity or non-vanishing density wins
    right = (a > 1.0) & (b <= 1.0) | (a <= 1.0) & (b <= 1.0) & (a > b)
    return np.where(interior, inner, np.where(right, 1.0, 0.0))


def fit(subpop: Sequence[Individual] | np.ndarray, kind: ModelKind | str) -> FittedModel:
    """Fit one univariate model per dimension by maximum likelihood."""
    kind = ModelKind.parse(kind)
    X = genotype_matrix(subpop)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ModelError("need at least 2 individuals to fit a model")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite genotype coordinates")
    params = estimate_params(X, kind)
    return FittedModel(kind=kind, params=params, mode_point=mode(kind, params))


def density(model: FittedModel, j: int, x: float | np.ndarray) -> float | np.ndarray:
    if not 0 <= j < model.dim:
        raise IndexError(f"dimension {j} out of range for a {model.dim}-dimensional model")
    return np.exp(log_density(model.kind, model.params[j], np.asarray(x, dtype=float)))


def _golden_max(func, lo: np.ndarray, hi: np.ndarray, iters: int) -> np.ndarray:
    a, b = lo.copy(), hi.copy()
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _INV_PHI * (b - a)
        new_d = a + _INV_PHI * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, func(new_c), fd)
        fd_next = np.where(left, fc, func(new_d))
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    return (a + b) / 2.0


def numeric_product_argmax(model1: FittedModel, model2: FittedModel) -> np.ndarray:
    """Grid search plus golden-section refinement of the product of marginals.

    Works for every model kind. Ties on the grid resolve to the smaller x.
    """
    _check_pair(model1, model2)
    kind = model1.kind
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    p1, p2 = model1.params[:, None, :], model2.params[:, None, :]

    def logprod(x):
        x = np.asarray(x)
        with np.errstate(invalid="ignore"):
            if x.ndim == 1:
                return log_density(kind, model1.params, x) + log_density(kind, model2.params, x)
            return log_density(kind, p1, x) + log_density(kind, p2, x)

    vals = logprod(np.broadcast_to(grid, (model1.dim, GRID_POINTS)))
    vals = np.where(np.isnan(vals), -np.inf, vals)
    best = np.argmax(vals, axis=1)
    x_grid = grid[best]
    lo = grid[np.maximum(best - 1, 0)]
    hi = grid[np.minimum(best + 1, GRID_POINTS - 1)]
    x_ref = _golden_max(lambda x: np.nan_to_num(logprod(x), nan=-np.inf), lo, hi, GOLDEN_ITERS)
    better = logprod(x_ref) > vals[np.arange(model1.dim), best]
    return np.where(better, x_ref, x_grid)


def _check_pair(model1: FittedModel, model2: FittedModel) -> None:
    if model1.kind is not model2.kind:
        raise ConfigurationError(f"model kinds differ: {model1.kind.value} vs {model2.kind.value}")
    if model1.dim != model2.dim:
        raise ConfigurationError(f"model dimensions differ: {model1.dim} vs {model2.dim}")


def product_argmax(model1: FittedModel, model2: FittedModel) -> np.ndarray:
    """Point in ``[0, 1]^D`` maximising the product of the two models' marginals."""
    _check_pair(model1, model2)
    if model1.kind is ModelKind.GAUSSIAN:
        mu1, v1 = model1.params[:, 0], model1.params[:, 1]
        mu2, v2 = model2.params[:, 0], model2.params[:, 1]
        return np.clip((mu1 * v2 + mu2 * v1) / (v1 + v2), 0.0, 1.0)
    if model1.kind is ModelKind.EXPONENTIAL:
        return np.zeros(model1.dim)
    return numeric_product_argmax(model1, model2)


def fitting_error(subpop: Sequence[Individual] | np.ndarray, model: FittedModel) -> float:
    """Mean of ``|1 - density|`` over every sample coordinate.

    Densities are unbounded above, so this is not a normalised error.
    """
    X = _prepare(genotype_matrix(subpop), model.kind)
    dens = np.exp(log_density(model.kind, model.params, X))
    return float(np.mean(np.abs(1.0 - dens)))


def average_error(per_generation_errors: Sequence[float]) -> float:
    """Natural log of the mean per-generation fitting error.

    Returns ``-inf`` (with a warning) when any error is nonpositive.
    """
    e = np.asarray(per_generation_errors, dtype=float)
    if e.size == 0:
        raise ValueError("no fitting errors to average")
    if np.any(e <= 0):
        warnings.warn("nonpositive fitting error; average error is -inf", RuntimeWarning, stacklevel=2)
        return float("-inf")
    return float(np.log(e.mean()))

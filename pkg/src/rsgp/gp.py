"""Gaussian-process posterior with a noise regularizer ``lam``.

    mu_t(x)     = k_t(x)^T (K_t + lam I)^{-1} y_t
    k_t(x, x')  = k(x, x') - k_t(x)^T (K_t + lam I)^{-1} k_t(x')

The posterior keeps the lower Cholesky factor of ``K_t + lam I`` so that
single observations can be appended in O(t^2).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

from . import kernels
from .errors import InvalidArgumentError, NumericDegeneracyError
from .kernels import KernelSpec

log = logging.getLogger(__name__)

JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)


def cholesky_jittered(A: np.ndarray, what: str = "matrix") -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``A``, escalating diagonal jitter relative to
    the mean diagonal. Returns ``(L, jitter)``."""
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    scale = float(np.mean(np.abs(np.diag(A))))
    if not np.isfinite(scale):
        raise NumericDegeneracyError(f"{what} has non-finite diagonal")
    scale = scale if scale > 0 else 1.0
    info = 0
    for rel in JITTER_LADDER:
        jitter = rel * scale
        L, info = lapack.dpotrf(A + jitter * np.eye(n), lower=1, clean=1)
        if info == 0:
            if rel > 0:
                log.debug("%s factorized with jitter %.1e", what, jitter)
            return L, jitter
    raise NumericDegeneracyError(
        f"cholesky of {what} ({n}x{n}) failed at pivot {info - 1} "
        f"after jitter escalation up to {JITTER_LADDER[-1]:.0e} x mean diagonal")


@dataclass(frozen=True)
class GpPosterior:
    kernel: KernelSpec
    inputs: np.ndarray  # (t, m)
    targets: np.ndarray  # (t,)
    lam: float
    chol: np.ndarray  # lower factor of K_t + (lam + jitter) I
    alpha: np.ndarray  # (K_t + lam I)^{-1} y
    jitter: float = 0.0

    @property
    def t(self) -> int:
        return self.targets.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def logdet(self) -> float:
        """log det(K_t + lam I) from the stored factor."""
        if self.t == 0:
            return 0.0
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))


def _points(x, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    return arr


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0:
        raise InvalidArgumentError(f"regularizer lambda must be positive, got {lam}")
    return lam


def fit(kernel: KernelSpec, inputs, targets, lam: float) -> GpPosterior:
    lam = _check_lam(lam)
    y = np.asarray(targets, dtype=float).reshape(-1)
    dim = len(kernel.lengthscales) if len(kernel.lengthscales) > 1 else None
    X = _points(inputs, dim) if y.size else np.zeros((0, len(kernel.lengthscales)))
    if X.shape[0] != y.size:
        raise InvalidArgumentError(f"{X.shape[0]} inputs but {y.size} targets")
    if y.size == 0:
        return GpPosterior(kernel, X, y, lam, np.zeros((0, 0)), np.zeros(0))
    K = kernels.gram(kernel, X)
    L, jitter = cholesky_jittered(K + lam * np.eye(y.size), "K + lambda I")
    alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
    return GpPosterior(kernel, X, y, lam, L, alpha, jitter)


def append(post: GpPosterior, x, y: float) -> GpPosterior:
    """Posterior after one more observation, by extending the Cholesky factor."""
    xrow = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
    if post.t and xrow.shape[1] != post.dim:
        raise InvalidArgumentError(f"point dimension {xrow.shape[1]} != {post.dim}")
    X = np.vstack([post.inputs, xrow]) if post.t else xrow
    Y = np.append(post.targets, float(y))
    if post.t == 0:
        return fit(post.kernel, X, Y, post.lam)
    kvec = kernels.cross(post.kernel, post.inputs, xrow)[:, 0]
    kxx = float(kernels.diag(post.kernel, xrow)[0])
    l = solve_triangular(post.chol, kvec, lower=True)
    d2 = kxx + post.lam + post.jitter - float(l @ l)
    if not np.isfinite(d2) or d2 <= 1e-12 * (kxx + post.lam):
        return fit(post.kernel, X, Y, post.lam)
    t = post.t
    L = np.zeros((t + 1, t + 1))
    L[:t, :t] = post.chol
    L[t, :t] = l
    L[t, t] = np.sqrt(d2)
    alpha = solve_triangular(L.T, solve_triangular(L, Y, lower=True), lower=False)
    return GpPosterior(post.kernel, X, Y, post.lam, L, alpha, post.jitter)


def predict_batch(post: GpPosterior, X) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances at the rows of ``X``."""
    X = _points(X, len(post.kernel.lengthscales))
    if post.t and X.shape[1] != post.dim:
        raise InvalidArgumentError(f"query dimension {X.shape[1]} != {post.dim}")
    prior = kernels.diag(post.kernel, X)
    if post.t == 0:
        return np.zeros(X.shape[0]), prior.copy()
    Kx = kernels.cross(post.kernel, X, post.inputs)
    mean = Kx @ post.alpha
    V = solve_triangular(post.chol, Kx.T, lower=True)
    var = prior - np.einsum("ij,ij->j", V, V)
    return mean, np.clip(var, 0.0, prior)


def predict(post: GpPosterior, x) -> tuple[float, float]:
    dim = len(post.kernel.lengthscales)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or (post.t and arr.size != post.dim) or (dim > 1 and arr.size != dim):
        raise InvalidArgumentError(f"expected one point of dimension {post.dim if post.t else dim}")
    mean, var = predict_batch(post, arr.reshape(1, -1))
    return float(mean[0]), float(var[0])


def posterior_cov(post: GpPosterior, X) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean vector and full covariance matrix over the rows of ``X``."""
    X = _points(X, len(post.kernel.lengthscales))
    K = kernels.gram(post.kernel, X)
    if post.t == 0:
        return np.zeros(X.shape[0]), K
    Kx = kernels.cross(post.kernel, X, post.inputs)
    V = solve_triangular(post.chol, Kx.T, lower=True)
    cov = K - V.T @ V
    return Kx @ post.alpha, 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class BetaSchedule:
    """Either the high-probability confidence width (``theoretical``) or a
    constant (``fixed``)."""

    mode: str = "theoretical"
    B: float = 1.0
    R: float = 1.0
    zeta: float = 0.05
    value: float = 2.0

    def __post_init__(self):
        if self.mode not in ("theoretical", "fixed"):
            raise InvalidArgumentError(f"beta mode must be 'theoretical' or 'fixed', got {self.mode!r}")
        if self.mode == "theoretical":
            if not 0.0 < self.zeta < 1.0:
                raise InvalidArgumentError(f"zeta must lie in (0, 1), got {self.zeta}")
            if self.B <= 0 or self.R <= 0:
                raise InvalidArgumentError("B and R must be positive")
        elif self.value < 0:
            raise InvalidArgumentError(f"fixed beta must be nonnegative, got {self.value}")


def beta(schedule: BetaSchedule, post: GpPosterior, lam: float | None = None) -> float:
    """Confidence width for the next round given the observations in ``post``.

    With lam_bar = max(1, lam):
        B + R / sqrt(lam) * sqrt(log det(lam_bar/lam K + lam_bar I) + 2 log(1/zeta))
    """
    if schedule.mode == "fixed":
        return float(schedule.value)
    lam = post.lam if lam is None else _check_lam(lam)
    lam_bar = max(1.0, lam)
    if lam == post.lam:
        logdet = post.t * np.log(lam_bar / lam) + post.logdet()
    else:
        K = kernels.gram(post.kernel, post.inputs) if post.t else np.zeros((0, 0))
        logdet = np.linalg.slogdet(lam_bar / lam * K + lam_bar * np.eye(post.t))[1] if post.t else 0.0
    radicand = logdet + 2.0 * np.log(1.0 / schedule.zeta)
    return float(schedule.B + schedule.R / np.sqrt(lam) * np.sqrt(max(radicand, 0.0)))


@dataclass(frozen=True)
class ConfidenceField:
    lcb: np.ndarray
    ucb: np.ndarray
    beta: float
    t: int
    mean: np.ndarray
    sd: np.ndarray


def _grid_points(grid) -> np.ndarray:
    return np.asarray(getattr(grid, "points", grid), dtype=float)


def confidence_field(post: GpPosterior, grid, beta_t: float) -> ConfidenceField:
    if beta_t < 0:
        raise InvalidArgumentError(f"beta must be nonnegative, got {beta_t}")
    mean, var = predict_batch(post, _grid_points(grid))
    sd = np.sqrt(var)
    return ConfidenceField(mean - beta_t * sd, mean + beta_t * sd, float(beta_t), post.t + 1, mean, sd)


def sample_posterior(post: GpPosterior, grid, rng: np.random.Generator) -> np.ndarray:
    """One joint draw of the posterior over all grid points."""
    X = _grid_points(grid)
    if X.shape[0] == 0:
        raise InvalidArgumentError("cannot sample on an empty grid")
    mean, cov = posterior_cov(post, X)
    L, _ = cholesky_jittered(cov, "posterior covariance")
    return mean + L @ rng.standard_normal(X.shape[0])


def realized_information_gain(post: GpPosterior, lam: float | None = None) -> float:
    """0.5 * log det(I + K_t / lam) on the observed inputs."""
    if post.t == 0:
        return 0.0
    lam = post.lam if lam is None else _check_lam(lam)
    if lam == post.lam:
        value = 0.5 * (post.logdet() - post.t * np.log(lam))
    else:
        K = kernels.gram(post.kernel, post.inputs)
        value = 0.5 * np.linalg.slogdet(np.eye(post.t) + K / lam)[1]
    return float(max(value, 0.0))

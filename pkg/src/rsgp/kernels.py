"""Positive-definite kernels, Gram matrices and the kernel pseudometric.

All kernels are evaluated on inputs rescaled by their lengthscales, so a
single shared lengthscale and per-dimension (ARD) lengthscales use the same
code path. Stationary kernels (RBF, Matern) satisfy ``k(x, x) = variance``.
The dot-product kernels are

    linear:      variance * <x / l, x' / l>
    polynomial:  variance * (<x / l, x' / l> + offset) ** degree
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

KINDS = ("rbf", "matern", "polynomial", "linear")
MATERN_NUS = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    lengthscales: tuple[float, ...] = (1.0,)
    variance: float = 1.0
    nu: float | None = None
    degree: int | None = None
    offset: float = 0.0

    def __post_init__(self):
        kind = str(self.kind).lower()
        object.__setattr__(self, "kind", kind)
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        object.__setattr__(self, "lengthscales", ls)
        if kind not in KINDS:
            raise InvalidArgumentError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if not ls or any(not np.isfinite(v) or v <= 0 for v in ls):
            raise InvalidArgumentError(f"lengthscales must be positive, got {ls}")
        if not np.isfinite(self.variance) or self.variance <= 0:
            raise InvalidArgumentError(f"variance must be positive, got {self.variance}")
        if kind == "matern":
            if self.nu is None or float(self.nu) not in MATERN_NUS:
                raise InvalidArgumentError(
                    f"Matern smoothness must be one of {MATERN_NUS}, got {self.nu}")
        if kind == "polynomial":
            if self.degree is None or int(self.degree) != self.degree or self.degree < 1:
                raise InvalidArgumentError(f"polynomial degree must be a positive integer, got {self.degree}")
            if self.offset < 0:
                raise InvalidArgumentError(f"polynomial offset must be >= 0, got {self.offset}")

    @property
    def stationary(self) -> bool:
        return self.kind in ("rbf", "matern")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "lengthscales": list(self.lengthscales), "variance": self.variance}
        if self.kind == "matern":
            out["nu"] = self.nu
        if self.kind == "polynomial":
            out["degree"] = self.degree
            out["offset"] = self.offset
        return out


def _as_2d(x) -> np.ndarray:
    # a flat sequence is a list of 1-D points
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"expected points as a 2-D array, got shape {arr.shape}")
    return arr


def _scale(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    ls = np.asarray(spec.lengthscales)
    if ls.size == 1:
        return X / ls[0]
    if X.shape[1] != ls.size:
        raise InvalidArgumentError(
            f"point dimension {X.shape[1]} does not match {ls.size} lengthscales")
    return X / ls


def _sqdist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # difference form keeps k(x, x') == k(x', x) bitwise and d(x, x) == 0
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def cross(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(A[i], B[j])``."""
    A = _as_2d(A)
    B = _as_2d(B)
    if A.shape[1] != B.shape[1]:
        raise InvalidArgumentError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    As, Bs = _scale(spec, A), _scale(spec, B)
    v = spec.variance
    if spec.kind == "rbf":
        return v * np.exp(-0.5 * _sqdist(As, Bs))
    if spec.kind == "matern":
        r = np.sqrt(_sqdist(As, Bs))
        if spec.nu == 0.5:
            return v * np.exp(-r)
        if spec.nu == 1.5:
            s = np.sqrt(3.0) * r
            return v * (1.0 + s) * np.exp(-s)
        s = np.sqrt(5.0) * r
        return v * (1.0 + s + s * s / 3.0) * np.exp(-s)
    dot = As @ Bs.T
    if spec.kind == "linear":
        return v * dot
    return v * (dot + spec.offset) ** int(spec.degree)


def diag(spec: KernelSpec, X) -> np.ndarray:
    """``k(x, x)`` for each row of ``X``."""
    X = _as_2d(X)
    if spec.stationary:
        _scale(spec, X)
        return np.full(X.shape[0], spec.variance)
    Xs = _scale(spec, X)
    sq = np.einsum("ij,ij->i", Xs, Xs)
    if spec.kind == "linear":
        return spec.variance * sq
    return spec.variance * (sq + spec.offset) ** int(spec.degree)


def _point(x, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise InvalidArgumentError(f"expected a single point, got shape {arr.shape}")
    if dim > 1 and arr.size != dim:
        raise InvalidArgumentError(f"point has dimension {arr.size}, kernel expects {dim}")
    return arr


def eval_kernel(spec: KernelSpec, x, x2) -> float:
    dim = len(spec.lengthscales)
    a, b = _point(x, dim), _point(x2, dim)
    if a.size != b.size:
        raise InvalidArgumentError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(cross(spec, a[None, :], b[None, :])[0, 0])


def kernel_metric(spec: KernelSpec, x, x2) -> float:
    """d(x, x') = sqrt(k(x,x) - 2 k(x,x') + k(x',x')), radicand clamped at 0."""
    kxx = eval_kernel(spec, x, x)
    kyy = eval_kernel(spec, x2, x2)
    kxy = eval_kernel(spec, x, x2)
    return float(np.sqrt(max(kxx - 2.0 * kxy + kyy, 0.0)))


def metric_matrix(spec: KernelSpec, points) -> np.ndarray:
    """Pairwise kernel-metric distances, exactly symmetric with a zero diagonal."""
    K = gram(spec, points)
    d = np.diag(K)
    D = np.sqrt(np.maximum(d[:, None] - 2.0 * K + d[None, :], 0.0))
    D = np.triu(D, 1)
    return D + D.T


def gram(spec: KernelSpec, points: Sequence) -> np.ndarray:
    """Gram matrix over ``points``; upper triangle computed and mirrored."""
    X = _as_2d(points)
    if X.shape[0] == 0:
        raise InvalidArgumentError("gram matrix needs at least one point")
    K = cross(spec, X, X)
    upper = np.triu(K)
    return upper + np.triu(K, 1).T

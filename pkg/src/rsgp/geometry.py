"""Discretized action spaces and ambiguity balls.

Pairwise distances are precomputed once per grid (O(N^2) memory); every
ball query and every acquisition afterwards is a scan over rows of that
matrix.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import kernels
from .errors import InvalidArgumentError, ResourceLimitError
from .kernels import KernelSpec

METRICS = ("euclidean", "kernel")
DEFAULT_MAX_POINTS = 4096


@dataclass(frozen=True, eq=False)
class ActionGrid:
    points: np.ndarray  # (N, m)
    dist: np.ndarray  # (N, N)
    metric: str = "euclidean"
    kernel: KernelSpec | None = None

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def diameter(self) -> float:
        return float(self.dist.max())


@dataclass(frozen=True)
class AmbiguityBall:
    center: int
    radius: float
    members: np.ndarray


def pairwise_distances(points: np.ndarray, metric: str, kernel: KernelSpec | None = None) -> np.ndarray:
    if metric == "euclidean":
        if points.shape[0] == 1:
            return np.zeros((1, 1))
        return squareform(pdist(points, "euclidean"))
    if metric == "kernel":
        if kernel is None:
            raise InvalidArgumentError("kernel metric requires a kernel spec")
        return kernels.metric_matrix(kernel, points)
    raise InvalidArgumentError(f"unknown metric {metric!r}; expected one of {METRICS}")


def from_points(points, metric: str = "euclidean", kernel: KernelSpec | None = None,
                max_points: int = DEFAULT_MAX_POINTS) -> ActionGrid:
    """Grid over an explicit point list (rows are points)."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P.reshape(-1, 1)
    if P.ndim != 2:
        raise InvalidArgumentError(f"points must be a 2-D array, got shape {P.shape}")
    n = P.shape[0]
    if n < 2:
        raise InvalidArgumentError(f"a grid needs at least 2 points, got {n}")
    if n > max_points:
        raise ResourceLimitError(
            f"{n} grid points exceed the budget of {max_points} "
            f"(distance matrix would need {n * n * 8 / 2**20:.0f} MiB)")
    P.setflags(write=False)
    D = pairwise_distances(P, metric, kernel)
    D.setflags(write=False)
    return ActionGrid(P, D, metric, kernel)


def build_grid(bounds: Sequence[Sequence[float]], resolution, metric: str = "euclidean",
               kernel: KernelSpec | None = None, max_points: int = DEFAULT_MAX_POINTS) -> ActionGrid:
    """Row-major lattice over a box. ``resolution`` is one count for every
    dimension or one count per dimension."""
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim == 1:
        bounds = bounds.reshape(1, 2)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or np.any(bounds[:, 1] <= bounds[:, 0]):
        raise InvalidArgumentError(f"bounds must be [[lo, hi], ...] with lo < hi, got {bounds.tolist()}")
    m = bounds.shape[0]
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (m,))
    if np.any(res < 2):
        raise InvalidArgumentError(f"resolution must be >= 2 per dimension, got {res.tolist()}")
    n = int(np.prod(res))
    if n > max_points:
        per_dim = max(2, int(np.floor(max_points ** (1.0 / m))))
        raise ResourceLimitError(
            f"lattice of {n} points exceeds the budget of {max_points}; "
            f"try resolution {per_dim} per dimension")
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(bounds, res)]
    P = np.array(list(itertools.product(*axes)), dtype=float).reshape(n, m)
    grid = from_points(P, metric, kernel, max_points)
    if metric != "euclidean":
        return grid
    # Distances from integer offsets times the spacing, so that equal lattice
    # distances are bitwise equal and inclusive-ball ties resolve exactly.
    idx = np.array(list(itertools.product(*(range(k) for k in res))), dtype=float).reshape(n, m)
    step = (bounds[:, 1] - bounds[:, 0]) / (res - 1)
    sq = np.zeros((n, n))
    for k in range(m):
        diff = np.subtract.outer(idx[:, k], idx[:, k]) * step[k]
        sq += diff * diff
    D = np.sqrt(sq)
    D.setflags(write=False)
    return ActionGrid(grid.points, D, metric, kernel)


def load_points_csv(path: str | Path) -> np.ndarray:
    """One point per row; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if i == 0:
                    continue
                raise InvalidArgumentError(f"{path}: non-numeric value in row {i + 1}")
    if len({len(r) for r in rows}) > 1:
        raise InvalidArgumentError(f"{path}: rows have inconsistent dimension")
    return np.asarray(rows, dtype=float)


def ball(grid: ActionGrid, center: int, eps: float) -> AmbiguityBall:
    """Indices within distance ``eps`` (inclusive) of ``center``."""
    if not 0 <= center < grid.size:
        raise InvalidArgumentError(f"center {center} outside [0, {grid.size})")
    eps = float(eps)
    if np.isnan(eps) or eps < 0:
        raise InvalidArgumentError(f"ball radius must be >= 0, got {eps}")
    members = np.flatnonzero(grid.dist[center] <= eps)
    return AmbiguityBall(int(center), eps, members)

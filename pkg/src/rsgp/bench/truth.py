"""Ground-truth functions over a grid."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import kernels
from ..errors import ConfigError
from ..geometry import ActionGrid
from ..gp import cholesky_jittered
from ..kernels import KernelSpec
from ..satisficing import ValueField

# Surrogate for the unpublished synthetic function on [0, 10]: a tall narrow
# bump at 3 and a lower, wider one at 5.5. For thresholds between about -16
# and -2 the narrow peak is fragile under a 0.5 perturbation budget, a
# radius-2 ball-minimizer lands between the bumps, and the wide bump's
# centre keeps a critical radius above 0.5.
TWO_BUMPS_DEFAULT = {
    "heights": [60.0, 35.0],
    "centers": [3.0, 5.5],
    "widths": [0.2, 0.8],
    "offset": -30.0,
}
SURROGATES = ("two_bumps",)


def linear(points: np.ndarray, slope: float = 1.0, intercept: float = 0.0) -> np.ndarray:
    """f(x) = slope * sum(x) + intercept; on [0, 1] with defaults, f(x) = x."""
    return slope * points.sum(axis=1) + intercept


def two_arm(points: np.ndarray, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Two actions with values (low, high)."""
    if points.shape[0] != 2:
        raise ConfigError(f"two_arm truth needs a 2-point grid, got {points.shape[0]} points")
    return np.array([low, high], dtype=float)


def two_bumps(points: np.ndarray, heights=None, centers=None, widths=None, offset=None) -> np.ndarray:
    p = TWO_BUMPS_DEFAULT
    heights = np.asarray(p["heights"] if heights is None else heights, dtype=float)
    centers = np.asarray(p["centers"] if centers is None else centers, dtype=float)
    widths = np.asarray(p["widths"] if widths is None else widths, dtype=float)
    offset = p["offset"] if offset is None else float(offset)
    if not heights.shape == widths.shape == centers.shape[:1]:
        raise ConfigError("two_bumps: heights, centers and widths must have matching lengths")
    centers = centers.reshape(len(heights), -1)
    sq = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return offset + (heights * np.exp(-0.5 * sq / widths ** 2)).sum(axis=1)


CLOSED_FORMS = {"linear": linear, "two_arm": two_arm, "two_bumps": two_bumps}


def prior_sample(kernel: KernelSpec, grid: ActionGrid, rng: np.random.Generator) -> np.ndarray:
    """One joint draw from GP(0, k) over the grid."""
    L, _ = cholesky_jittered(kernels.gram(kernel, grid.points), "prior covariance")
    return L @ rng.standard_normal(grid.size)


def closed_form(name: str, grid: ActionGrid, params: dict | None = None) -> np.ndarray:
    try:
        fn = CLOSED_FORMS[name]
    except KeyError:
        raise ConfigError(f"unknown closed-form truth {name!r}; known: {sorted(CLOSED_FORMS)}") from None
    try:
        return np.asarray(fn(grid.points, **(params or {})), dtype=float)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for truth {name!r}: {exc}") from None


def load_values_csv(path, n: int) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            cell = line.split(",")[-1]
            try:
                vals.append(float(cell))
            except ValueError:
                if i == 0:
                    continue
                raise ConfigError(f"{path}: non-numeric truth value on line {i + 1}") from None
    if len(vals) != n:
        raise ConfigError(f"{path}: {len(vals)} truth values for a grid of {n} points")
    return np.asarray(vals)


def make_truth(source: dict, grid: ActionGrid, kernel: KernelSpec,
               rng: np.random.Generator | None = None, base_dir=None) -> ValueField:
    kind = source["source"]
    if kind == "prior_sample":
        if rng is None:
            raise ConfigError("prior_sample truth needs a random stream")
        return ValueField(prior_sample(kernel, grid, rng), "truth")
    if kind == "closed_form":
        return ValueField(closed_form(source["name"], grid, source.get("params")), "truth")
    if kind == "csv":
        path = Path(source["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return ValueField(load_values_csv(path, grid.size), "truth")
    raise ConfigError(f"unknown truth source {kind!r}")

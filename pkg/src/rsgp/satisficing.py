"""Robust-satisficing measures over a value field on a finite grid.

Values are extended reals: IEEE ``+inf``/``-inf`` mark infeasible actions,
so ordering and argmin/argmax stay exact. Ties always resolve to the
smallest index.

For an action ``i`` with value ``f_i`` and threshold ``tau``:

* fragility     ``max_{j: d_ij > 0} (tau - f_j) / d_ij``, clamped at 0,
  and ``+inf`` when ``f_i < tau``;
* p-fragility   the same maximum over violators ``f_j < tau`` of
  ``(tau - f_j) ** (1/p) / d_ij``; 0 when nothing violates;
* critical radius  the largest realized distance ``r`` from ``i`` such that
  every ``j`` with ``d_ij <= r`` has ``f_j >= tau``; ``-inf`` when
  ``f_i < tau``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometryError, InfeasibleConeError, InvalidArgumentError
from .geometry import ActionGrid

FIELD_TAGS = ("truth", "ucb", "lcb", "mean", "sample")


@dataclass(frozen=True)
class ValueField:
    values: np.ndarray
    tag: str = "truth"


@dataclass(frozen=True)
class RobustnessProfile:
    kind: str  # "fragility" or "critical_radius"
    values: np.ndarray
    tau: float
    best_index: int
    best_value: float
    p: float = 1.0

    @property
    def feasible(self) -> bool:
        return bool(np.isfinite(self.best_value))


def argmin_first(v: np.ndarray) -> int:
    """Index of the minimum; the smallest index wins ties."""
    return int(np.argmin(v))


def argmax_first(v: np.ndarray) -> int:
    return int(np.argmax(v))


def _values(field, grid: ActionGrid) -> np.ndarray:
    v = np.asarray(getattr(field, "values", field), dtype=float)
    if v.shape != (grid.size,):
        raise InvalidArgumentError(f"field has shape {v.shape}, grid has {grid.size} points")
    if np.isnan(v).any():
        raise InvalidArgumentError("field contains NaN")
    return v


def _positive_pairs(grid: ActionGrid) -> np.ndarray:
    pos = grid.dist > 0
    lonely = np.flatnonzero(~pos.any(axis=1))
    if lonely.size:
        raise DegenerateGeometryError(
            f"action {lonely[0]} has no neighbour at positive distance")
    return pos


def _fragility_profile(k: np.ndarray, tau: float, p: float) -> RobustnessProfile:
    best = argmin_first(k)
    return RobustnessProfile("fragility", k, float(tau), best, float(k[best]), float(p))


def fragility(field, grid: ActionGrid, tau: float) -> RobustnessProfile:
    v = _values(field, grid)
    pos = _positive_pairs(grid)
    ratio = np.divide((tau - v)[None, :], grid.dist, out=np.full(grid.dist.shape, -np.inf), where=pos)
    k = np.maximum(ratio.max(axis=1), 0.0)
    k[v < tau] = np.inf
    return _fragility_profile(k, tau, 1.0)


def p_fragility(field, grid: ActionGrid, tau: float, p: float) -> RobustnessProfile:
    if not p >= 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    v = _values(field, grid)
    pos = _positive_pairs(grid)
    short = tau - v
    viol = short > 0
    root = np.zeros_like(short)
    # scalar libm pow: numpy's SIMD pow varies by CPU in the last bit
    root[viol] = short[viol] if p == 1 else [math.pow(s, 1.0 / p) for s in short[viol]]
    mask = pos & viol[None, :]
    ratio = np.divide(root[None, :], grid.dist, out=np.full(grid.dist.shape, -np.inf), where=mask)
    k = np.maximum(ratio.max(axis=1), 0.0)
    k[v < tau] = np.inf
    return _fragility_profile(k, tau, p)


def critical_radius(field, grid: ActionGrid, tau: float) -> RobustnessProfile:
    v = _values(field, grid)
    viol = v < tau
    D = grid.dist
    nearest_violator = np.where(viol[None, :], D, np.inf).min(axis=1)
    eps = np.where(D < nearest_violator[:, None], D, -np.inf).max(axis=1)
    eps[viol] = -np.inf
    best = argmax_first(eps)
    return RobustnessProfile("critical_radius", eps, float(tau), best, float(eps[best]), np.inf)


def fragility_cone(profile: RobustnessProfile, grid: ActionGrid, action: int | None = None) -> np.ndarray:
    """Reward guarantee ``tau - (kappa * d(action, x_j)) ** p`` over the grid,
    where ``kappa`` is the profile's value at ``action`` (its best action by
    default)."""
    if profile.kind != "fragility":
        raise InvalidArgumentError("cones are defined for fragility profiles only")
    action = profile.best_index if action is None else int(action)
    kappa = float(profile.values[action])
    if not np.isfinite(kappa):
        raise InfeasibleConeError(f"action {action} has infinite fragility; no cone exists")
    return profile.tau - (kappa * grid.dist[action]) ** profile.p


def ball_min(field, grid: ActionGrid, r: float) -> np.ndarray:
    """For each action, the smallest value inside its radius-``r`` ball."""
    v = _values(field, grid)
    if not r >= 0:
        raise InvalidArgumentError(f"radius must be >= 0, got {r}")
    return np.where(grid.dist <= r, v[None, :], np.inf).min(axis=1)


@dataclass(frozen=True)
class RsBenchmark:
    tau: float
    p: float
    feasible: bool  # tau <= max f
    kappa: float  # RS-1 optimum
    x_rs1: int
    kappa_p: float  # RS-G optimum at p
    x_rsg: int
    eps_tau: float  # RS-2 optimum
    x_rs2: int


def rs_benchmark(truth, grid: ActionGrid, tau: float, p: float = 2.0) -> RsBenchmark:
    """Ground-truth robust-satisficing constants. An unattainable ``tau`` is
    reported through ``feasible=False`` with infinite constants."""
    v = _values(truth, grid)
    frag = fragility(v, grid, tau)
    pfrag = p_fragility(v, grid, tau, p)
    crit = critical_radius(v, grid, tau)
    return RsBenchmark(
        tau=float(tau), p=float(p), feasible=bool(tau <= v.max()),
        kappa=frag.best_value, x_rs1=frag.best_index,
        kappa_p=pfrag.best_value, x_rsg=pfrag.best_index,
        eps_tau=crit.best_value, x_rs2=crit.best_index,
    )


def budget_within_radius(eps_values, eps_tau: float) -> bool:
    """Whether every budget stays within the best critical radius."""
    return bool(np.all(np.asarray(eps_values, dtype=float) <= eps_tau))


def export_profile_csv(profile: RobustnessProfile, grid: ActionGrid, path: str | Path) -> None:
    coords = [f"x{k}" for k in range(grid.dim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", *coords, profile.kind])
        for i in range(grid.size):
            w.writerow([i, *map(repr, grid.points[i].tolist()), repr(float(profile.values[i]))])

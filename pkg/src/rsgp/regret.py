"""Regret and robustness metrics computed after the fact from traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import ActionGrid


def _arr(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def lenient_increments(f_x, tau) -> np.ndarray:
    return np.maximum(_arr(tau) - _arr(f_x), 0.0)


def lenient_regret(f_x, tau) -> np.ndarray:
    """Cumulative ``sum (tau - f(x_t))^+``; ``tau`` may vary per round."""
    return np.cumsum(lenient_increments(f_x, tau))


def rs_increments(f_x, eps, tau, kappa: float) -> np.ndarray:
    return np.maximum(_arr(tau) - kappa * _arr(eps) - _arr(f_x), 0.0)


def rs_regret(f_x, eps, tau, kappa: float) -> np.ndarray | None:
    """Cumulative ``sum (tau - kappa * eps_t - f(x_t))^+``, or ``None`` when
    the benchmark fragility is infinite (threshold unattainable)."""
    if not np.isfinite(kappa):
        return None
    return np.cumsum(rs_increments(f_x, eps, tau, kappa))


def rsg_increments(f_x, eps, tau, kappa_p: float, p: float) -> np.ndarray:
    if p == 1:
        guarantee = kappa_p * _arr(eps)
    else:
        guarantee = (kappa_p * _arr(eps)) ** p
    return np.maximum(_arr(tau) - guarantee - _arr(f_x), 0.0)


def rsg_regret(f_x, eps, tau, kappa_p: float, p: float) -> np.ndarray | None:
    """Cumulative ``sum (tau - (kappa_p * eps_t)^p - f(x_t))^+``."""
    if not p >= 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    if not np.isfinite(kappa_p):
        return None
    return np.cumsum(rsg_increments(f_x, eps, tau, kappa_p, p))


@dataclass(frozen=True)
class RegretLedger:
    lenient: np.ndarray
    rs: np.ndarray | None
    rsg: np.ndarray | None
    p: float
    kappa: float
    kappa_p: float
    eps_tau: float
    tau_feasible: bool
    budget_within_radius: bool | None


def ledger(f_x, eps, tau, bench, p: float | None = None, budget_ok: bool | None = None) -> RegretLedger:
    """All three regrets against an :class:`~rsgp.satisficing.RsBenchmark`."""
    p = bench.p if p is None else p
    return RegretLedger(
        lenient=lenient_regret(f_x, tau),
        rs=rs_regret(f_x, eps, tau, bench.kappa),
        rsg=rsg_regret(f_x, eps, tau, bench.kappa_p, p),
        p=float(p), kappa=bench.kappa, kappa_p=bench.kappa_p, eps_tau=bench.eps_tau,
        tau_feasible=bench.feasible, budget_within_radius=budget_ok,
    )


def default_eps_grid(grid: ActionGrid, n: int = 64) -> np.ndarray:
    return np.linspace(0.0, grid.diameter, n)


def worst_case_curve(truth, grid: ActionGrid, x_star: int, eps_grid) -> np.ndarray:
    """``min f`` over the ball of each radius around ``x_star``."""
    v = np.asarray(truth, dtype=float)
    d = grid.dist[x_star]
    return np.array([v[d <= e].min() for e in np.asarray(eps_grid, dtype=float)])


def area_metric(truth, grid: ActionGrid, x_star: int, tau: float, eps_grid=None) -> np.ndarray:
    """Integral over [0, eps] of the worst-case shortfall below ``tau``,
    evaluated at every knot of ``eps_grid``.

    On a finite grid the shortfall is a right-continuous step function of the
    radius that only jumps at realized distances from ``x_star``, so it is
    integrated exactly piece by piece rather than by a quadrature rule.
    """
    eps_grid = default_eps_grid(grid) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size == 0 or eps_grid[0] != 0 or np.any(np.diff(eps_grid) < 0):
        raise InvalidArgumentError("eps grid must be nondecreasing and start at 0")
    v = np.asarray(truth, dtype=float)
    d = grid.dist[x_star]
    order = np.argsort(d, kind="stable")
    radii, first = np.unique(d[order], return_index=True)
    running_min = np.minimum.accumulate(v[order])
    # shortfall on [radii[k], radii[k+1])
    shortfall = np.maximum(tau - running_min[np.append(first[1:], d.size) - 1], 0.0)
    # cumulative area at each breakpoint
    area_at = np.concatenate([[0.0], np.cumsum(shortfall[:-1] * np.diff(radii))])
    k = np.searchsorted(radii, eps_grid, side="right") - 1
    return area_at[k] + shortfall[k] * (eps_grid - radii[k])

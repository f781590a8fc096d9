"""Perturbation strategies applied to the learner's chosen action."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import ActionGrid, ball
from .gp import ConfidenceField

log = logging.getLogger(__name__)

KINDS = ("none", "random", "lcb", "worstcase", "gaussian")


@dataclass(frozen=True)
class AttackSpec:
    kind: str = "none"
    eps: float = 0.0
    sequence: tuple[float, ...] | None = None
    sigma: float | None = None

    def __post_init__(self):
        kind = str(self.kind).lower().replace("_", "").replace("-", "")
        kind = {"noattack": "none", "worst": "worstcase", "gaussiannoise": "gaussian"}.get(kind, kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise InvalidArgumentError(f"unknown attack {self.kind!r}; expected one of {KINDS}")
        if self.sequence is not None:
            seq = tuple(float(e) for e in self.sequence)
            if not seq:
                raise InvalidArgumentError("budget sequence must not be empty")
            object.__setattr__(self, "sequence", seq)
        budgets = self.sequence if self.sequence is not None else (self.eps,)
        if any(not np.isfinite(e) or e < 0 for e in budgets):
            raise InvalidArgumentError(f"budgets must be finite and >= 0, got {budgets}")
        if kind == "gaussian" and (self.sigma is None or not self.sigma > 0):
            raise InvalidArgumentError(f"gaussian attack needs sigma > 0, got {self.sigma}")

    @property
    def budgeted(self) -> bool:
        return self.kind != "gaussian"

    def max_budget(self, horizon: int) -> float:
        return max(budget(self, t) for t in range(1, horizon + 1))


def budget(spec: AttackSpec, t: int) -> float:
    """Perturbation budget at round ``t`` (1-based). A sequence shorter than
    the horizon repeats its last entry."""
    if t < 1:
        raise InvalidArgumentError(f"rounds start at 1, got {t}")
    if spec.sequence is None:
        return float(spec.eps)
    if t > len(spec.sequence):
        if t == len(spec.sequence) + 1:
            log.warning("budget sequence of length %d exhausted; repeating its last value", len(spec.sequence))
        return spec.sequence[-1]
    return spec.sequence[t - 1]


def budget_extended(spec: AttackSpec, t: int) -> bool:
    return spec.sequence is not None and t > len(spec.sequence)


def perturb(spec: AttackSpec, t: int, x_tilde: int, grid: ActionGrid,
            truth: np.ndarray | None = None, cf: ConfidenceField | None = None,
            rng: np.random.Generator | None = None) -> tuple[int, float]:
    """Perturbed action index and its distance from ``x_tilde``."""
    kind = spec.kind
    if kind == "gaussian":
        if rng is None:
            raise InvalidArgumentError("gaussian attack needs a random stream")
        target = grid.points[x_tilde] + spec.sigma * rng.standard_normal(grid.dim)
        sq = np.sum((grid.points - target) ** 2, axis=1)
        x = int(np.argmin(sq))
        return x, float(grid.dist[x_tilde, x])

    members = ball(grid, x_tilde, budget(spec, t)).members
    if kind == "none":
        x = x_tilde
    elif kind == "random":
        if rng is None:
            raise InvalidArgumentError("random attack needs a random stream")
        x = int(members[rng.integers(members.size)])
    elif kind == "lcb":
        if cf is None:
            raise InvalidArgumentError("lcb attack needs the learner's confidence field")
        x = int(members[np.argmin(cf.lcb[members])])
    else:
        if truth is None:
            raise InvalidArgumentError("worst-case attack needs the true function values")
        x = int(members[np.argmin(np.asarray(truth)[members])])
    return x, float(grid.dist[x_tilde, x])

"""Action-selection rules.

Every rule returns a :class:`SelectionRecord`. The robust-satisficing rules
only see the confidence field and the threshold; the robust-optimization
baseline is the one rule that takes a radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gp, satisficing
from .errors import InvalidArgumentError
from .geometry import ActionGrid
from .gp import ConfidenceField, GpPosterior
from .satisficing import argmax_first

KINDS = ("advers1", "advers2", "adversg", "adversgts", "stableopt", "gpucb")
RS_KINDS = ("advers1", "advers2", "adversg", "adversgts")


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    p: float | None = None
    r: float | None = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise InvalidArgumentError(f"unknown policy {self.kind!r}; expected one of {KINDS}")
        if kind in ("adversg", "adversgts"):
            if self.p is None:
                object.__setattr__(self, "p", 2.0)
            if not self.p >= 1:
                raise InvalidArgumentError(f"p must be >= 1, got {self.p}")
        elif self.p is not None:
            raise InvalidArgumentError(f"policy {kind} does not take p")
        if kind == "stableopt":
            if self.r is None or not np.isfinite(self.r) or self.r < 0:
                raise InvalidArgumentError(f"stableopt needs a finite radius r >= 0, got {self.r}")
        elif self.r is not None:
            raise InvalidArgumentError(f"policy {kind} does not take a radius")

    @property
    def label(self) -> str:
        if self.kind == "stableopt":
            return f"stableopt(r={self.r:g})"
        if self.p is not None:
            return f"{self.kind}(p={self.p:g})"
        return self.kind


@dataclass(frozen=True)
class SelectionRecord:
    index: int
    tau: float
    certificate: float = np.nan
    fallback: bool = False
    acquisition: np.ndarray | None = None


def _fallback(ucb: np.ndarray, tau: float, acquisition: np.ndarray, certificate: float) -> SelectionRecord:
    return SelectionRecord(argmax_first(ucb), tau, certificate, True, acquisition)


def select_advers1(cf: ConfidenceField, grid: ActionGrid, tau: float) -> SelectionRecord:
    """Minimize optimistic fragility; certify with the pessimistic one."""
    opt = satisficing.fragility(cf.ucb, grid, tau)
    pes = satisficing.fragility(cf.lcb, grid, tau)
    if not opt.feasible:
        return _fallback(cf.ucb, tau, opt.values, np.inf)
    i = opt.best_index
    return SelectionRecord(i, tau, float(pes.values[i]), False, opt.values)


def select_advers2(cf: ConfidenceField, grid: ActionGrid, tau: float) -> SelectionRecord:
    """Maximize optimistic critical radius; certify with the pessimistic one."""
    opt = satisficing.critical_radius(cf.ucb, grid, tau)
    pes = satisficing.critical_radius(cf.lcb, grid, tau)
    if not opt.feasible:
        return _fallback(cf.ucb, tau, opt.values, -np.inf)
    i = opt.best_index
    return SelectionRecord(i, tau, float(pes.values[i]), False, opt.values)


def select_advers_g(cf: ConfidenceField, grid: ActionGrid, tau: float, p: float = 2.0) -> SelectionRecord:
    opt = satisficing.p_fragility(cf.ucb, grid, tau, p)
    pes = satisficing.p_fragility(cf.lcb, grid, tau, p)
    if not opt.feasible:
        return _fallback(cf.ucb, tau, opt.values, np.inf)
    i = opt.best_index
    return SelectionRecord(i, tau, float(pes.values[i]), False, opt.values)


def select_advers_g_ts(post: GpPosterior, grid: ActionGrid, tau: float, p: float,
                       rng: np.random.Generator, cf: ConfidenceField | None = None) -> SelectionRecord:
    """Minimize the p-fragility of one posterior draw. When ``cf`` is given
    the record carries the pessimistic p-fragility as its certificate."""
    draw = gp.sample_posterior(post, grid, rng)
    prof = satisficing.p_fragility(draw, grid, tau, p)
    cert = np.nan
    if not prof.feasible:
        i, fallback = argmax_first(draw), True
    else:
        i, fallback = prof.best_index, False
    if cf is not None:
        cert = float(satisficing.p_fragility(cf.lcb, grid, tau, p).values[i])
    return SelectionRecord(i, tau, cert, fallback, prof.values)


def select_stableopt(cf: ConfidenceField, grid: ActionGrid, r: float) -> SelectionRecord:
    """Maximize the worst ucb inside the radius-``r`` ball."""
    if not r >= 0:
        raise InvalidArgumentError(f"radius must be >= 0, got {r}")
    score = satisficing.ball_min(cf.ucb, grid, r)
    return SelectionRecord(argmax_first(score), np.nan, np.nan, False, score)


def select_gp_ucb(cf: ConfidenceField) -> SelectionRecord:
    return SelectionRecord(argmax_first(cf.ucb), np.nan, np.nan, False, cf.ucb)


def dynamic_tau(cf: ConfidenceField, margin: float = 0.0) -> float:
    """Threshold just below the best lower confidence bound."""
    if margin < 0:
        raise InvalidArgumentError(f"margin must be >= 0, got {margin}")
    return float(np.max(cf.lcb) - margin)


def select(spec: PolicySpec, cf: ConfidenceField, grid: ActionGrid, tau: float,
           post: GpPosterior | None = None, rng: np.random.Generator | None = None) -> SelectionRecord:
    """Dispatch on ``spec.kind``."""
    kind = spec.kind
    if kind == "advers1":
        return select_advers1(cf, grid, tau)
    if kind == "advers2":
        return select_advers2(cf, grid, tau)
    if kind == "adversg":
        return select_advers_g(cf, grid, tau, spec.p)
    if kind == "adversgts":
        if post is None or rng is None:
            raise InvalidArgumentError("Thompson selection needs the posterior and a random stream")
        return select_advers_g_ts(post, grid, tau, spec.p, rng, cf)
    if kind == "stableopt":
        rec = select_stableopt(cf, grid, spec.r)
    else:
        rec = select_gp_ucb(cf)
    return SelectionRecord(rec.index, tau, rec.certificate, rec.fallback, rec.acquisition)

"""Brute-force oracles and invariant checks for the satisficing measures.

The oracles share no code with :mod:`rsgp.satisficing`. Distances are
recomputed from the raw points in plain Python and compared with the grid's
matrix, and each measure is found as the smallest (or largest) *feasible*
candidate of its defining constraint rather than as a max over ratios. Feasibility is monotone in the
candidate, so a binary search over sorted candidates keeps the whole check
around O(N^2 log N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import satisficing
from ..errors import ResourceLimitError
from ..geometry import ActionGrid
from ..kernels import KernelSpec

MAX_ORACLE_POINTS = 500
TOLERANCE = 1e-10


# -- distances ---------------------------------------------------------------

def _scaled(x, ls):
    if len(ls) == 1:
        return [v / ls[0] for v in x]
    return [v / l for v, l in zip(x, ls)]


def _k(spec: KernelSpec, a, b) -> float:
    a, b = _scaled(a, spec.lengthscales), _scaled(b, spec.lengthscales)
    if spec.kind in ("rbf", "matern"):
        r = math.sqrt(sum((u - v) ** 2 for u, v in zip(a, b)))
        if spec.kind == "rbf":
            return spec.variance * math.exp(-0.5 * r * r)
        if spec.nu == 0.5:
            return spec.variance * math.exp(-r)
        s = math.sqrt(3.0 if spec.nu == 1.5 else 5.0) * r
        poly = 1.0 + s if spec.nu == 1.5 else 1.0 + s + s * s / 3.0
        return spec.variance * poly * math.exp(-s)
    dot = sum(u * v for u, v in zip(a, b))
    if spec.kind == "linear":
        return spec.variance * dot
    return spec.variance * (dot + spec.offset) ** int(spec.degree)


def naive_distances(points, metric: str, kernel: KernelSpec | None = None) -> list[list[float]]:
    pts = [list(map(float, p)) for p in np.asarray(points, dtype=float).reshape(len(points), -1)]
    n = len(pts)
    D = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if metric == "euclidean":
                D[i][j] = math.sqrt(sum((u - v) ** 2 for u, v in zip(pts[i], pts[j])))
            else:
                rad = _k(kernel, pts[i], pts[i]) - 2.0 * _k(kernel, pts[i], pts[j]) + _k(kernel, pts[j], pts[j])
                D[i][j] = math.sqrt(max(rad, 0.0))
    return D


# -- measures ----------------------------------------------------------------

def _smallest_feasible(cands: list[float], feasible) -> float:
    cands = sorted(set(cands))
    lo, hi = 0, len(cands) - 1
    if not feasible(cands[hi]):
        return math.inf
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


def _slack(tau: float, f: list[float]) -> float:
    # absorbs the rounding of tau - k * d when k is itself a ratio
    return 1e-12 * (1.0 + abs(tau) + max(abs(v) for v in f))


def oracle_p_fragility(f: list[float], D: list[list[float]], tau: float, p: float) -> list[float]:
    """Smallest k >= 0 with tau - f_j <= (k d_ij) ** p for every j at positive distance."""
    n, slack = len(f), _slack(tau, f)
    out = []
    for i in range(n):
        if f[i] < tau:
            out.append(math.inf)
            continue
        viol = [(tau - f[j], D[i][j]) for j in range(n) if D[i][j] > 0 and f[j] < tau]
        if not viol:
            out.append(0.0)
            continue
        cands = [0.0] + [s / d if p == 1 else s ** (1.0 / p) / d for s, d in viol]

        def ok(k, viol=viol):
            return all(s <= (k * d) ** p + slack for s, d in viol)

        out.append(_smallest_feasible(cands, ok))
    return out


def oracle_fragility(f: list[float], D: list[list[float]], tau: float) -> list[float]:
    """Smallest k >= 0 with f_j >= tau - k d_ij for every j at positive distance."""
    n, slack = len(f), _slack(tau, f)
    out = []
    for i in range(n):
        if f[i] < tau:
            out.append(math.inf)
            continue
        pairs = [(f[j], D[i][j]) for j in range(n) if D[i][j] > 0]
        cands = [0.0] + [(tau - fj) / d for fj, d in pairs if fj < tau]

        def ok(k, pairs=pairs):
            return all(fj >= tau - k * d - slack for fj, d in pairs)

        out.append(_smallest_feasible(cands, ok))
    return out


def oracle_critical_radius(f: list[float], D: list[list[float]], tau: float) -> list[float]:
    """Largest realized radius r whose closed ball holds only points with f >= tau."""
    n = len(f)
    out = []
    for i in range(n):
        if f[i] < tau:
            out.append(-math.inf)
            continue
        radii = sorted(set(D[i]))

        def clean(r, i=i):
            return all(f[j] >= tau for j in range(n) if D[i][j] <= r)

        # clean(r) is nonincreasing in r; find the last clean radius
        lo, hi = 0, len(radii)
        while lo < hi:
            mid = (lo + hi) // 2
            if clean(radii[mid]):
                lo = mid + 1
            else:
                hi = mid
        out.append(radii[lo - 1] if lo > 0 else -math.inf)
    return out


# -- comparison --------------------------------------------------------------

def discrepancy(a: float, b: float) -> float:
    """Relative gap between two extended reals; inf when exactly one is infinite
    or the signs of two infinities differ."""
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else math.inf
    return abs(a - b) / max(1.0, abs(a), abs(b))


@dataclass
class Check:
    name: str
    max_discrepancy: float = 0.0
    worst_index: int | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.max_discrepancy <= TOLERANCE

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        where = "" if self.worst_index is None else f" at action {self.worst_index}"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status:4s} {self.name}: max discrepancy {self.max_discrepancy:.3g}{where}{extra}"


@dataclass
class OracleReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def max_discrepancy(self) -> float:
        return max((c.max_discrepancy for c in self.checks), default=0.0)

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.ok), None)

    def extend(self, other: "OracleReport") -> None:
        self.checks.extend(other.checks)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "max_discrepancy": self.max_discrepancy,
                "checks": [{"name": c.name, "ok": c.ok, "max_discrepancy": c.max_discrepancy,
                            "worst_index": c.worst_index, "detail": c.detail} for c in self.checks]}


def _compare(name: str, lib, ref) -> Check:
    chk = Check(name)
    for i, (a, b) in enumerate(zip(np.asarray(lib, dtype=float).tolist(), ref)):
        g = discrepancy(a, b)
        if g > chk.max_discrepancy:
            chk.max_discrepancy, chk.worst_index = g, i
    return chk


def _compare_best(name: str, lib_index: int, lib_value: float, ref: list[float], minimize: bool) -> Check:
    best = min(ref) if minimize else max(ref)
    # the library's choice must be optimal under the oracle's own values
    chk = Check(name, max(discrepancy(lib_value, best), discrepancy(ref[lib_index], best)), lib_index)
    return chk


def oracle_check(grid: ActionGrid, truth, tau: float, p: float | list[float] = 2.0) -> OracleReport:
    """Recompute every satisficing measure by exhaustive search and compare."""
    if grid.size > MAX_ORACLE_POINTS:
        raise ResourceLimitError(
            f"oracle refused: {grid.size} points exceeds the {MAX_ORACLE_POINTS}-point bound "
            f"(the brute-force check is cubic); reduce the grid resolution")
    ps = sorted({1.0, *map(float, np.atleast_1d(p))})
    f = [float(v) for v in np.asarray(getattr(truth, "values", truth), dtype=float)]
    naive = naive_distances(grid.points, grid.metric, grid.kernel)
    rep = OracleReport()

    dist = Check("distances")
    for i in range(grid.size):
        for j in range(grid.size):
            g = discrepancy(float(grid.dist[i, j]), naive[i][j])
            if g > dist.max_discrepancy:
                dist.max_discrepancy, dist.worst_index = g, i
    rep.checks.append(dist)

    # measures run on the grid's own distances: a lattice's equal distances
    # are bitwise equal there, and a naive recomputation could break the ties
    D = grid.dist.tolist()

    tag = f"tau={tau:g}"
    frag_ref = oracle_fragility(f, D, tau)
    lib = satisficing.fragility(f, grid, tau)
    rep.checks.append(_compare(f"fragility[{tag}]", lib.values, frag_ref))
    rep.checks.append(_compare_best(f"kappa_tau[{tag}]", lib.best_index, lib.best_value, frag_ref, True))
    for pv in ps:
        ref = oracle_p_fragility(f, D, tau, pv)
        lib = satisficing.p_fragility(f, grid, tau, pv)
        rep.checks.append(_compare(f"p_fragility[{tag},p={pv:g}]", lib.values, ref))
        rep.checks.append(_compare_best(f"kappa_tau_p[{tag},p={pv:g}]", lib.best_index, lib.best_value, ref, True))
    ref = oracle_critical_radius(f, D, tau)
    lib = satisficing.critical_radius(f, grid, tau)
    rep.checks.append(_compare(f"critical_radius[{tag}]", lib.values, ref))
    rep.checks.append(_compare_best(f"eps_tau[{tag}]", lib.best_index, lib.best_value, ref, False))
    return rep


# -- invariants --------------------------------------------------------------

def _bool_check(name: str, bad: np.ndarray, detail: str = "") -> Check:
    idx = np.flatnonzero(np.asarray(bad).reshape(len(bad), -1).any(axis=1)) if np.size(bad) else []
    if len(idx):
        return Check(name, math.inf, int(idx[0]), detail)
    return Check(name)


def invariant_checks(grid: ActionGrid, truth, tau: float, p: float | list[float] = 2.0,
                     rng: np.random.Generator | None = None, n_brackets: int = 5) -> OracleReport:
    """Structural properties that must hold exactly on any instance."""
    rng = np.random.default_rng(0) if rng is None else rng
    f = np.asarray(getattr(truth, "values", truth), dtype=float)
    D = grid.dist
    tag = f"tau={tau:g}"
    rep = OracleReport()
    rep.checks.append(_bool_check("distance symmetry", D != D.T))
    rep.checks.append(_bool_check("distance zero diagonal", (np.diag(D) != 0)[:, None]))
    rep.checks.append(_bool_check("distance nonnegative", D < 0))

    frag = satisficing.fragility(f, grid, tau)
    rep.checks.append(_bool_check(f"p=1 reduction[{tag}]",
                                  (satisficing.p_fragility(f, grid, tau, 1.0).values != frag.values)[:, None]))
    slack = 1e-12 * (1.0 + abs(tau) + np.abs(f).max())
    for pv in sorted({1.0, *map(float, np.atleast_1d(p))}):
        prof = satisficing.p_fragility(f, grid, tau, pv)
        finite = np.isfinite(prof.values)
        with np.errstate(invalid="ignore"):
            cone = tau - (prof.values[:, None] * D) ** pv
        bad = finite[:, None] & (f[None, :] < cone - slack)
        rep.checks.append(_bool_check(f"cone guarantee[{tag},p={pv:g}]", bad))

    crit = satisficing.critical_radius(f, grid, tau)
    inside = D <= crit.values[:, None]
    rep.checks.append(_bool_check(f"critical-radius guarantee[{tag}]", inside & (f[None, :] < tau)))

    span = float(np.ptp(f)) or 1.0
    tau_hi = tau + 0.05 * span
    frag_hi = satisficing.fragility(f, grid, tau_hi)
    crit_hi = satisficing.critical_radius(f, grid, tau_hi)
    rep.checks.append(_bool_check(f"tau monotonicity[{tag}]",
                                  ((frag_hi.values < frag.values) | (crit_hi.values > crit.values))[:, None]))

    radii = np.unique(D)
    mins = np.array([satisficing.ball_min(f, grid, r) for r in radii])
    rep.checks.append(_bool_check("ball monotonicity", (np.diff(mins, axis=0) > 0).T))

    bad = np.zeros(grid.size, dtype=bool)
    for _ in range(n_brackets):
        lcb = f - rng.exponential(0.1 * span, f.size)
        ucb = f + rng.exponential(0.1 * span, f.size)
        fr = [satisficing.fragility(v, grid, tau).values for v in (ucb, f, lcb)]
        cr = [satisficing.critical_radius(v, grid, tau).values for v in (lcb, f, ucb)]
        bad |= (fr[0] > fr[1]) | (fr[1] > fr[2]) | (cr[0] > cr[1]) | (cr[1] > cr[2])
    rep.checks.append(_bool_check(f"bracketing orderings[{tag}]", bad[:, None]))
    return rep


def verify_instance(grid: ActionGrid, truth, taus, ps, seed: int = 0) -> OracleReport:
    """Oracle equivalence plus invariants for every threshold."""
    rep = OracleReport()
    rng = np.random.default_rng(seed)
    for tau in taus:
        rep.extend(oracle_check(grid, truth, tau, ps))
        rep.extend(invariant_checks(grid, truth, tau, ps, rng))
    return rep

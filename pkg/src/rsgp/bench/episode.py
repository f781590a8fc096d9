"""One replication of the select / perturb / observe / update loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import adversary, geometry, gp, policies, regret, satisficing
from ..adversary import AttackSpec
from ..errors import VerificationError
from ..geometry import ActionGrid
from ..gp import BetaSchedule
from ..kernels import KernelSpec
from ..satisficing import RsBenchmark
from .config import Cell, ExperimentConfig
from .truth import make_truth

ROLES = {"policy": 1, "adversary": 2, "noise": 3}
TRUTH_KEY = 0xFFFF


def stream(seed: int, rep: int, role: str) -> np.random.Generator:
    """Independent generator for one (replication, role) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep, ROLES[role])))


def truth_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(TRUTH_KEY,)))


@dataclass(frozen=True, eq=False)
class Instance:
    """Everything an episode needs, shared read-only by all replications."""

    grid: ActionGrid
    truth: np.ndarray
    kernel: KernelSpec
    lam: float
    noise_sd: float
    beta: BetaSchedule
    attack: AttackSpec
    horizon: int
    seed: int
    tau_mode: str = "fixed"
    tau_margin: float = 0.0
    regret_p: float = 2.0
    fingerprint: str = ""

    def regret_p_for(self, cell: Cell) -> float:
        return cell.policy.p if cell.policy.p is not None else self.regret_p

    def benchmark(self, tau: float, p: float) -> RsBenchmark:
        return satisficing.rs_benchmark(self.truth, self.grid, tau, p)

    def budget_flag(self, bench: RsBenchmark) -> bool | None:
        if not self.attack.budgeted:
            return None
        return bench.feasible and self.attack.max_budget(self.horizon) <= bench.eps_tau


def build_grid(cfg: ExperimentConfig) -> ActionGrid:
    d = cfg.domain
    kernel = cfg.kernel if d["metric"] == "kernel" else None
    if "points_csv" in d:
        pts = geometry.load_points_csv(cfg.resolve(d["points_csv"]))
        return geometry.from_points(pts, d["metric"], kernel, d["max_points"])
    return geometry.build_grid(d["bounds"], d["resolution"], d["metric"], kernel, d["max_points"])


def build_instance(cfg: ExperimentConfig) -> Instance:
    grid = build_grid(cfg)
    tseed = cfg.truth.get("seed", None)
    rng = truth_stream(cfg.seed if tseed is None else int(tseed))
    truth = make_truth(cfg.truth, grid, cfg.kernel, rng, cfg.base_dir).values
    truth.setflags(write=False)
    return Instance(grid, truth, cfg.kernel, cfg.lam, cfg.noise_sd, cfg.beta, cfg.attack,
                    cfg.horizon, cfg.seed, cfg.tau_mode, cfg.tau_margin, cfg.regret_p,
                    cfg.fingerprint())


@dataclass(eq=False)
class EpisodeTrace:
    label: str
    rep: int
    tau: float
    x_tilde: np.ndarray
    x: np.ndarray
    eps: np.ndarray
    delta: np.ndarray
    y: np.ndarray
    f_x: np.ndarray
    tau_t: np.ndarray
    beta: np.ndarray
    certificate: np.ndarray
    fallback: np.ndarray
    info_gain: np.ndarray
    ledger: regret.RegretLedger
    bench: RsBenchmark
    fingerprint: str = ""

    @property
    def horizon(self) -> int:
        return self.x.size


def run_episode(inst: Instance, cell: Cell, rep: int) -> EpisodeTrace:
    grid, truth, attack = inst.grid, inst.truth, inst.attack
    T = inst.horizon
    pol_rng = stream(inst.seed, rep, "policy")
    adv_rng = stream(inst.seed, rep, "adversary")
    noise_rng = stream(inst.seed, rep, "noise")

    cols = {k: np.empty(T) for k in ("eps", "delta", "y", "f_x", "tau_t", "beta", "certificate", "info_gain")}
    x_tilde = np.empty(T, dtype=int)
    x = np.empty(T, dtype=int)
    fallback = np.zeros(T, dtype=bool)

    post = gp.fit(inst.kernel, np.zeros((0, grid.dim)), [], inst.lam)
    for k in range(T):
        t = k + 1
        beta_t = gp.beta(inst.beta, post)
        cf = gp.confidence_field(post, grid, beta_t)
        tau_t = cell.tau if inst.tau_mode == "fixed" else policies.dynamic_tau(cf, inst.tau_margin)
        rec = policies.select(cell.policy, cf, grid, tau_t, post, pol_rng)
        eps_t = adversary.budget(attack, t)
        xt, dmag = adversary.perturb(attack, t, rec.index, grid, truth, cf, adv_rng)
        if attack.budgeted and dmag > eps_t:
            raise VerificationError(f"round {t}: perturbation {dmag} exceeds budget {eps_t}")
        yt = truth[xt] + inst.noise_sd * noise_rng.standard_normal()
        post = gp.append(post, grid.points[xt], yt)

        x_tilde[k], x[k], fallback[k] = rec.index, xt, rec.fallback
        cols["eps"][k], cols["delta"][k] = eps_t, dmag
        cols["y"][k], cols["f_x"][k] = yt, truth[xt]
        cols["tau_t"][k], cols["beta"][k] = tau_t, beta_t
        cols["certificate"][k] = rec.certificate
        cols["info_gain"][k] = gp.realized_information_gain(post)

    p = inst.regret_p_for(cell)
    bench = inst.benchmark(cell.tau, p)
    led = regret.ledger(cols["f_x"], cols["eps"], cell.tau, bench, p, inst.budget_flag(bench))
    return EpisodeTrace(cell.label, rep, cell.tau, x_tilde, x, fallback=fallback, ledger=led,
                        bench=bench, fingerprint=inst.fingerprint, **cols)

"""Experiment configuration: a single YAML document, validated strictly.

Schema (defaults in brackets)::

    name: str                      [experiment]
    seed: int                      master seed [0]
    replications: int              [1]
    horizon: int                   rounds T [100]
    jobs: int                      worker processes [1]
    domain:
      bounds: [[lo, hi], ...]      box per dimension
      resolution: int | [int]      lattice points per dimension
      points_csv: path             explicit points instead of a lattice
      metric: euclidean | kernel   [euclidean]
      max_points: int              [4096]
    kernel:
      kind: rbf | matern | polynomial | linear
      lengthscales: float | [float]
      variance: float              [1.0]
      nu: 0.5 | 1.5 | 2.5          matern only
      degree: int                  polynomial only
      offset: float                polynomial only [0.0]
    truth:
      source: prior_sample | closed_form | csv
      seed: int                    prior_sample only [derived from master seed]
      name: str                    closed_form only (see rsgp.bench.truth.CLOSED_FORMS)
      params: {..}                 closed_form only
      path: path                   csv only, one value per grid point
    lambda: float                  GP regularizer [R ** 2]
    noise_sd: float                observation noise [R]
    beta:
      mode: theoretical | fixed    [theoretical]
      B, R, zeta: float            [1.0, 1.0, 0.05]
      value: float                 fixed mode [2.0]
    tau:
      mode: fixed | dynamic        [fixed]
      value: float | [float]       target(s); a list sweeps
      margin: float                dynamic mode [0.0]
    policies:                      list, each expanded over its p / r lists
      - kind: advers1 | advers2 | adversg | adversgts | stableopt | gpucb
        p: float | [float]
        r: float | [float]
    attack:
      kind: none | random | lcb | worstcase | gaussian   [none]
      sigma: float                 gaussian only
      budget:
        mode: constant | sequence  [constant]
        value: float               [0.0]
        sequence: [float]
    regret:
      p: float                     p of the RS-G regret for non-RS-G policies [2.0]
    outputs:
      traces: bool                 write per-replication trace CSVs [true]

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..adversary import AttackSpec
from ..errors import ConfigError, RsgpError
from ..gp import BetaSchedule
from ..kernels import KernelSpec
from ..policies import PolicySpec

_ALLOWED = {
    "": {"name", "seed", "replications", "horizon", "jobs", "domain", "kernel", "truth",
         "lambda", "noise_sd", "beta", "tau", "policies", "attack", "regret", "outputs"},
    "domain": {"bounds", "resolution", "points_csv", "metric", "max_points"},
    "kernel": {"kind", "lengthscales", "variance", "nu", "degree", "offset"},
    "truth": {"source", "seed", "name", "params", "path"},
    "beta": {"mode", "B", "R", "zeta", "value"},
    "tau": {"mode", "value", "margin"},
    "policy": {"kind", "p", "r"},
    "attack": {"kind", "sigma", "budget"},
    "attack.budget": {"mode", "value", "sequence"},
    "regret": {"p"},
    "outputs": {"traces"},
}


@dataclass(frozen=True)
class Cell:
    """One (policy, threshold) combination of a sweep."""

    policy: PolicySpec
    tau: float

    @property
    def label(self) -> str:
        return f"{self.policy.label}|tau={self.tau:g}"


@dataclass
class ExperimentConfig:
    raw: dict
    base_dir: Path
    name: str
    seed: int
    replications: int
    horizon: int
    jobs: int
    domain: dict
    kernel: KernelSpec
    truth: dict
    lam: float
    noise_sd: float
    beta: BetaSchedule
    tau_mode: str
    tau_values: tuple[float, ...]
    tau_margin: float
    policies: tuple[PolicySpec, ...]
    attack: AttackSpec
    regret_p: float
    write_traces: bool
    cells: tuple[Cell, ...] = field(default=())

    def fingerprint(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        raw["seed"] = int(seed)
        return parse_config(raw, self.base_dir)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _check_keys(section: str, data: Any) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section or 'top level'}' must be a mapping")
    unknown = set(data) - _ALLOWED[section]
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section or 'top level'}': {', '.join(sorted(map(str, unknown)))}")
    return data


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _num(section: str, key: str, v, kind=float):
    try:
        out = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key} must be a number, got {v!r}") from None
    if kind is int and out != v:
        raise ConfigError(f"{section}.{key} must be an integer, got {v!r}")
    return out


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(raw, path.parent)


def parse_config(raw: dict, base_dir: str | Path = ".") -> ExperimentConfig:
    try:
        return _parse(copy.deepcopy(raw), Path(base_dir))
    except ConfigError:
        raise
    except RsgpError as exc:
        raise ConfigError(str(exc)) from None


def _parse(raw: dict, base_dir: Path) -> ExperimentConfig:
    top = _check_keys("", raw)
    for required in ("domain", "kernel", "truth", "tau", "policies"):
        if required not in top:
            raise ConfigError(f"missing required section '{required}'")

    domain = dict(_check_keys("domain", top["domain"]))
    if "points_csv" in domain:
        if "bounds" in domain or "resolution" in domain:
            raise ConfigError("domain: give either points_csv or bounds/resolution, not both")
    elif "bounds" not in domain or "resolution" not in domain:
        raise ConfigError("domain needs bounds and resolution (or points_csv)")
    domain.setdefault("metric", "euclidean")
    domain.setdefault("max_points", 4096)
    if domain["metric"] not in ("euclidean", "kernel"):
        raise ConfigError(f"domain.metric must be euclidean or kernel, got {domain['metric']!r}")

    k = _check_keys("kernel", top["kernel"])
    kernel = KernelSpec(
        kind=k.get("kind", "rbf"),
        lengthscales=tuple(_num("kernel", "lengthscales", v) for v in _as_list(k.get("lengthscales", 1.0))),
        variance=_num("kernel", "variance", k.get("variance", 1.0)),
        nu=None if k.get("nu") is None else _num("kernel", "nu", k["nu"]),
        degree=None if k.get("degree") is None else _num("kernel", "degree", k["degree"], int),
        offset=_num("kernel", "offset", k.get("offset", 0.0)),
    )

    truth = dict(_check_keys("truth", top["truth"]))
    source = truth.get("source")
    if source not in ("prior_sample", "closed_form", "csv"):
        raise ConfigError(f"truth.source must be prior_sample, closed_form or csv, got {source!r}")
    if source == "closed_form" and "name" not in truth:
        raise ConfigError("truth.name is required for closed_form truth")
    if source == "csv" and "path" not in truth:
        raise ConfigError("truth.path is required for csv truth")
    truth.setdefault("params", {})
    if not isinstance(truth["params"], dict):
        raise ConfigError("truth.params must be a mapping")

    b = _check_keys("beta", top.get("beta"))
    beta = BetaSchedule(
        mode=b.get("mode", "theoretical"),
        B=_num("beta", "B", b.get("B", 1.0)), R=_num("beta", "R", b.get("R", 1.0)),
        zeta=_num("beta", "zeta", b.get("zeta", 0.05)), value=_num("beta", "value", b.get("value", 2.0)),
    )
    lam = _num("", "lambda", top.get("lambda", beta.R ** 2))
    noise_sd = _num("", "noise_sd", top.get("noise_sd", beta.R))
    if lam <= 0:
        raise ConfigError("lambda must be positive")
    if noise_sd < 0:
        raise ConfigError("noise_sd must be >= 0")

    t = _check_keys("tau", top["tau"])
    tau_mode = t.get("mode", "fixed")
    if tau_mode not in ("fixed", "dynamic"):
        raise ConfigError(f"tau.mode must be fixed or dynamic, got {tau_mode!r}")
    if "value" not in t:
        raise ConfigError("tau.value is required (it is also the regret target in dynamic mode)")
    tau_values = tuple(_num("tau", "value", v) for v in _as_list(t["value"]))
    tau_margin = _num("tau", "margin", t.get("margin", 0.0))
    if tau_margin < 0:
        raise ConfigError("tau.margin must be >= 0")

    if not isinstance(top["policies"], list) or not top["policies"]:
        raise ConfigError("policies must be a nonempty list")
    policies = []
    for entry in top["policies"]:
        pol = _check_keys("policy", entry)
        ps = [None] if pol.get("p") is None else [_num("policy", "p", v) for v in _as_list(pol["p"])]
        rs = [None] if pol.get("r") is None else [_num("policy", "r", v) for v in _as_list(pol["r"])]
        for p in ps:
            for r in rs:
                policies.append(PolicySpec(pol.get("kind"), p=p, r=r))

    a = _check_keys("attack", top.get("attack"))
    bud = _check_keys("attack.budget", a.get("budget"))
    mode = bud.get("mode", "constant")
    if mode not in ("constant", "sequence"):
        raise ConfigError(f"attack.budget.mode must be constant or sequence, got {mode!r}")
    if mode == "sequence" and "sequence" not in bud:
        raise ConfigError("attack.budget.sequence is required in sequence mode")
    attack = AttackSpec(
        kind=a.get("kind", "none"),
        eps=_num("attack.budget", "value", bud.get("value", 0.0)),
        sequence=None if mode == "constant" else tuple(
            _num("attack.budget", "sequence", v) for v in _as_list(bud["sequence"])),
        sigma=None if a.get("sigma") is None else _num("attack", "sigma", a["sigma"]),
    )

    reg = _check_keys("regret", top.get("regret"))
    out = _check_keys("outputs", top.get("outputs"))

    seed = _num("", "seed", top.get("seed", 0), int)
    replications = _num("", "replications", top.get("replications", 1), int)
    horizon = _num("", "horizon", top.get("horizon", 100), int)
    jobs = _num("", "jobs", top.get("jobs", 1), int)
    if replications < 1 or horizon < 1 or jobs < 1:
        raise ConfigError("replications, horizon and jobs must be >= 1")

    cfg = ExperimentConfig(
        raw=raw, base_dir=base_dir, name=str(top.get("name", "experiment")), seed=seed,
        replications=replications, horizon=horizon, jobs=jobs, domain=domain, kernel=kernel,
        truth=truth, lam=lam, noise_sd=noise_sd, beta=beta, tau_mode=tau_mode,
        tau_values=tau_values, tau_margin=tau_margin, policies=tuple(policies), attack=attack,
        regret_p=_num("regret", "p", reg.get("p", 2.0)), write_traces=bool(out.get("traces", True)),
    )
    if cfg.regret_p < 1:
        raise ConfigError("regret.p must be >= 1")
    cfg.cells = tuple(Cell(pol, tau) for tau in tau_values for pol in cfg.policies)
    return cfg

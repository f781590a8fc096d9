"""Long-format series for external plotting: one CSV per figure family.

Every file has the columns ``series, x, y, band``:

* ``regret.csv``  cumulative regret against the round, per cell and metric;
  ``band`` is the half standard deviation across replications.
* ``area.csv``    Area(eps) of the RS-1, RS-2, RS-G(p=2) and RO(r) solutions
  on the true function, per threshold; ``band`` is empty.
* ``cones.csv``   fragility cones at p = 1 and p = 2 around their best
  actions, and the RS-2 step guarantee (tau inside the critical radius,
  ``-inf`` outside), per threshold; ``x`` is the grid index.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import yaml

from .. import regret, satisficing
from ..errors import ConfigError, InfeasibleConeError
from .config import parse_config
from .episode import Instance, build_instance
from .experiment import METRICS
from .outputs import fmt, read_aggregate

COLUMNS = ("series", "x", "y", "band")


def _write(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for series, x, y, band in rows:
            w.writerow([series, fmt(x), fmt(y), fmt(band)])


def regret_rows(aggregate: list[dict]):
    for metric in METRICS:
        for row in aggregate:
            y = row[f"{metric}_mean"]
            if y == "nan":
                continue
            yield (f"{row['cell']}:{metric}", int(row["t"]), float(y), float(row[f"{metric}_halfstd"]))


def solutions(inst: Instance, tau: float, radii) -> dict[str, int]:
    """Grid index of each robust solution on the true function."""
    b1 = inst.benchmark(tau, 2.0)
    out = {"RS-1": b1.x_rs1, "RS-2": b1.x_rs2, "RS-G(p=2)": b1.x_rsg}
    for r in radii:
        out[f"RO(r={r:g})"] = satisficing.argmax_first(satisficing.ball_min(inst.truth, inst.grid, r))
    return out


def area_rows(inst: Instance, taus, radii, n_eps: int = 64):
    eps = regret.default_eps_grid(inst.grid, n_eps)
    for tau in taus:
        for name, idx in solutions(inst, tau, radii).items():
            area = regret.area_metric(inst.truth, inst.grid, idx, tau, eps)
            for e, a in zip(eps, area):
                yield (f"{name}|tau={tau:g}", e, a, None)


def cone_rows(inst: Instance, taus):
    for tau in taus:
        for p in (1.0, 2.0):
            prof = satisficing.p_fragility(inst.truth, inst.grid, tau, p)
            try:
                cone = satisficing.fragility_cone(prof, inst.grid)
            except InfeasibleConeError:
                continue
            for j, y in enumerate(cone):
                yield (f"cone(p={p:g})|tau={tau:g}", j, y, None)
        crit = satisficing.critical_radius(inst.truth, inst.grid, tau)
        if not crit.feasible:
            continue
        inside = inst.grid.dist[crit.best_index] <= crit.best_value
        for j, y in enumerate(np.where(inside, tau, -np.inf)):
            yield (f"rs2-step|tau={tau:g}", j, y, None)


def load_run_instance(run_dir: Path):
    man = json.loads((run_dir / "manifest.json").read_text())
    raw = yaml.safe_load((run_dir / "config.yaml").read_text())
    cfg = parse_config(raw, man.get("config_dir", run_dir))
    return cfg, build_instance(cfg)


def export(run_dir: str | Path, out_dir: str | Path | None = None) -> dict[str, Path]:
    run_dir = Path(run_dir)
    for name in ("aggregate.csv", "manifest.json", "config.yaml"):
        if not (run_dir / name).is_file():
            raise ConfigError(f"{run_dir} is not a run directory (missing {name})")
    out = run_dir / "plotdata" if out_dir is None else Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg, inst = load_run_instance(run_dir)
    radii = sorted({pol.r for pol in cfg.policies if pol.r is not None})
    files = {"regret": out / "regret.csv", "area": out / "area.csv", "cones": out / "cones.csv"}
    _write(files["regret"], regret_rows(read_aggregate(run_dir / "aggregate.csv")))
    _write(files["area"], area_rows(inst, cfg.tau_values, radii))
    _write(files["cones"], cone_rows(inst, cfg.tau_values))
    return files

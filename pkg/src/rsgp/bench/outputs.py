"""CSV and manifest writers for experiment results.

Floats are written with ``repr`` (shortest round-trip form) so identical runs
give byte-identical files; extended reals appear as ``inf`` / ``-inf`` and
unavailable regrets as ``nan``.
"""

from __future__ import annotations

import csv
import json
import platform
import re
from pathlib import Path

import numpy as np
import scipy
import yaml

from .. import __version__
from .experiment import METRICS, CellResult, ExperimentResult
from .truth import SURROGATES

TRACE_COLUMNS = ("t", "x_tilde", "x_t", "eps_t", "delta_mag", "y_t", "f_x_t", "lenient_cum",
                 "rs_cum", "rsg_cum", "certificate", "fallback_flag", "tau_t", "info_gain")
AGGREGATE_COLUMNS = ("cell", "policy", "attack", "tau", "r", "p", "seeds", "t",
                     *(f"{m}_{s}" for m in METRICS for s in ("mean", "halfstd")))


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def cell_slug(index: int, label: str) -> str:
    return f"c{index:02d}_" + re.sub(r"[^A-Za-z0-9.=-]+", "_", label).strip("_")


def write_trace(trace, path: Path) -> None:
    led = trace.ledger
    nan = np.full(trace.horizon, np.nan)
    rs = nan if led.rs is None else led.rs
    rsg = nan if led.rsg is None else led.rsg
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for k in range(trace.horizon):
            w.writerow([k + 1, int(trace.x_tilde[k]), int(trace.x[k])] + [fmt(v) for v in (
                trace.eps[k], trace.delta[k], trace.y[k], trace.f_x[k], led.lenient[k], rs[k], rsg[k],
                trace.certificate[k], bool(trace.fallback[k]), trace.tau_t[k], trace.info_gain[k])])


def read_trace(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in TRACE_COLUMNS}


def _cell_row_prefix(res: CellResult, attack: str) -> list[str]:
    pol = res.cell.policy
    return [res.cell.label, pol.kind, attack, fmt(res.cell.tau), fmt(pol.r), fmt(pol.p), str(len(res.traces))]


def write_aggregate(result: ExperimentResult, path: Path) -> None:
    attack = result.config.attack.kind
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for res in result.cells:
            prefix = _cell_row_prefix(res, attack)
            for k in range(result.config.horizon):
                vals = []
                for m in METRICS:
                    vals += [fmt(res.mean[m][k]), fmt(res.half_std[m][k])]
                w.writerow(prefix + [str(k + 1)] + vals)


def read_aggregate(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_table(result: ExperimentResult, path: Path, metric: str = "lenient") -> None:
    """Final mean regret as an algorithm x threshold matrix."""
    taus = list(result.config.tau_values)
    labels = list(dict.fromkeys(res.cell.policy.label for res in result.cells))
    lookup = {(res.cell.policy.label, res.cell.tau): res for res in result.cells}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", *(f"tau={t:g}" for t in taus)])
        for label in labels:
            w.writerow([label, *(fmt(lookup[(label, t)].mean[metric][-1]) for t in taus)])


def manifest(result: ExperimentResult, write_traces: bool) -> dict:
    cfg, inst = result.config, result.instance
    cells = []
    for i, res in enumerate(result.cells):
        p = inst.regret_p_for(res.cell)
        bench = inst.benchmark(res.cell.tau, p)
        cells.append({
            "index": i,
            "label": res.cell.label,
            "slug": cell_slug(i, res.cell.label),
            "policy": res.cell.policy.kind,
            "tau": res.cell.tau,
            "r": res.cell.policy.r,
            "p": res.cell.policy.p,
            "regret_p": p,
            "benchmark": {
                "kappa": bench.kappa, "x_rs1": bench.x_rs1,
                "kappa_p": bench.kappa_p, "x_rsg": bench.x_rsg,
                "eps_tau": bench.eps_tau, "x_rs2": bench.x_rs2,
            },
            "assumption1_tau_attainable": bench.feasible,
            "assumption2_budget_within_radius": inst.budget_flag(bench),
            "metric": inst.grid.metric,
            "replications_ok": len(res.traces),
            "failures": [{"rep": rep, "error": msg} for rep, msg in res.failures],
        })
    return {
        "name": cfg.name,
        "config_fingerprint": cfg.fingerprint(),
        "config_dir": str(cfg.base_dir.resolve()),
        "seed": cfg.seed,
        "replications": cfg.replications,
        "replication_seeds": {"master": cfg.seed, "spawn_key": "(replication, role)",
                              "roles": ["policy", "adversary", "noise"]},
        "horizon": cfg.horizon,
        "truth": {**cfg.truth, "surrogate": cfg.truth.get("name") in SURROGATES},
        "grid_points": inst.grid.size,
        "code_version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "traces_written": write_traces,
        "cells": cells,
    }


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    raise TypeError(type(v))


def write_run(result: ExperimentResult, out_dir: str | Path, write_traces: bool | None = None,
              table: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_traces = result.config.write_traces if write_traces is None else write_traces
    with open(out / "config.yaml", "w") as fh:
        yaml.safe_dump(result.config.raw, fh, sort_keys=False)
    if write_traces:
        for i, res in enumerate(result.cells):
            cdir = out / "traces" / cell_slug(i, res.cell.label)
            cdir.mkdir(parents=True, exist_ok=True)
            for tr in res.traces:
                write_trace(tr, cdir / f"rep_{tr.rep:03d}.csv")
    write_aggregate(result, out / "aggregate.csv")
    if table:
        write_table(result, out / "table.csv")
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest(result, write_traces), fh, indent=2, default=_json_default)
        fh.write("\n")
    return out

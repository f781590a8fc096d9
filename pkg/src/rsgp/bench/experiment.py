"""Seeded replications over every sweep cell, with ordered aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericDegeneracyError, VerificationError
from .config import Cell, ExperimentConfig
from .episode import EpisodeTrace, Instance, build_instance, run_episode

log = logging.getLogger(__name__)

METRICS = ("lenient", "rs", "rsg")


@dataclass
class CellResult:
    cell: Cell
    traces: list[EpisodeTrace] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)
    mean: dict[str, np.ndarray] = field(default_factory=dict)
    half_std: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def final_lenient(self) -> float:
        m = self.mean.get("lenient")
        return float(m[-1]) if m is not None and m.size else float("nan")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    instance: Instance
    cells: list[CellResult]

    @property
    def failures(self) -> int:
        return sum(len(c.failures) for c in self.cells)


def aggregate(traces: list[EpisodeTrace], horizon: int) -> tuple[dict, dict]:
    """Mean and std/2 of each cumulative regret across replications."""
    mean, half = {}, {}
    for name in METRICS:
        rows = []
        for tr in traces:
            series = getattr(tr.ledger, name)
            rows.append(np.full(horizon, np.nan) if series is None else series)
        if rows:
            stack = np.vstack(rows)
            mean[name] = stack.mean(axis=0)
            half[name] = stack.std(axis=0) / 2.0
        else:
            mean[name] = np.full(horizon, np.nan)
            half[name] = np.full(horizon, np.nan)
    return mean, half


_WORKER_INSTANCE: Instance | None = None


def _init_worker(inst: Instance) -> None:
    global _WORKER_INSTANCE
    _WORKER_INSTANCE = inst


def _task(args: tuple[Cell, int]):
    cell, rep = args
    try:
        return run_episode(_WORKER_INSTANCE, cell, rep)
    except (NumericDegeneracyError, VerificationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return f"{type(exc).__name__}: {exc}"


def run_experiment(cfg: ExperimentConfig, jobs: int | None = None,
                   instance: Instance | None = None) -> ExperimentResult:
    """Run every (cell, replication) pair. Results do not depend on ``jobs``:
    each replication owns its random streams and aggregation is ordered."""
    inst = build_instance(cfg) if instance is None else instance
    jobs = cfg.jobs if jobs is None else jobs
    tasks = [(cell, rep) for cell in cfg.cells for rep in range(cfg.replications)]
    owners = [i for i in range(len(cfg.cells)) for _ in range(cfg.replications)]
    if jobs <= 1 or len(tasks) == 1:
        _init_worker(inst)
        outcomes = [_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(inst,)) as pool:
            outcomes = list(pool.map(_task, tasks, chunksize=chunk))

    results = [CellResult(cell) for cell in cfg.cells]
    for i, (cell, rep), out in zip(owners, tasks, outcomes):
        if isinstance(out, str):
            log.error("%s replication %d failed: %s", cell.label, rep, out)
            results[i].failures.append((rep, out))
        else:
            results[i].traces.append(out)
    for res in results:
        res.mean, res.half_std = aggregate(res.traces, cfg.horizon)
    return ExperimentResult(cfg, inst, results)

"""Command-line entry point: ``rsgp {run,sweep,verify,plotdata}``.

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import plotdata
from .bench.config import ExperimentConfig, load_config
from .bench.episode import build_instance
from .bench.experiment import run_experiment
from .bench.oracle import verify_instance
from .bench.outputs import write_run
from .errors import (ConfigError, InvalidArgumentError, NumericDegeneracyError, ResourceLimitError,
                     VerificationError)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("rsgp")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _jobs(args, cfg: ExperimentConfig) -> int:
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        return args.jobs
    return cfg.jobs if "jobs" in cfg.raw else (os.cpu_count() or 1)


def _out_dir(args, cfg: ExperimentConfig, what: str) -> Path:
    return Path(args.out) if args.out else Path("runs") / f"{cfg.name}-{what}"


def cmd_run(args, table: bool = False) -> int:
    cfg = _load(args)
    result = run_experiment(cfg, jobs=_jobs(args, cfg))
    out = write_run(result, _out_dir(args, cfg, "sweep" if table else "run"), table=table)
    for res in result.cells:
        log.info("%-40s final lenient regret %.4g", res.cell.label, res.final_lenient)
    print(f"wrote {out}")
    if result.failures:
        print(f"error: {result.failures} replication(s) failed; see manifest.json", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sweep(args) -> int:
    return cmd_run(args, table=True)


def _corrupt(grid):
    # test hook: stretch one pair of distances so only the oracle can notice
    dist = grid.dist.copy()
    dist[0, 1] = dist[1, 0] = dist[0, 1] * 1.5 + 1e-3
    return dataclasses.replace(grid, dist=dist)


def cmd_verify(args) -> int:
    cfg = _load(args)
    inst = build_instance(cfg)
    grid = _corrupt(inst.grid) if args.inject_fault else inst.grid
    ps = sorted({2.0, cfg.regret_p, *(pol.p for pol in cfg.policies if pol.p is not None)})
    report = verify_instance(grid, inst.truth, cfg.tau_values, ps, seed=cfg.seed)
    for chk in report.checks:
        log.info(chk.line())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify_report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    fail = report.first_failure
    if fail is not None:
        print(f"verification failed: {fail.line()}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"verified {len(report.checks)} checks on {grid.size} points: all passed")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise ConfigError(f"run directory not found: {run_dir}")
    files = plotdata.export(run_dir, args.out)
    for name, path in files.items():
        print(f"{name}: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--jobs", type=int, help="worker processes (default: config value, else all cores)")
    common.add_argument("-q", "--quiet", action="store_true", help="only report errors")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    with_cfg = argparse.ArgumentParser(add_help=False, parents=[common])
    with_cfg.add_argument("--config", required=True, help="experiment YAML file")

    ap = argparse.ArgumentParser(prog="rsgp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rsgp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[with_cfg], help="run replications and write outputs").set_defaults(fn=cmd_run)
    sub.add_parser("sweep", parents=[with_cfg],
                   help="like run, plus a threshold-by-algorithm table").set_defaults(fn=cmd_sweep)
    v = sub.add_parser("verify", parents=[with_cfg], help="oracle and invariant checks on the instance")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(fn=cmd_verify)
    pd = sub.add_parser("plotdata", parents=[common], help="export long-format plot series from a run")
    pd.add_argument("run_dir", help="directory written by run or sweep")
    pd.set_defaults(fn=cmd_plotdata)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, ResourceLimitError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericDegeneracyError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())

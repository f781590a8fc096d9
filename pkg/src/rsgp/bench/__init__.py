"""Experiment harness: instances, episodes, replications, outputs and oracles."""

from .config import Cell, ExperimentConfig, load_config, parse_config
from .episode import EpisodeTrace, Instance, build_instance, run_episode
from .experiment import ExperimentResult, run_experiment
from .oracle import OracleReport, oracle_check, verify_instance
from .outputs import write_run
from .truth import make_truth

__all__ = [
    "Cell", "ExperimentConfig", "load_config", "parse_config",
    "EpisodeTrace", "Instance", "build_instance", "run_episode",
    "ExperimentResult", "run_experiment",
    "OracleReport", "oracle_check", "verify_instance",
    "write_run", "make_truth",
]

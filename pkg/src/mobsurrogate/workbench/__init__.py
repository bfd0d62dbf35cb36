"""Benchmark problems, reference surfaces, adaptive studies and reporting."""

from .config import ResolvedConfig, load_config, resolve_config
from .problems import PROBLEMS, Evaluator, ProblemSpec, get_problem
from .reference import cache_key, reference_grid, reference_points
from .report import aggregate, write_metrics_csv, write_trace_csv
from .study import RunRecord, StepRecord, StudyConfig, run_adaptive_study, run_realization

__all__ = [
    "PROBLEMS", "Evaluator", "ProblemSpec", "get_problem",
    "reference_grid", "reference_points", "cache_key",
    "StudyConfig", "RunRecord", "StepRecord", "run_adaptive_study", "run_realization",
    "aggregate", "write_metrics_csv", "write_trace_csv",
    "ResolvedConfig", "load_config", "resolve_config",
]

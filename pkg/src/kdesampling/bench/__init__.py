"""Experiment harness: configuration, cell execution, report emission."""

from .config import DatasetSource, ExperimentConfig, load_config, parse_config_text
from .harness import CellResult, Report, run_cell, run_experiment
from .report import emit_report, emit_summary_csv, report_from_json

__all__ = [
    "CellResult",
    "DatasetSource",
    "ExperimentConfig",
    "Report",
    "emit_report",
    "emit_summary_csv",
    "load_config",
    "parse_config_text",
    "report_from_json",
    "run_cell",
    "run_experiment",
]

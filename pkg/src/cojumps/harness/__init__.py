"""Experiment engine, data ingestion, per-day reports and configuration."""

from .config import build_test_config, experiment_from_config, load_config, resolve_scenario
from .experiment import ExperimentResult, ExperimentSpec, run_experiment, write_tables
from .ingest import DataFormat, DayRecord, check_spacing, ingest_csv
from .report import DayRow, DayStatus, analyze_days, category_from_pvalues, format_report, parse_report, write_report

__all__ = [
    "build_test_config",
    "experiment_from_config",
    "load_config",
    "resolve_scenario",
    "ExperimentResult",
    "ExperimentSpec",
    "run_experiment",
    "write_tables",
    "DataFormat",
    "DayRecord",
    "check_spacing",
    "ingest_csv",
    "DayRow",
    "DayStatus",
    "analyze_days",
    "category_from_pvalues",
    "format_report",
    "parse_report",
    "write_report",
]

"""Tests for common versus disjoint jump arrivals in bivariate high-frequency data."""

from .core import IncrementSeries, SamplingGrid, TestFunction, as_series, phi_disjoint, phi_joint, realized_functional
from .estimator import CojumpTest
from .estimators import TruncationSpec, WindowSpec, multipower_C, spot_cov, standardizers, truncated_C
from .exceptions import CojumpError, DenominatorZero, InsufficientData
from .rng import stream
from .simulator import PRESETS, PathClass, ScenarioConfig, preset, simulate_path
from .testing import (
    Decision,
    DisjointCutoffMethod,
    JointCutoffMethod,
    StatReport,
    TestConfig,
    run_tests,
)

__version__ = "0.1.0"

__all__ = [
    "stream",
    "IncrementSeries",
    "SamplingGrid",
    "TestFunction",
    "as_series",
    "phi_disjoint",
    "phi_joint",
    "realized_functional",
    "CojumpTest",
    "TruncationSpec",
    "WindowSpec",
    "multipower_C",
    "spot_cov",
    "standardizers",
    "truncated_C",
    "CojumpError",
    "DenominatorZero",
    "InsufficientData",
    "PRESETS",
    "PathClass",
    "ScenarioConfig",
    "preset",
    "simulate_path",
    "Decision",
    "DisjointCutoffMethod",
    "JointCutoffMethod",
    "StatReport",
    "TestConfig",
    "run_tests",
]

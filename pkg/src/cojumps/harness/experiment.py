"""Monte Carlo rejection-rate experiments over simulated scenarios."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..exceptions import ConfigError
from ..resampling import default_draws
from ..rng import stream
from ..simulator import PathClass, ScenarioConfig, preset, simulate_path
from ..testing import Decision, DisjointCutoffMethod, JointCutoffMethod, TestConfig, decision_grid

logger = logging.getLogger(__name__)

# stream key prefixes
_PATH_KEY = 0
_COPIES_KEY = 1


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one rejection-rate experiment.

    ``replications`` counts kept paths: paths whose class is not in
    ``keep_classes`` are discarded and more are simulated, up to
    ``replications * max_attempts_factor`` attempts per sample size.
    ``keep_classes=None`` keeps every path.
    """

    scenario: ScenarioConfig
    n_obs_list: Tuple[int, ...] = (100, 1600)
    replications: int = 1000
    levels: Tuple[float, ...] = (0.01, 0.05, 0.1)
    test_cfg: TestConfig = field(default_factory=TestConfig)
    joint_methods: Tuple[JointCutoffMethod, ...] = (JointCutoffMethod.SIMULATED,)
    disjoint_methods: Tuple[DisjointCutoffMethod, ...] = (DisjointCutoffMethod(),)
    seed: int = 0
    keep_classes: Optional[FrozenSet[PathClass]] = None
    scenario_name: str = "custom"
    max_attempts_factor: int = 50

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.n_obs_list or any(int(n) != n or n < 1 for n in self.n_obs_list):
            raise ConfigError(f"n_obs values must be positive integers, got {self.n_obs_list}")
        if not self.levels or any(not 0 < a < 1 for a in self.levels):
            raise ConfigError(f"every level must lie in (0, 1), got {self.levels}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @classmethod
    def from_preset(cls, name: str, **kwargs) -> "ExperimentSpec":
        try:
            scenario = preset(name)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        return cls(scenario=scenario, scenario_name=name, **kwargs)

    @property
    def test_config(self) -> TestConfig:
        """Test settings with ``n_draws`` fixed across levels (shared copies)."""
        cfg = self.test_cfg
        if cfg.n_draws is None:
            cfg = replace(cfg, n_draws=default_draws(min(self.levels), cfg.max_draws))
        return cfg


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    # (test, method, level, n_obs) -> number of rejections
    rejections: Dict[Tuple[str, str, float, int], int]
    kept: Dict[int, int]
    attempts: Dict[int, int]
    # rows of (n_obs, replication, phi_disjoint, phi_joint, path_class)
    samples: List[Tuple[int, int, Optional[float], Optional[float], str]]

    def rate(self, test: str, method: str, level: float, n_obs: int) -> float:
        kept = self.kept[n_obs]
        return self.rejections[(test, method, level, n_obs)] / kept if kept else 0.0

    def method_names(self, test: str) -> List[str]:
        seen = []
        for t, m, _, _ in self.rejections:
            if t == test and m not in seen:
                seen.append(m)
        return seen


def _attempt(args):
    """Simulate and (if kept) test attempt ``a`` at sample size index ``j``."""
    spec, j, a = args
    n_obs = spec.n_obs_list[j]
    series, truth = simulate_path(spec.scenario, n_obs, stream(spec.seed, _PATH_KEY, j, a))
    if spec.keep_classes is not None and truth.path_class not in spec.keep_classes:
        return a, truth.path_class, None
    pj, pd, grid = decision_grid(
        series,
        spec.test_config,
        spec.levels,
        spec.joint_methods,
        spec.disjoint_methods,
        seed=spec.seed,
        key=(_COPIES_KEY, j, a),
    )
    return a, truth.path_class, (pj, pd, {k: v is Decision.REJECT for k, v in grid.items()})


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Rejection counts for every (test, method, level, n_obs) cell.

    Attempts are processed in batches whose composition depends only on the
    spec, and results are gathered in attempt order, so the outcome is the
    same for any ``workers``.
    """
    rejections: Dict[Tuple[str, str, float, int], int] = {}
    kept: Dict[int, int] = {}
    attempts: Dict[int, int] = {}
    samples = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for j, n_obs in enumerate(spec.n_obs_list):
            n_kept, next_attempt = 0, 0
            cap = spec.replications * spec.max_attempts_factor
            while n_kept < spec.replications and next_attempt < cap:
                need = spec.replications - n_kept
                batch = range(next_attempt, min(cap, next_attempt + max(need, 16)))
                next_attempt = batch.stop
                jobs = [(spec, j, a) for a in batch]
                results = list(pool.map(_attempt, jobs, chunksize=8)) if pool else [_attempt(x) for x in jobs]
                for a, cls, outcome in results:
                    if outcome is None or n_kept >= spec.replications:
                        continue
                    pj, pd, grid = outcome
                    samples.append((n_obs, a, pd, pj, cls.value))
                    for (test, method, level), rejected in grid.items():
                        key = (test, method, level, n_obs)
                        rejections[key] = rejections.get(key, 0) + int(rejected)
                    n_kept += 1
            if n_kept < spec.replications:
                logger.warning("n_obs=%d: kept only %d of %d replications", n_obs, n_kept, spec.replications)
            kept[n_obs] = n_kept
            attempts[n_obs] = next_attempt
    finally:
        if pool is not None:
            pool.shutdown()
    # cells with no kept replications still appear in the tables
    for test, methods in (
        ("joint", [m.value for m in spec.joint_methods]),
        ("disjoint", [str(m) for m in spec.disjoint_methods]),
    ):
        for method in methods:
            for level in spec.levels:
                for n_obs in spec.n_obs_list:
                    rejections.setdefault((test, method, level, n_obs), 0)
    return ExperimentResult(spec, rejections, kept, attempts, samples)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def write_tables(result: ExperimentResult, out_dir: str) -> List[str]:
    """Write one rejection-rate CSV per (test, method), a summary and the phi samples.

    Rejection tables have one row per level and one column per ``n_obs``.
    """
    os.makedirs(out_dir, exist_ok=True)
    spec = result.spec
    written = []
    for test in ("joint", "disjoint"):
        for method in result.method_names(test):
            path = os.path.join(out_dir, f"rejection_{test}_{method.replace(':', '_')}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["level"] + [f"n={n}" for n in spec.n_obs_list])
                for level in spec.levels:
                    w.writerow(
                        [repr(level)]
                        + [f"{result.rate(test, method, level, n):.6f}" for n in spec.n_obs_list]
                    )
            written.append(path)
    path = os.path.join(out_dir, "summary.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "n_obs", "attempts", "kept", "seed", "n_draws"])
        for n in spec.n_obs_list:
            w.writerow([spec.scenario_name, n, result.attempts[n], result.kept[n], spec.seed, spec.test_config.n_draws])
    written.append(path)
    # density dumps: one statistic value per row, tagged by replication
    for name, col in (("phi_disjoint", 2), ("phi_joint", 3)):
        path = os.path.join(out_dir, f"samples_{name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n_obs", "replication", "path_class", name])
            for row in sorted(result.samples, key=lambda r: (r[0], r[1])):
                w.writerow([row[0], row[1], row[4], _fmt(row[col])])
        written.append(path)
    return written


def rejection_rate(spec: ExperimentSpec, test: str, method, level: float, n_obs: int, workers: int = 1) -> float:
    """Convenience wrapper: run ``spec`` and return one cell of the table."""
    result = run_experiment(spec, workers=workers)
    name = method.value if isinstance(method, JointCutoffMethod) else str(method)
    return result.rate(test, name, level, n_obs)

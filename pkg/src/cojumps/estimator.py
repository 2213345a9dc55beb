"""scikit-learn style wrapper around the two cojump tests."""

from __future__ import annotations

from dataclasses import replace
from typing import List, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .core import IncrementSeries
from .estimators import TruncationSpec, WindowSpec
from .testing import DisjointCutoffMethod, JointCutoffMethod, StatReport, TestConfig, run_tests

__all__ = ["CojumpTest", "check_window"]


def check_window(window, horizon: float = 1.0) -> IncrementSeries:
    """Validate one window of increments and wrap it as an :class:`IncrementSeries`.

    Accepts an existing series or anything convertible to a finite float array
    of shape ``(n, 2)``.
    """
    if isinstance(window, IncrementSeries):
        return window
    arr = np.asarray(window, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"each window must have shape (n, 2), got {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("empty window")
    if not np.all(np.isfinite(arr)):
        raise ValueError("window contains NaN or infinite values")
    return IncrementSeries.from_array(arr, horizon=horizon)


def _windows(X) -> List:
    if isinstance(X, IncrementSeries):
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return list(X)
    return list(X)


class CojumpTest(TransformerMixin, BaseEstimator):
    """Tests for common versus disjoint jumps, one window at a time.

    ``X`` is a sequence of windows (or a single window), each an ``(n, 2)``
    array of increments over ``horizon``. ``transform`` returns one row
    ``[phi_disjoint, phi_joint, p_disjoint, p_joint]`` per window (NaN where a
    statistic is undefined) and ``predict`` the day category (1 common jumps,
    2 disjoint jumps, 3 neither rejected, 4 both rejected, 0 inapplicable).

    Parameters
    ----------
    k : int
        Block length of the joint-jump ratio.
    level : float
        Significance level of both decisions.
    alpha, varpi : float
        Truncation level ``alpha * delta**varpi``. With
        ``truncation="bipower"``, ``alpha`` multiplies ``sqrt(BV)`` of each
        component instead.
    truncation : {"fixed", "bipower"}
    k_n : int or None
        Local window length; ``None`` uses ``floor(1/sqrt(delta))``.
    n_draws : int or None
        Simulated copies; ``None`` uses ``ceil(1000/level)`` capped at 20000.
    joint_method, disjoint_method : str
        Cutoff methods, e.g. ``"SIMULATED"`` or ``"MARKOV:MULTIPOWER"``.
    power_guard : tuple of float or None
        ``(alpha', varpi')`` for the truncated joint cutoffs.
    horizon : float
        Length of each window in time units.
    random_state : int
        Seed; window ``i`` uses copies keyed by ``(random_state, 3, i)``.
    """

    def __init__(
        self,
        k: int = 2,
        level: float = 0.05,
        alpha: float = 0.03,
        varpi: float = 0.49,
        truncation: str = "fixed",
        k_n: Optional[int] = None,
        n_draws: Optional[int] = None,
        joint_method: str = "SIMULATED",
        disjoint_method: str = "SIMULATED",
        power_guard: Optional[Tuple[float, float]] = None,
        horizon: float = 1.0,
        random_state: int = 0,
    ):
        self.k = k
        self.level = level
        self.alpha = alpha
        self.varpi = varpi
        self.truncation = truncation
        self.k_n = k_n
        self.n_draws = n_draws
        self.joint_method = joint_method
        self.disjoint_method = disjoint_method
        self.power_guard = power_guard
        self.horizon = horizon
        self.random_state = random_state

    def _config(self) -> TestConfig:
        if self.truncation not in ("fixed", "bipower"):
            raise ValueError(f"truncation must be 'fixed' or 'bipower', got {self.truncation!r}")
        return TestConfig(
            k=self.k,
            level=self.level,
            trunc=TruncationSpec(alpha=self.alpha, varpi=self.varpi),
            window=None if self.k_n is None else WindowSpec(self.k_n),
            n_draws=self.n_draws,
            power_guard=None if self.power_guard is None else tuple(self.power_guard),
        )

    def fit(self, X=None, y=None):
        """Validate the parameters; the tests themselves need no training."""
        self.config_ = self._config()
        self.joint_method_ = JointCutoffMethod(str(self.joint_method).upper())
        self.disjoint_method_ = DisjointCutoffMethod.parse(str(self.disjoint_method))
        return self

    def _ensure_fitted(self):
        if not hasattr(self, "config_"):
            self.fit()

    def test(self, window, index: int = 0) -> StatReport:
        """Full report for one window."""
        self._ensure_fitted()
        series = check_window(window, self.horizon)
        cfg = self.config_
        if self.truncation == "bipower":
            cfg = replace(cfg, trunc=TruncationSpec.from_bipower(series, self.alpha, self.varpi))
        return run_tests(
            series, cfg, self.joint_method_, self.disjoint_method_, seed=self.random_state, key=(3, index)
        )

    def reports(self, X) -> List[StatReport]:
        return [self.test(w, i) for i, w in enumerate(_windows(X))]

    def transform(self, X) -> np.ndarray:
        def val(x):
            return np.nan if x is None else x

        rows = [[val(r.phi_disjoint), val(r.phi_joint), val(r.p_disjoint), val(r.p_joint)] for r in self.reports(X)]
        return np.array(rows, dtype=float).reshape(-1, 4)

    def predict(self, X) -> np.ndarray:
        return np.array([r.category or 0 for r in self.reports(X)], dtype=int)

    def _more_tags(self):
        return {"stateless": True, "requires_y": False}

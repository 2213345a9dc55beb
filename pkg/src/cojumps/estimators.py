"""Consistent estimators for the quantities that standardize the statistics.

Covers the integrated quarticity-type functional ``C_T`` (multipower and
truncated versions), the local spot covariance matrices left and right of an
observation, and the jump-weighted variances ``F_T`` and ``F'_T``.

Indices are 0-based: increment ``a`` of the array is the ``a+1``-th increment
of the grid. For a window length ``k_n`` the left window of ``a`` is
``a-k_n .. a-1`` and the right window is ``a+2 .. a+k_n+1`` (``a+1`` is
skipped). Only ``k_n <= a <= count-k_n-2`` has both windows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import IncrementSeries, TestFunction, as_series, realized_functional
from .exceptions import DenominatorZero, IndexOutOfWindow, InsufficientData

__all__ = [
    "TruncationMode",
    "TruncationSpec",
    "WindowSpec",
    "SpotCovPair",
    "StandardizerReport",
    "bipower_variation",
    "multipower_C",
    "truncated_C",
    "spot_cov",
    "spot_cov_all",
    "f_hat",
    "fprime_hat",
    "standardizers",
]


class TruncationMode(enum.Enum):
    JOINT_NORM = "joint_norm"
    PER_COMPONENT = "per_component"


@dataclass(frozen=True)
class TruncationSpec:
    """Threshold ``alpha * delta**varpi`` separating small from big increments.

    With ``alphas=(a1, a2)`` the test is per component
    (``|dx1| <= a1 delta**varpi`` and ``|dx2| <= a2 delta**varpi``), which makes
    the kept/dropped split insensitive to rescaling each component when the
    ``alphas`` are rescaled with it. Otherwise the Euclidean norm of the
    increment pair is compared to ``alpha * delta**varpi``.
    """

    alpha: float = 0.03
    varpi: float = 0.49
    alphas: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not 0.0 < self.varpi < 0.5:
            raise ValueError(f"varpi must lie in (0, 1/2), got {self.varpi}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.alphas is not None:
            a1, a2 = (float(a) for a in self.alphas)
            if not (a1 > 0 and a2 > 0):
                raise ValueError(f"per-component alphas must be positive, got {self.alphas}")
            object.__setattr__(self, "alphas", (a1, a2))

    @property
    def mode(self) -> TruncationMode:
        return TruncationMode.JOINT_NORM if self.alphas is None else TruncationMode.PER_COMPONENT

    @classmethod
    def per_component(cls, alpha1: float, alpha2: float, varpi: float = 0.49) -> "TruncationSpec":
        return cls(alpha=max(alpha1, alpha2), varpi=varpi, alphas=(alpha1, alpha2))

    @classmethod
    def from_bipower(cls, series, multiplier: float = 3.0, varpi: float = 0.49) -> "TruncationSpec":
        """Per-component levels ``multiplier * sqrt(BV_i / T)``.

        Falls back to a tiny positive level for a component with zero
        bipower variation so that every nonzero increment counts as big.
        """
        series = as_series(series)
        horizon = series.grid.horizon
        levels = []
        for component in (1, 2):
            bv = bipower_variation(series, component)
            level = multiplier * math.sqrt(bv / horizon)
            levels.append(level if level > 0 else np.finfo(float).tiny)
        return cls.per_component(levels[0], levels[1], varpi=varpi)

    def thresholds(self, delta: float) -> np.ndarray:
        """Per-component thresholds; both equal ``alpha*delta**varpi`` in norm mode."""
        scale = delta ** self.varpi
        if self.alphas is None:
            return np.array([self.alpha * scale, self.alpha * scale])
        return np.array(self.alphas) * scale

    def small_mask(self, increments: np.ndarray, delta: float) -> np.ndarray:
        """Boolean mask of increments at or below the threshold."""
        increments = np.asarray(increments, dtype=float)
        thr = self.thresholds(delta)
        if self.alphas is None:
            return np.hypot(increments[..., 0], increments[..., 1]) <= thr[0]
        return np.all(np.abs(increments) <= thr, axis=-1)


@dataclass(frozen=True)
class WindowSpec:
    """Number ``k_n`` of increments in each local window."""

    k_n: int

    def __post_init__(self):
        if int(self.k_n) != self.k_n or self.k_n < 1:
            raise ValueError(f"k_n must be a positive integer, got {self.k_n}")
        object.__setattr__(self, "k_n", int(self.k_n))

    @classmethod
    def default(cls, series) -> "WindowSpec":
        """``k_n = floor(1 / sqrt(delta))``, at least 1."""
        delta = as_series(series).delta
        return cls(max(1, int(math.floor(1.0 / math.sqrt(delta) + 1e-9))))

    def check_fits(self, count: int) -> None:
        if count < 2 * self.k_n + 2:
            raise InsufficientData(
                f"need at least 2*k_n+2 = {2 * self.k_n + 2} increments, got {count}"
            )


@dataclass(frozen=True)
class SpotCovPair:
    """Spot covariance estimates just before (``left``) and after (``right``)."""

    left: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class StandardizerReport:
    """Estimators feeding the standardized statistics.

    ``A_hat`` is the raw multipower estimate and may be slightly negative;
    ``V_disjoint`` uses it clamped at zero.
    """

    A_hat: float
    A_hat_trunc: float
    F_hat: float
    Fprime_hat: float
    V_joint: float
    V_disjoint: float
    V_disjoint_trunc: float


def bipower_variation(series, component: int) -> float:
    """``(pi/2) * sum |dx_i| |dx_{i+1}|`` for one component (1 or 2)."""
    series = as_series(series)
    if component not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {component}")
    if series.count < 2:
        raise InsufficientData("bipower variation needs at least 2 increments")
    a = np.abs(series.increments[:, component - 1])
    return float(0.5 * math.pi * np.sum(a[1:] * a[:-1]))


def multipower_C(series) -> float:
    """Multipower estimate of ``C_T = int c11 c22 + 2 (c12)^2 ds``.

    Robust to finite-activity jumps; can be slightly negative in finite
    samples because of the subtracted cross term.
    """
    series = as_series(series)
    n = series.count
    if n < 4:
        raise InsufficientData(f"multipower_C needs at least 4 increments, got {n}")
    x1, x2 = series.x1, series.x2
    s, d = x1 + x2, x1 - x2
    m = n - 3

    def lag(v, j):
        return v[j : j + m]

    terms = (
        np.abs(lag(x1, 0) * lag(x1, 1) * lag(x2, 2) * lag(x2, 3))
        + 0.125 * np.abs(lag(s, 0) * lag(s, 1) * lag(s, 2) * lag(s, 3))
        + 0.125 * np.abs(lag(d, 0) * lag(d, 1) * lag(d, 2) * lag(d, 3))
        - 0.25 * np.abs(lag(s, 0) * lag(s, 1) * lag(d, 2) * lag(d, 3))
    )
    return float(math.pi**2 / (4.0 * series.delta) * np.sum(terms))


def truncated_C(series, trunc: TruncationSpec) -> float:
    """``(1/delta) * sum (dx1 dx2)^2`` over increments kept by ``trunc``."""
    series = as_series(series)
    keep = trunc.small_mask(series.increments, series.delta)
    vals = TestFunction.F_PROD_SQ(series.increments)
    return float(np.sum(vals[keep]) / series.delta)


def _window_sums(series: IncrementSeries, window: WindowSpec, trunc: TruncationSpec):
    """Truncated outer-product sums over left and right windows.

    Returns ``(idx, left, right, small)`` where ``idx`` are the admissible
    0-based centres and ``left``/``right`` have shape ``(len(idx), 3)`` holding
    sums of ``dx1^2``, ``dx2^2``, ``dx1 dx2``.
    """
    n, kn = series.count, window.k_n
    window.check_fits(n)
    inc = series.increments
    small = trunc.small_mask(inc, series.delta)
    prods = np.column_stack((inc[:, 0] ** 2, inc[:, 1] ** 2, inc[:, 0] * inc[:, 1]))
    prods[~small] = 0.0
    prefix = np.vstack((np.zeros((1, 3)), np.cumsum(prods, axis=0)))
    idx = np.arange(kn, n - kn - 1)
    left = prefix[idx] - prefix[idx - kn]
    right = prefix[idx + kn + 2] - prefix[idx + 2]
    return idx, left, right, small


def _as_matrices(sums: np.ndarray, scale: float) -> np.ndarray:
    out = np.empty(sums.shape[:-1] + (2, 2))
    out[..., 0, 0] = sums[..., 0]
    out[..., 1, 1] = sums[..., 1]
    out[..., 0, 1] = out[..., 1, 0] = sums[..., 2]
    return out / scale


def spot_cov(series, i: int, window: WindowSpec, trunc: TruncationSpec) -> SpotCovPair:
    """Spot covariance estimates on either side of increment ``i`` (0-based)."""
    series = as_series(series)
    n, kn = series.count, window.k_n
    if not kn <= i <= n - kn - 2:
        raise IndexOutOfWindow(f"index {i} outside [{kn}, {n - kn - 2}]")
    inc = series.increments
    scale = kn * series.delta

    def cov(block):
        keep = trunc.small_mask(block, series.delta)
        kept = block[keep]
        return kept.T @ kept / scale

    return SpotCovPair(left=cov(inc[i - kn : i]), right=cov(inc[i + 2 : i + kn + 2]))


def spot_cov_all(series, window: WindowSpec, trunc: TruncationSpec):
    """Vectorized :func:`spot_cov` at every admissible index.

    Returns ``(idx, left, right)`` with ``left``/``right`` of shape ``(m, 2, 2)``.
    """
    series = as_series(series)
    idx, left, right, _ = _window_sums(series, window, trunc)
    scale = window.k_n * series.delta
    return idx, _as_matrices(left, scale), _as_matrices(right, scale)


def _big_terms(series: IncrementSeries, window: WindowSpec, trunc: TruncationSpec):
    idx, left, right, small = _window_sums(series, window, trunc)
    big = ~small[idx]
    a = series.increments[idx[big]]
    return a, left[big] + right[big]


def f_hat(series, window: WindowSpec, trunc: TruncationSpec) -> float:
    """Estimate of ``F_T``: big increments weighted by neighbouring spot variance."""
    series = as_series(series)
    a, s = _big_terms(series, window, trunc)
    total = np.sum(a[:, 0] ** 2 * s[:, 1] + a[:, 1] ** 2 * s[:, 0])
    return float(total / (2.0 * window.k_n * series.delta))


def fprime_hat(series, window: WindowSpec, trunc: TruncationSpec) -> float:
    """Estimate of ``F'_T``, the conditional variance scale of the joint statistic."""
    series = as_series(series)
    a, s = _big_terms(series, window, trunc)
    a1, a2 = a[:, 0], a[:, 1]
    # sum_j (a1 dx2_j + a2 dx1_j)^2 expanded over the window sums
    quad = a1**2 * s[:, 1] + a2**2 * s[:, 0] + 2.0 * a1 * a2 * s[:, 2]
    total = np.sum((a1 * a2) ** 2 * quad)
    return float(2.0 * total / (window.k_n * series.delta))


def standardizers(series, k: int, window: WindowSpec, trunc: TruncationSpec) -> StandardizerReport:
    """Assemble the standardizing quantities for both statistics.

    Raises :class:`DenominatorZero` if ``V(f)`` or ``V(g1) V(g2)`` vanishes.
    """
    series = as_series(series)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    vf = realized_functional(series, TestFunction.F_PROD_SQ)
    vg1 = realized_functional(series, TestFunction.G1_QUARTIC)
    vg2 = realized_functional(series, TestFunction.G2_QUARTIC)
    if vf == 0.0:
        raise DenominatorZero("V(f, delta) = 0")
    if vg1 == 0.0 or vg2 == 0.0:
        raise DenominatorZero("V(g1, delta) * V(g2, delta) = 0")
    delta = series.delta
    a_hat = multipower_C(series)
    a_trunc = truncated_C(series, trunc)
    fh = f_hat(series, window, trunc)
    fph = fprime_hat(series, window, trunc)
    root_g = math.sqrt(vg1) * math.sqrt(vg2)
    return StandardizerReport(
        A_hat=a_hat,
        A_hat_trunc=a_trunc,
        F_hat=fh,
        Fprime_hat=fph,
        V_joint=math.sqrt(delta * (k - 1) * fph) / vf,
        V_disjoint=delta * (fh + max(a_hat, 0.0)) / root_g,
        V_disjoint_trunc=delta * (fh + a_trunc) / root_g,
    )

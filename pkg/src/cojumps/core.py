"""Power variations of a bivariate increment series and the two raw statistics.

Everything downstream consumes an :class:`IncrementSeries`: the increments
``X_{i*delta} - X_{(i-1)*delta}`` of a two-dimensional process observed on a
regular grid over ``[0, horizon]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DenominatorZero

__all__ = [
    "SamplingGrid",
    "IncrementSeries",
    "TestFunction",
    "as_series",
    "realized_functional",
    "phi_joint",
    "phi_disjoint",
]


@dataclass(frozen=True)
class SamplingGrid:
    """Regular observation grid: ``count = floor(horizon / delta)`` steps."""

    delta: float
    horizon: float
    count: int

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if self.count < 1:
            raise ValueError("a grid needs at least one step")
        # tolerate representation error in horizon / delta
        expected = math.floor(self.horizon / self.delta * (1 + 1e-12))
        if self.count != expected:
            raise ValueError(
                f"count={self.count} inconsistent with floor(horizon/delta)={expected}"
            )

    @classmethod
    def from_count(cls, count: int, horizon: float = 1.0) -> "SamplingGrid":
        return cls(delta=horizon / count, horizon=horizon, count=int(count))


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Increments of ``(X1, X2)`` on a :class:`SamplingGrid`.

    ``increments`` is a read-only ``(count, 2)`` float array.
    """

    grid: SamplingGrid
    increments: np.ndarray

    def __post_init__(self):
        arr = np.array(self.increments, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"increments must have shape (n, 2), got {arr.shape}")
        if arr.shape[0] != self.grid.count:
            raise ValueError(
                f"{arr.shape[0]} increments but grid.count={self.grid.count}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("increments must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "increments", arr)

    @classmethod
    def from_array(cls, increments, horizon: float = 1.0) -> "IncrementSeries":
        arr = np.asarray(increments, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError(f"increments must have shape (n, 2), got {arr.shape}")
        return cls(SamplingGrid.from_count(arr.shape[0], horizon), arr)

    @property
    def delta(self) -> float:
        return self.grid.delta

    @property
    def count(self) -> int:
        return self.grid.count

    @property
    def x1(self) -> np.ndarray:
        return self.increments[:, 0]

    @property
    def x2(self) -> np.ndarray:
        return self.increments[:, 1]

    def __len__(self):
        return self.grid.count

    def scaled(self, lam1: float, lam2: float) -> "IncrementSeries":
        """Same grid, component ``i`` multiplied by ``lam_i``."""
        return IncrementSeries(self.grid, self.increments * np.array([lam1, lam2]))


def as_series(data, horizon: float = 1.0) -> IncrementSeries:
    """Coerce an array-like of shape ``(n, 2)`` to an :class:`IncrementSeries`."""
    if isinstance(data, IncrementSeries):
        return data
    return IncrementSeries.from_array(data, horizon=horizon)


class TestFunction(enum.Enum):
    """The three test functions applied to an increment pair."""

    __test__ = False  # keep pytest from collecting this

    F_PROD_SQ = "f"
    G1_QUARTIC = "g1"
    G2_QUARTIC = "g2"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self is TestFunction.F_PROD_SQ:
            return (x[..., 0] * x[..., 1]) ** 2
        if self is TestFunction.G1_QUARTIC:
            return x[..., 0] ** 4
        return x[..., 1] ** 4


def _block_increments(increments: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return increments
    m = increments.shape[0] // k
    # trailing partial block dropped
    return increments[: m * k].reshape(m, k, 2).sum(axis=1)


def realized_functional(series, fn: TestFunction, k: int = 1) -> float:
    """Sum of ``fn`` over block increments at step ``k * delta``.

    Blocks are sums of ``k`` consecutive fine increments; an incomplete
    trailing block is ignored.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    series = as_series(series)
    blocks = _block_increments(series.increments, int(k))
    return float(np.sum(TestFunction(fn)(blocks)))


def phi_joint(series, k: int = 2) -> float:
    """Ratio ``V(f, k*delta) / V(f, delta)`` for ``f(x) = (x1*x2)**2``.

    Tends to 1 on paths with common jumps and to a random limit near ``k``
    on paths whose jumps are disjoint.
    """
    if k < 2:
        raise ValueError(f"k must be an integer >= 2, got {k}")
    series = as_series(series)
    denom = realized_functional(series, TestFunction.F_PROD_SQ, 1)
    if denom == 0.0:
        raise DenominatorZero("V(f, delta) = 0: no common variation at the fine scale")
    return realized_functional(series, TestFunction.F_PROD_SQ, k) / denom


def phi_disjoint(series) -> float:
    """``V(f) / sqrt(V(g1) V(g2))``; lies in ``[0, 1]`` by Cauchy-Schwarz."""
    series = as_series(series)
    num = realized_functional(series, TestFunction.F_PROD_SQ, 1)
    g1 = realized_functional(series, TestFunction.G1_QUARTIC, 1)
    g2 = realized_functional(series, TestFunction.G2_QUARTIC, 1)
    if g1 == 0.0 or g2 == 0.0:
        raise DenominatorZero("V(g1) * V(g2) = 0: a component has no variation")
    return num / (math.sqrt(g1) * math.sqrt(g2))

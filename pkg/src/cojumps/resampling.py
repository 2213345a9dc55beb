"""Monte Carlo copies of the limit variables and their empirical quantiles.

Given the observed increments, the spot covariances on both sides of each big
increment are frozen and the randomness (uniform split points, uniform
integers, standard normals) is redrawn to produce independent copies of the
statistics ``D_hat`` (disjoint-jump test) and ``G_hat`` (joint-jump test).

Copies are generated in fixed blocks of :data:`BLOCK_SIZE`; block ``b`` uses
the stream keyed ``(seed, *key, b)`` so every copy is reproducible on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import as_series
from .estimators import SpotCovPair, TruncationSpec, WindowSpec, spot_cov_all
from .exceptions import InsufficientDraws
from .rng import stream

__all__ = [
    "BLOCK_SIZE",
    "ResampleDraw",
    "ResampledCopies",
    "QuantileEstimate",
    "psd_project",
    "psd_sqrt",
    "draw_R",
    "resample",
    "simulate_D_hat",
    "simulate_G_hat",
    "order_statistic_index",
    "empirical_quantile",
    "exceedance_rate",
    "quantile_G",
    "quantile_D",
    "default_draws",
]

BLOCK_SIZE = 1024


@dataclass(frozen=True)
class ResampleDraw:
    """One set of auxiliary variables attached to a jump or big increment."""

    kappa: float
    L: int
    U: np.ndarray
    Uprime: np.ndarray
    Ubar: np.ndarray
    Ubarprime: np.ndarray

    @classmethod
    def sample(cls, rng: np.random.Generator, k: int) -> "ResampleDraw":
        return cls(
            kappa=float(rng.random()),
            L=int(rng.integers(0, k)),
            U=rng.standard_normal(2),
            Uprime=rng.standard_normal(2),
            Ubar=rng.standard_normal(2),
            Ubarprime=rng.standard_normal(2),
        )


def psd_project(c: np.ndarray) -> np.ndarray:
    """Project symmetric matrices (``(..., 2, 2)``) onto the PSD cone."""
    c = np.asarray(c, dtype=float)
    w, v = np.linalg.eigh(c)
    w = np.clip(w, 0.0, None)
    return (v * w[..., None, :]) @ np.swapaxes(v, -1, -2)


def psd_sqrt(c: np.ndarray) -> np.ndarray:
    """Symmetric square root of the PSD projection of ``c``.

    Negative eigenvalues are clamped to zero first, so ``S @ S.T`` equals the
    projection for indefinite input. Works on stacks of matrices.
    """
    c = np.asarray(c, dtype=float)
    w, v = np.linalg.eigh(c)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w[..., None, :]) @ np.swapaxes(v, -1, -2)


def draw_R(spot: SpotCovPair, draw: ResampleDraw, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Build ``(R, R')`` from one draw and a pair of spot covariances."""
    s_minus, s_plus = psd_sqrt(spot.left), psd_sqrt(spot.right)
    R = math.sqrt(draw.kappa) * s_minus @ draw.U + math.sqrt(1 - draw.kappa) * s_plus @ draw.Uprime
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    Rp = math.sqrt(draw.L) * s_minus @ draw.Ubar + math.sqrt(k - 1 - draw.L) * s_plus @ draw.Ubarprime
    return R, Rp


@dataclass(frozen=True)
class ResampledCopies:
    """``n_draws`` independent copies of ``D_hat`` and ``G_hat`` sharing draws."""

    D: np.ndarray
    G: np.ndarray
    n_big: int

    @property
    def n_draws(self) -> int:
        return self.D.shape[0]


def _big_increment_inputs(series, window, trunc):
    idx, left, right = spot_cov_all(series, window, trunc)
    big = ~trunc.small_mask(series.increments[idx], series.delta)
    return series.increments[idx[big]], psd_sqrt(left[big]), psd_sqrt(right[big])


def _block_copies(a, s_minus, s_plus, k, rng, size):
    m = a.shape[0]
    kappa = rng.random((size, m))
    L = rng.integers(0, k, (size, m))
    U, Up, Ub, Ubp = (rng.standard_normal((size, m, 2)) for _ in range(4))
    R = np.sqrt(kappa)[..., None] * np.einsum("mij,bmj->bmi", s_minus, U) + np.sqrt(
        1.0 - kappa
    )[..., None] * np.einsum("mij,bmj->bmi", s_plus, Up)
    Rp = np.sqrt(L)[..., None] * np.einsum("mij,bmj->bmi", s_minus, Ub) + np.sqrt(
        k - 1 - L
    )[..., None] * np.einsum("mij,bmj->bmi", s_plus, Ubp)
    a1, a2 = a[:, 0], a[:, 1]
    D = np.sum((a1 * R[..., 1]) ** 2 + (a2 * R[..., 0]) ** 2, axis=1)
    G = 2.0 * np.sum(a1 * a2 * (a1 * Rp[..., 1] + a2 * Rp[..., 0]), axis=1)
    return D, G


def resample(
    series,
    window: WindowSpec,
    trunc: TruncationSpec,
    k: int,
    n_draws: int,
    seed: int,
    key: Sequence[int] = (),
) -> ResampledCopies:
    """Draw ``n_draws`` copies of ``(D_hat, G_hat)`` for one observed window.

    Only big increments at admissible indices enter; with none, every copy is
    zero. Raises :class:`~cojumps.exceptions.InsufficientData` if the windows
    cannot fit.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    series = as_series(series)
    a, s_minus, s_plus = _big_increment_inputs(series, window, trunc)
    if a.shape[0] == 0:
        return ResampledCopies(np.zeros(n_draws), np.zeros(n_draws), 0)
    D = np.empty(n_draws)
    G = np.empty(n_draws)
    for b, start in enumerate(range(0, n_draws, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, n_draws - start)
        rng = stream(seed, *key, b)
        # the full block is always drawn so copy j is independent of n_draws
        d, g = _block_copies(a, s_minus, s_plus, k, rng, BLOCK_SIZE)
        D[start : start + size] = d[:size]
        G[start : start + size] = g[:size]
    return ResampledCopies(D, G, a.shape[0])


def simulate_D_hat(series, window, trunc, k, seed, key=()) -> float:
    """One copy of ``D_hat`` (copy 0 of :func:`resample` with the same keys)."""
    return float(resample(series, window, trunc, k, 1, seed, key).D[0])


def simulate_G_hat(series, window, trunc, k, seed, key=()) -> float:
    """One copy of ``G_hat`` (copy 0 of :func:`resample` with the same keys)."""
    return float(resample(series, window, trunc, k, 1, seed, key).G[0])


def order_statistic_index(alpha: float, n_draws: int) -> int:
    """1-based rank, counted from the largest, of the level-``alpha`` cutoff."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {alpha}")
    m = math.floor(alpha * n_draws + 1e-9)
    if m < 1:
        raise InsufficientDraws(f"alpha * n_draws = {alpha * n_draws:g} < 1")
    return min(m, n_draws)


@dataclass(frozen=True)
class QuantileEstimate:
    """Level-``alpha`` upper order statistic of a set of simulated copies.

    ``copies`` holds the copy values (absolute values for ``G_hat``) sorted in
    decreasing order, so other levels can be read off the same sample.
    """

    level: float
    value: float
    n_draws: int
    copies: Optional[np.ndarray] = None

    def at(self, level: float) -> float:
        if self.copies is None:
            raise ValueError("copies were not stored")
        return float(self.copies[order_statistic_index(level, self.n_draws) - 1])


def empirical_quantile(values, alpha: float, absolute: bool = False) -> QuantileEstimate:
    """The ``floor(alpha*N)``-th largest value (of ``|values|`` if ``absolute``)."""
    v = np.asarray(values, dtype=float)
    if absolute:
        v = np.abs(v)
    m = order_statistic_index(alpha, v.size)
    ordered = np.sort(v)[::-1]
    return QuantileEstimate(level=alpha, value=float(ordered[m - 1]), n_draws=v.size, copies=ordered)


def exceedance_rate(values, threshold: float, absolute: bool = False) -> float:
    """Fraction of copies strictly above ``threshold``."""
    v = np.asarray(values, dtype=float)
    if absolute:
        v = np.abs(v)
    return float(np.count_nonzero(v > threshold) / v.size)


def default_draws(alpha: float, cap: Optional[int] = None) -> int:
    """``ceil(1000 / alpha)`` copies, optionally capped."""
    n = math.ceil(1000.0 / alpha - 1e-9)
    return n if cap is None else min(n, cap)


def quantile_G(series, window, trunc, k, alpha, n_draws, seed, key=()) -> QuantileEstimate:
    """Absolute-value quantile of ``n_draws`` copies of ``G_hat``."""
    order_statistic_index(alpha, n_draws)
    copies = resample(series, window, trunc, k, n_draws, seed, key)
    return empirical_quantile(copies.G, alpha, absolute=True)


def quantile_D(series, window, trunc, alpha, n_draws, seed, key=(), k=2) -> QuantileEstimate:
    """Upper quantile of ``n_draws`` copies of ``D_hat`` (``k`` does not affect ``D_hat``)."""
    order_statistic_index(alpha, n_draws)
    copies = resample(series, window, trunc, k, n_draws, seed, key)
    return empirical_quantile(copies.D, alpha)

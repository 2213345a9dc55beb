"""Limit quantities and limit laws evaluated from simulated ground truth.

This is the reference side of the verification: it never looks at the
discretely observed increments, only at the true jumps and the true spot
covariance of a :class:`~cojumps.simulator.PathTruth`. Square roots of the
true covariances use the closed-form factor ``diag(v) @ chol([[1, r], [r, 1]])``
rather than the symmetric root used by the resampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .simulator import PathTruth

__all__ = ["LimitQuantities", "LimitLawSample", "limit_quantities", "sample_limit_law"]


@dataclass(frozen=True)
class LimitQuantities:
    B: float
    B11: float
    B22: float
    C: float
    F: float
    Fprime: float

    @property
    def phi_disjoint_limit(self) -> float:
        """``B / sqrt(B11 B22)``: the probability limit of ``phi_disjoint``."""
        return self.B / math.sqrt(self.B11 * self.B22)


@dataclass(frozen=True)
class LimitLawSample:
    """Draws of the limit variables; scalars or arrays of equal length."""

    phi_tilde: Union[float, np.ndarray]
    g_tilde: Union[float, np.ndarray]
    d_tilde: Union[float, np.ndarray]
    d_tilde_pp: Union[float, np.ndarray]


def _jumps_until(truth: PathTruth, horizon: float):
    keep = np.array([e.time <= horizon for e in truth.events], dtype=bool)
    jumps = truth.jumps[keep] if keep.size else np.zeros((0, 2))
    c_left, c_right = truth.jump_covariances()
    return jumps, c_left[keep], c_right[keep]


def _integrated_C(truth: PathTruth, horizon: float) -> float:
    t = truth.times
    inside = t <= horizon
    t = t[inside]
    c_left = truth.covariance(truth.levels_left[inside])
    c_right = truth.covariance(truth.levels_right[inside])

    def h(c):
        return c[:, 0, 0] * c[:, 1, 1] + 2.0 * c[:, 0, 1] ** 2

    # value at the start of each interval is the post-jump one
    total = float(np.sum(0.5 * (h(c_right[:-1]) + h(c_left[1:])) * np.diff(t)))
    last = int(np.count_nonzero(inside)) - 1
    if last + 1 < truth.times.size and horizon > t[-1]:
        # horizon falls inside an interval: interpolate the integrand linearly
        t0, t1 = truth.times[last], truth.times[last + 1]
        h0 = h(truth.covariance(truth.levels_right[last : last + 1]))[0]
        h1 = h(truth.covariance(truth.levels_left[last + 1 : last + 2]))[0]
        h_end = h0 + (h1 - h0) * (horizon - t0) / (t1 - t0)
        total += 0.5 * (h0 + h_end) * (horizon - t0)
    return total


def limit_quantities(truth: PathTruth, horizon: Optional[float] = None) -> LimitQuantities:
    """Jump functionals ``B``, ``B11``, ``B22``, ``F``, ``F'`` and integrated ``C``."""
    horizon = truth.horizon if horizon is None else horizon
    jumps, cl, cr = _jumps_until(truth, horizon)
    a, b = jumps[:, 0], jumps[:, 1]
    cs = cl + cr
    F = 0.5 * np.sum(a**2 * cs[:, 1, 1] + b**2 * cs[:, 0, 0])
    Fp = 2.0 * np.sum(
        a**2 * b**4 * cs[:, 0, 0] + a**4 * b**2 * cs[:, 1, 1] + 2.0 * (a * b) ** 3 * cs[:, 0, 1]
    )
    return LimitQuantities(
        B=float(np.sum((a * b) ** 2)),
        B11=float(np.sum(a**4)),
        B22=float(np.sum(b**4)),
        C=_integrated_C(truth, horizon),
        F=float(F),
        Fprime=float(Fp),
    )


def _factor(truth: PathTruth, levels: np.ndarray) -> np.ndarray:
    """Lower-triangular ``s`` with ``s @ s.T`` the true covariance at ``levels``."""
    r = truth.rho
    chol = np.array([[1.0, 0.0], [r, math.sqrt(max(0.0, 1.0 - r * r))]])
    v = levels * np.asarray(truth.sigma)
    return v[:, :, None] * chol[None, :, :]


def sample_limit_law(
    truth: PathTruth,
    horizon: Optional[float],
    k: int,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> LimitLawSample:
    """Draw the limit variables ``Phi~``, ``G~``, ``D~`` and ``D~''``.

    ``R`` mixes the left-limit covariance (weight ``kappa``) with the
    post-jump one; ``R'`` does the same with ``L`` and ``k-1-L``. With
    ``size=None`` a single draw of scalars is returned.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    horizon = truth.horizon if horizon is None else horizon
    n = 1 if size is None else int(size)
    keep = np.array([e.time <= horizon for e in truth.events], dtype=bool)
    idx = truth.event_index[keep] if keep.size else np.zeros(0, dtype=int)
    jumps = truth.jumps[keep] if keep.size else np.zeros((0, 2))
    s_minus = _factor(truth, truth.levels_left[idx])
    s_plus = _factor(truth, truth.levels_right[idx])
    C = _integrated_C(truth, horizon)

    q = jumps.shape[0]
    kappa = rng.random((n, q))
    L = rng.integers(0, k, (n, q))
    U, Up, Ub, Ubp = (rng.standard_normal((n, q, 2)) for _ in range(4))
    R = np.sqrt(kappa)[..., None] * np.einsum("qij,nqj->nqi", s_minus, U) + np.sqrt(1 - kappa)[
        ..., None
    ] * np.einsum("qij,nqj->nqi", s_plus, Up)
    Rp = np.sqrt(L)[..., None] * np.einsum("qij,nqj->nqi", s_minus, Ub) + np.sqrt(k - 1 - L)[
        ..., None
    ] * np.einsum("qij,nqj->nqi", s_plus, Ubp)
    Rpp = R + Rp

    a, b = jumps[:, 0], jumps[:, 1]
    d = np.sum((a * R[..., 1]) ** 2 + (b * R[..., 0]) ** 2, axis=1)
    dpp = np.sum((a * Rpp[..., 1]) ** 2 + (b * Rpp[..., 0]) ** 2, axis=1)
    # partial derivatives of (x1 x2)^2 applied to R'
    g = 2.0 * np.sum(a**2 * b * Rp[..., 1] + b**2 * a * Rp[..., 0], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = (dpp + k * C) / (d + C)
    if size is None:
        return LimitLawSample(float(phi[0]), float(g[0]), float(d[0]), float(dpp[0]))
    return LimitLawSample(phi, g, d, dpp)

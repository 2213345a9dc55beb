"""Exact simulation of a bivariate geometric Brownian motion with jumps.

Each component follows ``dX^i = X^i sigma_i dW^i`` between jumps, with
``corr(W^1, W^2) = rho``. Three independent compound Poisson sources with
marks uniform on ``[-h, -l] U [l, h]`` multiply the level by ``1 + alpha*x``:
source 1 hits ``X^1``, source 2 hits ``X^2`` and source 3 hits both with the
same mark. Between breakpoints the log-level is advanced exactly, so there is
no discretization bias.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Tuple

import numpy as np

from .core import IncrementSeries, SamplingGrid
from .exceptions import DegenerateConfig

__all__ = [
    "JumpSource",
    "ScenarioConfig",
    "PathClass",
    "JumpEvent",
    "PathTruth",
    "PRESETS",
    "preset",
    "simulate_path",
    "simulate_levels",
    "classify_path",
]


@dataclass(frozen=True)
class JumpSource:
    """Compound Poisson source: intensity ``lam``, marks ``+-U[l, h]``, scale ``alpha``."""

    alpha: float = 0.0
    lam: float = 0.0
    l: float = 0.0
    h: float = 0.0

    @property
    def active(self) -> bool:
        return self.lam > 0

    def mark_second_moment(self) -> float:
        """``E[x^2]`` for the symmetric uniform mark law."""
        if not self.h > self.l:
            return 0.0
        return (self.h**3 - self.l**3) / (3.0 * (self.h - self.l))

    def jump_variance_rate(self) -> float:
        """``lam * alpha^2 * E[x^2]``: variance of relative jumps per unit time."""
        return self.lam * self.alpha**2 * self.mark_second_moment()


@dataclass(frozen=True)
class ScenarioConfig:
    rho: float = 0.0
    sigma1: float = math.sqrt(8e-5)
    sigma2: float = math.sqrt(8e-5)
    sources: Tuple[JumpSource, JumpSource, JumpSource] = (JumpSource(), JumpSource(), JumpSource())
    x0: Tuple[float, float] = (1.0, 1.0)
    horizon: float = 1.0
    fine_steps_per_obs: int = 1

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("volatilities must be non-negative")
        if len(self.sources) != 3:
            raise ValueError("exactly three jump sources are required")
        object.__setattr__(self, "sources", tuple(JumpSource(**s) if isinstance(s, dict) else s for s in self.sources))
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if min(self.x0) <= 0:
            raise ValueError("initial levels must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if int(self.fine_steps_per_obs) != self.fine_steps_per_obs or self.fine_steps_per_obs < 1:
            raise ValueError("fine_steps_per_obs must be a positive integer")
        for s, src in enumerate(self.sources, start=1):
            if src.lam < 0:
                raise ValueError(f"source {s}: intensity must be non-negative")
            if src.active:
                if not 0 < src.l < src.h:
                    raise ValueError(f"source {s}: need 0 < l < h, got l={src.l}, h={src.h}")
                if abs(src.alpha) * src.h >= 1.0:
                    raise DegenerateConfig(
                        f"source {s}: |alpha| * h = {abs(src.alpha) * src.h:g} >= 1 allows non-positive levels"
                    )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        if "sources" in d:
            d["sources"] = tuple(
                s if isinstance(s, JumpSource) else JumpSource(**s) if isinstance(s, dict) else JumpSource(*s)
                for s in d["sources"]
            )
        if "x0" in d:
            d["x0"] = tuple(d["x0"])
        return cls(**d)


def _row(rho, src12, src3):
    return ScenarioConfig(rho=rho, sources=(src12, src12, src3))


_SIZES = {"I": (1.0, 0.7484), "II": (5.0, 0.3187), "III": (25.0, 0.1238)}


def _build_presets() -> Dict[str, ScenarioConfig]:
    out = {}
    none = JumpSource()
    for size, (lam, h) in _SIZES.items():
        src = JumpSource(alpha=0.01, lam=lam, l=0.05, h=h)
        out[f"{size}-j"] = _row(0.0, none, src)
        out[f"{size}-m"] = _row(0.5, src, src)
        out[f"{size}-d0"] = _row(0.0, src, none)
        out[f"{size}-d1"] = _row(1.0, src, none)
    order = [f"{s}-{c}" for c in ("j", "m", "d0", "d1") for s in ("I", "II", "III")]
    return {name: out[name] for name in order}


#: Monte Carlo scenarios, sigma_i^2 = 8e-5 throughout.
PRESETS: Dict[str, ScenarioConfig] = _build_presets()


def preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


class PathClass(enum.Enum):
    JOINT = "JOINT"
    DISJOINT = "DISJOINT"
    CONTINUOUS_ANY = "CONTINUOUS_ANY"


@dataclass(frozen=True)
class JumpEvent:
    time: float
    source: int
    size_x: float
    jump1: float
    jump2: float


@dataclass(frozen=True, eq=False)
class PathTruth:
    """Ground truth of one simulated path.

    ``times`` are all breakpoints (fine grid plus jump times); ``levels_left``
    and ``levels_right`` are the left limits and values of ``X`` there. Jump
    ``q`` sits at breakpoint ``event_index[q]``.
    """

    events: List[JumpEvent]
    times: np.ndarray
    levels_left: np.ndarray
    levels_right: np.ndarray
    event_index: np.ndarray
    sigma: Tuple[float, float]
    rho: float
    horizon: float
    path_class: PathClass = field(default=PathClass.CONTINUOUS_ANY)

    def covariance(self, levels: np.ndarray) -> np.ndarray:
        """Spot covariance ``c`` at the given levels, shape ``(..., 2, 2)``."""
        levels = np.asarray(levels, dtype=float)
        s1, s2 = self.sigma
        v1, v2 = levels[..., 0] * s1, levels[..., 1] * s2
        c = np.empty(levels.shape[:-1] + (2, 2))
        c[..., 0, 0] = v1**2
        c[..., 1, 1] = v2**2
        c[..., 0, 1] = c[..., 1, 0] = self.rho * v1 * v2
        return c

    @property
    def spot_cov_path(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(times, c_left, c_right)`` at every breakpoint."""
        return self.times, self.covariance(self.levels_left), self.covariance(self.levels_right)

    @property
    def jumps(self) -> np.ndarray:
        """``(n_events, 2)`` array of level jumps ``(dX1, dX2)``."""
        if not self.events:
            return np.zeros((0, 2))
        return np.array([[e.jump1, e.jump2] for e in self.events])

    def jump_covariances(self) -> Tuple[np.ndarray, np.ndarray]:
        """Left-limit and post-jump spot covariance at each jump time."""
        return (
            self.covariance(self.levels_left[self.event_index]),
            self.covariance(self.levels_right[self.event_index]),
        )

    def to_dict(self) -> dict:
        return {
            "path_class": self.path_class.value,
            "horizon": self.horizon,
            "rho": self.rho,
            "sigma": list(self.sigma),
            "events": [asdict(e) for e in self.events],
        }


def _draw_events(cfg: ScenarioConfig, rng: np.random.Generator):
    times, sources, marks = [], [], []
    for s, src in enumerate(cfg.sources, start=1):
        if not src.active:
            continue
        n = rng.poisson(src.lam * cfg.horizon)
        t = rng.uniform(0.0, cfg.horizon, n)
        x = rng.uniform(src.l, src.h, n) * rng.choice((-1.0, 1.0), n)
        times.append(t)
        sources.append(np.full(n, s))
        marks.append(x)
    if not times:
        return np.zeros(0), np.zeros(0, dtype=int), np.zeros(0)
    t = np.concatenate(times)
    order = np.argsort(t, kind="stable")
    return t[order], np.concatenate(sources)[order], np.concatenate(marks)[order]


def simulate_levels(cfg: ScenarioConfig, n_obs: int, rng: np.random.Generator):
    """Simulate levels at observation times ``i * horizon / n_obs``.

    Returns ``(levels, truth)`` where ``levels`` has shape ``(n_obs + 1, 2)``.
    """
    if n_obs < 1:
        raise ValueError("n_obs must be >= 1")
    m = int(cfg.fine_steps_per_obs)
    n_fine = n_obs * m
    grid = np.arange(n_fine + 1) * (cfg.horizon / n_fine)
    ev_t, ev_s, ev_x = _draw_events(cfg, rng)

    times = np.concatenate((grid, ev_t))
    is_event = np.concatenate((np.zeros(grid.size, dtype=bool), np.ones(ev_t.size, dtype=bool)))
    order = np.argsort(times, kind="stable")
    times, is_event = times[order], is_event[order]
    event_index = np.flatnonzero(is_event)
    obs_index = np.flatnonzero(~is_event)[::m]

    dt = np.diff(times)
    sig = np.array([cfg.sigma1, cfg.sigma2])
    z = rng.standard_normal((dt.size, 2))
    z[:, 1] = cfg.rho * z[:, 0] + math.sqrt(max(0.0, 1.0 - cfg.rho**2)) * z[:, 1]
    dlog = -0.5 * sig**2 * dt[:, None] + sig * np.sqrt(dt)[:, None] * z

    jump_log = np.zeros((times.size, 2))
    alphas = np.array([src.alpha for src in cfg.sources])
    factors = 1.0 + alphas[ev_s - 1] * ev_x if ev_t.size else np.zeros(0)
    hits1 = (ev_s == 1) | (ev_s == 3)
    hits2 = (ev_s == 2) | (ev_s == 3)
    jump_log[event_index, 0] = np.where(hits1, np.log(factors), 0.0)
    jump_log[event_index, 1] = np.where(hits2, np.log(factors), 0.0)

    log_right = np.log(np.array(cfg.x0)) + np.vstack((np.zeros((1, 2)), np.cumsum(dlog, axis=0)))
    log_right = log_right + np.cumsum(jump_log, axis=0)
    levels_right = np.exp(log_right)
    levels_left = np.exp(log_right - jump_log)

    events = []
    for q, b in enumerate(event_index):
        jump = levels_right[b] - levels_left[b]
        events.append(
            JumpEvent(
                time=float(times[b]),
                source=int(ev_s[q]),
                size_x=float(ev_x[q]),
                jump1=float(jump[0]) if hits1[q] else 0.0,
                jump2=float(jump[1]) if hits2[q] else 0.0,
            )
        )
    truth = PathTruth(
        events=events,
        times=times,
        levels_left=levels_left,
        levels_right=levels_right,
        event_index=event_index,
        sigma=(cfg.sigma1, cfg.sigma2),
        rho=cfg.rho,
        horizon=cfg.horizon,
    )
    truth = replace(truth, path_class=classify_path(truth, cfg.horizon))
    return levels_right[obs_index], truth


def simulate_path(cfg: ScenarioConfig, n_obs: int, rng: np.random.Generator):
    """Simulate one path and return ``(IncrementSeries, PathTruth)``."""
    levels, truth = simulate_levels(cfg, n_obs, rng)
    grid = SamplingGrid.from_count(n_obs, cfg.horizon)
    return IncrementSeries(grid, np.diff(levels, axis=0)), truth


def classify_path(truth: PathTruth, horizon: float) -> PathClass:
    """Which of joint / disjoint / continuous-component the path falls in."""
    jumps1 = jumps2 = False
    for e in truth.events:
        if e.time > horizon:
            continue
        if e.jump1 != 0.0 and e.jump2 != 0.0:
            return PathClass.JOINT
        jumps1 |= e.jump1 != 0.0
        jumps2 |= e.jump2 != 0.0
    return PathClass.DISJOINT if (jumps1 and jumps2) else PathClass.CONTINUOUS_ANY

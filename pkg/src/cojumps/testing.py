"""Critical regions, decisions and p-values for both null hypotheses.

Null "common jumps": reject when ``|phi_joint - 1| >= c_joint``.
Null "disjoint jumps": reject when ``phi_disjoint >= c_disjoint``.

Cutoffs come either from a standardizer (normal quantile, Chebyshev or
Markov bounds) or from simulated copies of ``G_hat``/``D_hat``. For the
simulated methods the decision and the p-value are computed from the same set
of copies, so ``reject <=> n_draws * p < floor(level * n_draws)`` holds
exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm

from .core import TestFunction, as_series, phi_disjoint, phi_joint, realized_functional
from .estimators import (
    StandardizerReport,
    TruncationSpec,
    WindowSpec,
    bipower_variation,
    f_hat,
    fprime_hat,
    multipower_C,
    truncated_C,
)
from .exceptions import CojumpError, InsufficientData, MissingPowerGuard
from .resampling import (
    ResampledCopies,
    default_draws,
    empirical_quantile,
    exceedance_rate,
    resample,
)

__all__ = [
    "Decision",
    "JumpDecision",
    "JointCutoffMethod",
    "DisjointTag",
    "CEstimator",
    "DisjointCutoffMethod",
    "TestConfig",
    "StatReport",
    "z_alpha",
    "joint_cutoff",
    "disjoint_cutoff",
    "run_tests",
    "categorize",
    "bipower_variation",
    "univariate_jump_prefilter",
]

# Stream keys for the simulated copies of one window.
_COPIES_KEY = 0


class Decision(enum.Enum):
    REJECT = "REJECT"
    RETAIN = "RETAIN"
    INAPPLICABLE = "INAPPLICABLE"


class JumpDecision(enum.Enum):
    JUMP = "JUMP"
    NO_JUMP = "NO_JUMP"


class JointCutoffMethod(enum.Enum):
    NORMAL_QUANTILE = "NORMAL_QUANTILE"
    CHEBYSHEV = "CHEBYSHEV"
    SIMULATED = "SIMULATED"
    NORMAL_TRUNCATED = "NORMAL_TRUNCATED"
    CHEBYSHEV_TRUNCATED = "CHEBYSHEV_TRUNCATED"

    @property
    def truncated(self) -> bool:
        return self in (JointCutoffMethod.NORMAL_TRUNCATED, JointCutoffMethod.CHEBYSHEV_TRUNCATED)


class DisjointTag(enum.Enum):
    MARKOV = "MARKOV"
    SIMULATED = "SIMULATED"


class CEstimator(enum.Enum):
    MULTIPOWER = "MULTIPOWER"
    TRUNCATED = "TRUNCATED"


@dataclass(frozen=True)
class DisjointCutoffMethod:
    tag: DisjointTag = DisjointTag.SIMULATED
    estimator: CEstimator = CEstimator.MULTIPOWER

    @classmethod
    def parse(cls, text: str) -> "DisjointCutoffMethod":
        """Parse ``"SIMULATED"`` or ``"MARKOV:TRUNCATED"``-style strings."""
        tag, _, est = text.strip().upper().partition(":")
        return cls(DisjointTag(tag), CEstimator(est) if est else CEstimator.MULTIPOWER)

    def __str__(self):
        return f"{self.tag.value}:{self.estimator.value}"


@dataclass(frozen=True)
class TestConfig:
    """Tuning parameters of both tests.

    ``window=None`` picks ``floor(1/sqrt(delta))`` per series and
    ``n_draws=None`` picks ``ceil(1000/level)`` capped at ``max_draws``.
    ``power_guard=(alpha', varpi')`` is needed by the truncated joint cutoffs.
    """

    __test__ = False

    k: int = 2
    level: float = 0.05
    trunc: TruncationSpec = field(default_factory=TruncationSpec)
    window: Optional[WindowSpec] = None
    n_draws: Optional[int] = None
    power_guard: Optional[Tuple[float, float]] = None
    max_draws: int = 20000

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"k must be an integer >= 2, got {self.k}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if self.n_draws is not None and self.n_draws < 1:
            raise ValueError("n_draws must be positive")
        if self.power_guard is not None:
            a, w = self.power_guard
            if not (a > 0 and 0 < w < 0.5):
                raise ValueError(f"power_guard needs alpha' > 0 and varpi' in (0, 1/2), got {self.power_guard}")

    def window_for(self, series) -> WindowSpec:
        return self.window if self.window is not None else WindowSpec.default(series)

    @property
    def draws(self) -> int:
        return self.n_draws if self.n_draws is not None else default_draws(self.level, self.max_draws)


@dataclass
class StatReport:
    """Statistics, cutoffs, decisions and p-values for one observed window."""

    phi_joint: Optional[float]
    phi_disjoint: Optional[float]
    standardizers: Optional[StandardizerReport]
    joint_method: JointCutoffMethod
    disjoint_method: DisjointCutoffMethod
    level: float
    joint_cutoff: Optional[float] = None
    disjoint_cutoff: Optional[float] = None
    joint_decision: Decision = Decision.INAPPLICABLE
    disjoint_decision: Decision = Decision.INAPPLICABLE
    p_joint: Optional[float] = None
    p_disjoint: Optional[float] = None
    n_draws: Optional[int] = None
    notes: dict = field(default_factory=dict)

    @property
    def category(self) -> Optional[int]:
        return categorize(self.joint_decision, self.disjoint_decision)

    def as_dict(self) -> dict:
        return {
            "phi_joint": self.phi_joint,
            "phi_disjoint": self.phi_disjoint,
            "joint_method": self.joint_method.value,
            "disjoint_method": str(self.disjoint_method),
            "level": self.level,
            "joint_cutoff": self.joint_cutoff,
            "disjoint_cutoff": self.disjoint_cutoff,
            "joint_decision": self.joint_decision.value,
            "disjoint_decision": self.disjoint_decision.value,
            "p_joint": self.p_joint,
            "p_disjoint": self.p_disjoint,
            "category": self.category,
            "n_draws": self.n_draws,
            "standardizers": None if self.standardizers is None else vars(self.standardizers),
            "notes": dict(self.notes),
        }


def categorize(joint: Decision, disjoint: Decision) -> Optional[int]:
    """Day category from the two decisions.

    1: common jumps (disjoint null rejected, joint null kept);
    2: disjoint jumps (joint null rejected, disjoint null kept);
    3: neither null rejected; 4: both rejected.
    """
    if Decision.INAPPLICABLE in (joint, disjoint):
        return None
    jr = joint is Decision.REJECT
    dr = disjoint is Decision.REJECT
    if dr and not jr:
        return 1
    if jr and not dr:
        return 2
    if not jr and not dr:
        return 3
    return 4


def z_alpha(level: float) -> float:
    """Two-sided absolute quantile: ``P(|N(0,1)| >= z) = level``."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    return float(norm.isf(level / 2.0))


class _Window:
    """Lazily computed pieces shared by both tests on one series."""

    def __init__(self, series, cfg: TestConfig, seed: int, key: Tuple[int, ...] = (_COPIES_KEY,)):
        self.series = as_series(series)
        self.cfg = cfg
        self.seed = seed
        self.key = tuple(key)
        self.delta = self.series.delta
        self.vf = realized_functional(self.series, TestFunction.F_PROD_SQ)
        self.vg1 = realized_functional(self.series, TestFunction.G1_QUARTIC)
        self.vg2 = realized_functional(self.series, TestFunction.G2_QUARTIC)
        self.root_g = math.sqrt(self.vg1) * math.sqrt(self.vg2)
        self.window = cfg.window_for(self.series)
        self._cache = {}

    def _get(self, name, fn):
        if name not in self._cache:
            self._cache[name] = fn()
        return self._cache[name]

    @property
    def fprime(self):
        return self._get("fprime", lambda: fprime_hat(self.series, self.window, self.cfg.trunc))

    @property
    def f(self):
        return self._get("f", lambda: f_hat(self.series, self.window, self.cfg.trunc))

    @property
    def a_hat(self):
        return self._get("a_hat", lambda: multipower_C(self.series))

    @property
    def a_trunc(self):
        return self._get("a_trunc", lambda: truncated_C(self.series, self.cfg.trunc))

    def a_for(self, estimator: CEstimator) -> float:
        # multipower estimate clamped: it enters a nonnegative variance proxy
        return max(self.a_hat, 0.0) if estimator is CEstimator.MULTIPOWER else self.a_trunc

    @property
    def copies(self) -> ResampledCopies:
        return self._get(
            "copies",
            lambda: resample(
                self.series, self.window, self.cfg.trunc, self.cfg.k, self.cfg.draws, self.seed, self.key
            ),
        )

    @property
    def v_joint(self):
        return math.sqrt(self.delta * (self.cfg.k - 1) * self.fprime) / self.vf

    def v_disjoint(self, estimator: CEstimator):
        return self.delta * (self.f + self.a_for(estimator)) / self.root_g

    def standardizer_report(self) -> StandardizerReport:
        return StandardizerReport(
            A_hat=self.a_hat,
            A_hat_trunc=self.a_trunc,
            F_hat=self.f,
            Fprime_hat=self.fprime,
            V_joint=self.v_joint,
            V_disjoint=self.v_disjoint(CEstimator.MULTIPOWER),
            V_disjoint_trunc=self.v_disjoint(CEstimator.TRUNCATED),
        )


def _guarded_v(ctx: _Window, method: JointCutoffMethod) -> float:
    v = ctx.v_joint
    if method.truncated:
        if ctx.cfg.power_guard is None:
            raise MissingPowerGuard(f"{method.value} needs TestConfig.power_guard")
        a, w = ctx.cfg.power_guard
        v = min(v, a * ctx.delta**w)
    return v


def _joint(ctx: _Window, method: JointCutoffMethod, level: float):
    """Return ``(cutoff, decision, p_value)`` for the common-jump null."""
    phi = phi_joint(ctx.series, ctx.cfg.k)
    dist = abs(phi - 1.0)
    if method is JointCutoffMethod.SIMULATED:
        copies = ctx.copies
        q = empirical_quantile(copies.G, level, absolute=True).value
        cutoff = q * math.sqrt(ctx.delta) / ctx.vf
        stat = dist * ctx.vf / math.sqrt(ctx.delta)
        p = exceedance_rate(copies.G, stat, absolute=True)
        reject = stat >= q
    else:
        v = _guarded_v(ctx, method)
        normal = method in (JointCutoffMethod.NORMAL_QUANTILE, JointCutoffMethod.NORMAL_TRUNCATED)
        cutoff = (z_alpha(level) if normal else 1.0 / math.sqrt(level)) * v
        t = dist / v if v > 0 else (math.inf if dist > 0 else 0.0)
        if normal:
            p = float(2.0 * norm.sf(t))
        else:
            p = min(1.0, 1.0 / t**2) if t > 0 else 1.0
        reject = dist >= cutoff
    if cutoff == 0.0 and dist == 0.0:
        return cutoff, Decision.INAPPLICABLE, None
    return cutoff, Decision.REJECT if reject else Decision.RETAIN, p


def _disjoint(ctx: _Window, method: DisjointCutoffMethod, level: float):
    """Return ``(cutoff, decision, p_value)`` for the disjoint-jump null."""
    phi = phi_disjoint(ctx.series)
    a = ctx.a_for(method.estimator)
    if method.tag is DisjointTag.SIMULATED:
        copies = ctx.copies
        q = empirical_quantile(copies.D, level).value
        cutoff = (q + a) * ctx.delta / ctx.root_g
        stat = phi * ctx.root_g / ctx.delta - a
        p = exceedance_rate(copies.D, stat)
        reject = stat >= q
    else:
        v = ctx.v_disjoint(method.estimator)
        cutoff = v / level
        t = phi / v if v > 0 else (math.inf if phi > 0 else 0.0)
        p = min(1.0, 1.0 / t) if t > 0 else 1.0
        reject = phi >= cutoff
    if cutoff == 0.0 and phi == 0.0:
        return cutoff, Decision.INAPPLICABLE, None
    return cutoff, Decision.REJECT if reject else Decision.RETAIN, p


def joint_cutoff(series, cfg: TestConfig, method: JointCutoffMethod, seed: int = 0) -> float:
    """Cutoff ``c`` for the critical region ``|phi_joint - 1| >= c``."""
    ctx = _Window(series, cfg, seed)
    if ctx.vf == 0.0:
        phi_joint(ctx.series, cfg.k)  # raises DenominatorZero
    return _joint(ctx, JointCutoffMethod(method), cfg.level)[0]


def disjoint_cutoff(series, cfg: TestConfig, method: DisjointCutoffMethod, seed: int = 0) -> float:
    """Cutoff ``c`` for the critical region ``phi_disjoint >= c``."""
    ctx = _Window(series, cfg, seed)
    if ctx.root_g == 0.0:
        phi_disjoint(ctx.series)  # raises DenominatorZero
    return _disjoint(ctx, method, cfg.level)[0]


def run_tests(
    series,
    cfg: TestConfig = TestConfig(),
    joint_method: JointCutoffMethod = JointCutoffMethod.SIMULATED,
    disjoint_method: DisjointCutoffMethod = DisjointCutoffMethod(),
    seed: int = 0,
    key: Tuple[int, ...] = (_COPIES_KEY,),
) -> StatReport:
    """Run both tests on one window; failures become INAPPLICABLE decisions.

    Both simulated cutoffs read from a single set of copies drawn with
    ``seed``, so reports are reproducible and shared across levels when
    ``cfg.n_draws`` is fixed.
    """
    series = as_series(series)
    ctx = _Window(series, cfg, seed, key)
    report = StatReport(
        phi_joint=None,
        phi_disjoint=None,
        standardizers=None,
        joint_method=JointCutoffMethod(joint_method),
        disjoint_method=disjoint_method,
        level=cfg.level,
    )
    try:
        report.phi_joint = phi_joint(series, cfg.k)
        report.joint_cutoff, report.joint_decision, report.p_joint = _joint(ctx, report.joint_method, cfg.level)
    except MissingPowerGuard:
        raise
    except CojumpError as exc:
        report.notes["joint"] = f"{type(exc).__name__}: {exc}"
    try:
        report.phi_disjoint = phi_disjoint(series)
        report.disjoint_cutoff, report.disjoint_decision, report.p_disjoint = _disjoint(ctx, disjoint_method, cfg.level)
    except CojumpError as exc:
        report.notes["disjoint"] = f"{type(exc).__name__}: {exc}"
    if report.phi_joint is not None and report.phi_disjoint is not None:
        try:
            report.standardizers = ctx.standardizer_report()
        except CojumpError as exc:
            report.notes.setdefault("standardizers", f"{type(exc).__name__}: {exc}")
    if "copies" in ctx._cache:
        report.n_draws = ctx.copies.n_draws
    return report


# Asymptotic variance constant of the log ratio: pi^2/4 + pi - 5.
_THETA = math.pi**2 / 4.0 + math.pi - 5.0


def univariate_jump_prefilter(series, component: int, level: float = 0.01) -> JumpDecision:
    """Screen one component for jumps with the log RV/BV ratio statistic.

    The log difference of realized and bipower variation is studentized with
    a quad-power quarticity estimate and compared one-sided with the upper
    ``level`` normal quantile. A path without variation has no jumps.
    """
    series = as_series(series)
    if component not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {component}")
    n = series.count
    if n < 4:
        raise InsufficientData(f"prefilter needs at least 4 increments, got {n}")
    r = np.abs(series.increments[:, component - 1])
    rv = float(np.sum(r**2))
    # n/(n-1) puts BV on the same number of terms as RV
    bv = bipower_variation(series, component) * n / (n - 1)
    if rv == 0.0 or bv == 0.0:
        return JumpDecision.NO_JUMP
    qp = n * (math.pi**2 / 4.0) * float(np.sum(r[:-3] * r[1:-2] * r[2:-1] * r[3:]))
    z = (math.log(rv) - math.log(bv)) / math.sqrt(_THETA / n * max(1.0, qp / bv**2))
    return JumpDecision.JUMP if z > norm.isf(level) else JumpDecision.NO_JUMP


def decision_grid(series, cfg: TestConfig, levels, joint_methods, disjoint_methods, seed=0, key=(_COPIES_KEY,)):
    """Decisions for every ``(level, method)`` pair on one window.

    One set of copies (``cfg.n_draws`` of them) is shared by all levels and
    methods. Returns ``(phi_joint, phi_disjoint, decisions)`` where
    ``decisions`` maps ``("joint", method_name, level)`` and
    ``("disjoint", method_name, level)`` to a :class:`Decision`.
    """
    ctx = _Window(series, cfg, seed, key)
    out = {}
    phis = {}
    for name, stat, methods, fn in (
        ("joint", lambda: phi_joint(ctx.series, cfg.k), joint_methods, _joint),
        ("disjoint", lambda: phi_disjoint(ctx.series), disjoint_methods, _disjoint),
    ):
        try:
            phis[name] = stat()
        except CojumpError:
            phis[name] = None
        for method in methods:
            for level in levels:
                decision = Decision.INAPPLICABLE
                if phis[name] is not None:
                    try:
                        decision = fn(ctx, method, level)[1]
                    except MissingPowerGuard:
                        raise
                    except CojumpError:
                        pass
                out[(name, str(method.value if isinstance(method, JointCutoffMethod) else method), level)] = decision
    return phis["joint"], phis["disjoint"], out

"""Per-day analysis of ingested data and the day-level CSV report."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence

from ..estimators import TruncationSpec
from ..exceptions import CojumpError, MissingPowerGuard
from ..testing import (
    DisjointCutoffMethod,
    JointCutoffMethod,
    JumpDecision,
    TestConfig,
    run_tests,
    univariate_jump_prefilter,
)
from .ingest import DayRecord

__all__ = [
    "REPORT_COLUMNS",
    "DayStatus",
    "DayRow",
    "analyze_days",
    "category_from_pvalues",
    "format_report",
    "parse_report",
    "write_report",
]

REPORT_COLUMNS = ("date", "phi_d", "phi_j", "p_d", "p_j", "category", "status", "reason")

# stream key prefix for per-day copies
_DAY_KEY = 2


class DayStatus(enum.Enum):
    TESTED = "TESTED"
    SKIPPED = "SKIPPED"
    INAPPLICABLE = "INAPPLICABLE"


@dataclass(frozen=True)
class DayRow:
    date: str
    phi_d: Optional[float]
    phi_j: Optional[float]
    p_d: Optional[float]
    p_j: Optional[float]
    category: Optional[int]
    status: DayStatus = DayStatus.TESTED
    reason: str = ""


def category_from_pvalues(p_d: float, p_j: float, level: float = 0.01) -> int:
    """Day category from the two p-values with the rule ``reject iff p < level``.

    1: only the disjoint null is rejected (common jumps);
    2: only the joint null is rejected (disjoint jumps);
    3: neither is rejected; 4: both are.
    """
    dr, jr = p_d < level, p_j < level
    if dr and not jr:
        return 1
    if jr and not dr:
        return 2
    return 4 if dr else 3


def analyze_days(
    records: Sequence[DayRecord],
    test_cfg: Optional[TestConfig] = None,
    joint_method: JointCutoffMethod = JointCutoffMethod.SIMULATED,
    disjoint_method: DisjointCutoffMethod = DisjointCutoffMethod(),
    prefilter_level: Optional[float] = 0.01,
    truncation: str = "bipower",
    bipower_multiplier: float = 3.0,
    seed: int = 0,
) -> List[DayRow]:
    """Run both tests on every day.

    With ``prefilter_level`` set, a day is tested only if the univariate
    jump screen flags both components; otherwise it is skipped with reason
    ``CONTINUOUS``. ``truncation="bipower"`` sets per-component levels to
    ``bipower_multiplier * sqrt(BV)`` for each day (``varpi`` from
    ``test_cfg``); ``"fixed"`` keeps ``test_cfg.trunc``. Day ``i`` draws its
    copies from the stream keyed ``(seed, 2, i)``. Each record's ``report``
    is filled in place.
    """
    cfg = test_cfg or TestConfig(level=0.01)
    if truncation not in ("bipower", "fixed"):
        raise ValueError(f"truncation must be 'bipower' or 'fixed', got {truncation!r}")
    rows = []
    for i, rec in enumerate(records):
        try:
            if prefilter_level is not None:
                flags = [univariate_jump_prefilter(rec.series, c, prefilter_level) for c in (1, 2)]
                if any(f is JumpDecision.NO_JUMP for f in flags):
                    quiet = [str(c) for c, f in zip((1, 2), flags) if f is JumpDecision.NO_JUMP]
                    rows.append(
                        DayRow(rec.label, None, None, None, None, None, DayStatus.SKIPPED,
                               f"CONTINUOUS: no jump in component {' and '.join(quiet)}")
                    )
                    continue
            day_cfg = cfg
            if truncation == "bipower":
                trunc = TruncationSpec.from_bipower(rec.series, bipower_multiplier, cfg.trunc.varpi)
                day_cfg = replace(cfg, trunc=trunc)
            report = run_tests(rec.series, day_cfg, joint_method, disjoint_method, seed=seed, key=(_DAY_KEY, i))
        except MissingPowerGuard:
            raise
        except CojumpError as exc:
            rows.append(DayRow(rec.label, None, None, None, None, None, DayStatus.INAPPLICABLE,
                               f"{type(exc).__name__}: {exc}"))
            continue
        rec.report = report
        category = report.category
        status = DayStatus.TESTED if category is not None else DayStatus.INAPPLICABLE
        reason = "; ".join(f"{k}: {v}" for k, v in sorted(report.notes.items()))
        rows.append(
            DayRow(rec.label, report.phi_disjoint, report.phi_joint, report.p_disjoint, report.p_joint,
                   category, status, reason)
        )
    return rows


def _num(x: Optional[float], digits: int) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def _write(rows: Iterable[DayRow], fh, digits: int) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(
            [
                r.date,
                _num(r.phi_d, digits),
                _num(r.phi_j, digits),
                _num(r.p_d, digits),
                _num(r.p_j, digits),
                "" if r.category is None else r.category,
                r.status.value,
                r.reason,
            ]
        )


def format_report(rows: Iterable[DayRow], digits: int = 4) -> str:
    """CSV text with columns :data:`REPORT_COLUMNS`, numbers to ``digits`` places."""
    buf = io.StringIO()
    _write(rows, buf, digits)
    return buf.getvalue()


def write_report(rows: Iterable[DayRow], path: str, digits: int = 4) -> None:
    with open(path, "w", newline="") as fh:
        _write(rows, fh, digits)


def parse_report(text: str) -> List[DayRow]:
    """Inverse of :func:`format_report` (numbers as printed)."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        def num(key):
            return float(rec[key]) if rec[key] != "" else None

        out.append(
            DayRow(
                rec["date"], num("phi_d"), num("phi_j"), num("p_d"), num("p_j"),
                int(rec["category"]) if rec["category"] else None,
                DayStatus(rec["status"]), rec["reason"],
            )
        )
    return out

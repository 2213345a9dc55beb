"""Reading intraday bivariate price or return files into per-day series."""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, time
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..core import IncrementSeries
from ..exceptions import GapError, ParseError
from ..testing import StatReport

__all__ = ["DataFormat", "DayRecord", "ingest_csv", "check_spacing", "SPACING_TOLERANCE"]

#: Allowed relative deviation of any spacing from the modal spacing.
SPACING_TOLERANCE = 0.01


class DataFormat(enum.Enum):
    LEVELS = "LEVELS"
    LOG_LEVELS = "LOG_LEVELS"
    RETURNS = "RETURNS"


@dataclass
class DayRecord:
    """One trading day: its label, increments on ``[0, 1]`` and (later) a report."""

    label: str
    series: IncrementSeries
    report: Optional[StatReport] = None

    def __post_init__(self):
        if self.series.grid.horizon != 1.0:
            raise ValueError("day series are normalized to unit horizon")


def _parse_time(text: str) -> float:
    """Seconds (or raw units) from a number, an ISO timestamp or ``HH:MM[:SS]``."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        ts = datetime.fromisoformat(text)
        return ts.timestamp() if ts.tzinfo else (ts - datetime(1970, 1, 1)).total_seconds()
    except ValueError:
        pass
    t = time.fromisoformat(text)
    return t.hour * 3600.0 + t.minute * 60.0 + t.second + t.microsecond * 1e-6


def check_spacing(times: Sequence[float], label: str = "", tolerance: float = SPACING_TOLERANCE) -> float:
    """Return the modal spacing; raise :class:`GapError` if any step deviates too much."""
    t = np.asarray(times, dtype=float)
    if t.size < 2:
        return float("nan")
    d = np.diff(t)
    if np.any(d <= 0):
        raise GapError(f"day {label}: observation times are not strictly increasing")
    # mode over spacings rounded to a relative grid, to absorb float noise
    scale = float(np.median(d))
    rounded = np.round(d / scale, 6)
    mode = Counter(rounded.tolist()).most_common(1)[0][0] * scale
    worst = float(np.max(np.abs(d - mode)) / mode)
    if worst > tolerance:
        where = int(np.argmax(np.abs(d - mode)))
        raise GapError(
            f"day {label}: spacing {d[where]:g} after observation {where} deviates "
            f"{100 * worst:.2f}% from the modal spacing {mode:g}"
        )
    return mode


def _increments(values: np.ndarray, fmt: DataFormat, label: str, first_row: int) -> np.ndarray:
    if fmt is DataFormat.RETURNS:
        return values
    if fmt is DataFormat.LOG_LEVELS:
        bad = np.argwhere(values <= 0)
        if bad.size:
            raise ParseError(f"day {label}: non-positive level cannot be logged", row=first_row + int(bad[0, 0]))
        values = np.log(values)
    return np.diff(values, axis=0)


def ingest_csv(
    path: str,
    fmt: DataFormat = DataFormat.LEVELS,
    date_col: str = "date",
    value_cols: Sequence[str] = ("x1", "x2"),
    time_col: Optional[str] = None,
    tolerance: float = SPACING_TOLERANCE,
) -> List[DayRecord]:
    """Group rows by ``date_col`` and turn each day into an increment series.

    ``LEVELS`` and ``LOG_LEVELS`` difference (log-)levels within the day, so a
    day with ``n + 1`` rows gives ``n`` increments; ``RETURNS`` uses the values
    as they are. Each day is mapped to the unit interval. With ``time_col``
    the observation times are checked for regular spacing.

    Raises
    ------
    ParseError
        Missing columns, empty or non-numeric cells; the message carries the
        1-based file row (the header is row 1).
    GapError
        A day whose spacing deviates more than ``tolerance`` (relative) from
        its modal spacing, which is how missing rows show up.
    """
    fmt = DataFormat(fmt)
    days: Dict[str, list] = {}
    order: List[str] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("file is empty", row=1)
        needed = [date_col, *value_cols] + ([time_col] if time_col else [])
        missing = [c for c in needed if c not in reader.fieldnames]
        if missing:
            raise ParseError(f"missing column(s) {', '.join(missing)}", row=1)
        for row_no, row in enumerate(reader, start=2):
            label = (row.get(date_col) or "").strip()
            if not label:
                raise ParseError(f"empty {date_col!r} cell", row=row_no)
            try:
                vals = [float(row[c]) for c in value_cols]
            except (TypeError, ValueError):
                raise ParseError(f"non-numeric value in {', '.join(value_cols)}", row=row_no) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite value", row=row_no)
            t = None
            if time_col:
                try:
                    t = _parse_time(row[time_col] or "")
                except ValueError:
                    raise ParseError(f"unparseable time {row[time_col]!r}", row=row_no) from None
            if label not in days:
                days[label] = []
                order.append(label)
            days[label].append((row_no, t, vals))

    records = []
    for label in order:
        rows = days[label]
        if time_col:
            check_spacing([t for _, t, _ in rows], label, tolerance)
        values = np.array([v for _, _, v in rows], dtype=float)
        incs = _increments(values, fmt, label, rows[0][0])
        if incs.shape[0] < 1:
            raise ParseError(f"day {label} has too few rows", row=rows[0][0])
        records.append(DayRecord(label, IncrementSeries.from_array(incs, horizon=1.0)))
    return records

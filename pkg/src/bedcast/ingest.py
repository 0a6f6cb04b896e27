"""Admission-record parsing and per-site daily series construction.

Turns a raw admissions CSV (site, admit date, length of stay) into the
calendar-indexed arrays the rest of the pipeline consumes: daily admission
counts, daily mean LOS (gap-filled), and the reconstructed bed census.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import AllGaps, BadDate, EmptyWindow, MissingColumn, NegativeLos

DEFAULT_SCHEMA = {"site_id": "site_id", "admit_date": "admit_date", "los_days": "los_days"}

GAP = float("nan")


@dataclass(frozen=True)
class AdmissionRecord:
    """One patient stay: where, when admitted, and for how long (days)."""

    site_id: str
    admit_date: date
    los_days: float


@dataclass
class DailySiteSeries:
    """Per-site daily arrays over a contiguous calendar window.

    ``mean_los`` uses NaN as the gap marker on days with no admissions until
    :func:`fill_gaps` is applied; ``filled`` flags the days whose value was
    imputed so downstream consumers can audit them.
    """

    site_id: str
    start: date
    admit_count: np.ndarray
    mean_los: np.ndarray
    census: np.ndarray
    filled: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.filled is None:
            self.filled = np.zeros(len(self.admit_count), dtype=bool)

    def __len__(self) -> int:
        return len(self.admit_count)

    @property
    def dates(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range(len(self))]

    def index_of(self, day: date) -> int:
        return (day - self.start).days

    def to_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["date", "admit_count", "mean_los", "census", "filled"])
        for i, d in enumerate(self.dates):
            los = self.mean_los[i]
            w.writerow([
                d.isoformat(),
                int(self.admit_count[i]),
                "" if math.isnan(los) else repr(float(los)),
                int(self.census[i]),
                int(self.filled[i]),
            ])

    @classmethod
    def from_csv(cls, stream: TextIO, site_id: str) -> "DailySiteSeries":
        rows = list(csv.DictReader(stream))
        if not rows:
            raise EmptyWindow(f"no rows in series file for site {site_id}")
        start = date.fromisoformat(rows[0]["date"])
        counts = np.array([int(r["admit_count"]) for r in rows])
        los = np.array([float(r["mean_los"]) if r["mean_los"] else GAP for r in rows])
        census = np.array([int(r["census"]) for r in rows])
        filled = np.array([bool(int(r["filled"])) for r in rows])
        return cls(site_id, start, counts, los, census, filled)

    def to_json(self) -> str:
        return json.dumps(
            {
                "site_id": self.site_id,
                "start": self.start.isoformat(),
                "admit_count": [int(c) for c in self.admit_count],
                "mean_los": [None if math.isnan(v) else float(v) for v in self.mean_los],
                "census": [int(c) for c in self.census],
                "filled": [bool(f) for f in self.filled],
            },
            sort_keys=True,
        )


def parse_admissions(
    stream: TextIO | str,
    schema: dict[str, str] | None = None,
) -> list[AdmissionRecord]:
    """Parse an admissions CSV into records.

    ``schema`` maps the logical field names (site_id, admit_date, los_days)
    to the CSV header names.  Raises on the first bad row, carrying its
    1-based data row number.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    for logical in ("site_id", "admit_date", "los_days"):
        if schema[logical] not in header:
            raise MissingColumn(schema[logical])

    records = []
    for row_no, row in enumerate(reader, start=1):
        raw_date = (row[schema["admit_date"]] or "").strip()
        try:
            admit = date.fromisoformat(raw_date)
        except ValueError:
            raise BadDate(row_no, raw_date) from None
        raw_los = (row[schema["los_days"]] or "").strip()
        try:
            los = float(raw_los)
        except ValueError:
            raise BadDate(row_no, raw_los) from None
        if not math.isfinite(los) or los < 0:
            raise NegativeLos(row_no, raw_los)
        records.append(AdmissionRecord(row[schema["site_id"]].strip(), admit, los))
    return records


def _window_length(window: tuple[date, date]) -> int:
    start, end = window
    n = (end - start).days + 1
    if n <= 0:
        raise EmptyWindow(f"window {start}..{end} is empty")
    return n


def build_daily_series(
    records: Iterable[AdmissionRecord],
    site_id: str,
    window: tuple[date, date],
) -> DailySiteSeries:
    """Aggregate one site's records into daily counts and daily mean LOS.

    Days without admissions get a NaN gap marker in ``mean_los``; call
    :func:`fill_gaps` before handing the series to the decomposition stage.
    """
    n = _window_length(window)
    start = window[0]
    counts = np.zeros(n, dtype=int)
    los_sum = np.zeros(n)
    site_records = [r for r in records if r.site_id == site_id]
    for r in site_records:
        i = (r.admit_date - start).days
        if i < 0 or i >= n:
            raise ValueError(
                f"record dated {r.admit_date} outside window {window[0]}..{window[1]}"
            )
        counts[i] += 1
        los_sum[i] += r.los_days
    with np.errstate(invalid="ignore"):
        mean_los = np.where(counts > 0, los_sum / np.maximum(counts, 1), GAP)
    census = reconstruct_census(site_records, site_id, window)
    return DailySiteSeries(site_id, start, counts, mean_los, census)


def fill_gaps(series: DailySiteSeries) -> DailySiteSeries:
    """Complete ``mean_los`` by linear interpolation of interior gaps.

    Leading/trailing gaps take the nearest observed value.  Idempotent;
    observed values are never touched.  The returned series flags imputed
    days in ``filled``.
    """
    los = np.asarray(series.mean_los, dtype=float)
    known = ~np.isnan(los)
    if not known.any():
        raise AllGaps(f"site {series.site_id}: no observed mean LOS values")
    idx = np.arange(len(los))
    completed = np.interp(idx, idx[known], los[known])
    return DailySiteSeries(
        series.site_id,
        series.start,
        series.admit_count.copy(),
        completed,
        series.census.copy(),
        series.filled | ~known,
    )


def reconstruct_census(
    records: Iterable[AdmissionRecord],
    site_id: str,
    window: tuple[date, date],
) -> np.ndarray:
    """Rebuild the daily bed census implied by the stays.

    A stay of s days starting on day d blocks a bed on days
    d .. d + ceil(s) - 1: any partial day makes the bed unavailable for the
    whole day.  Stays extending past the window are clipped to it.
    """
    n = _window_length(window)
    start = window[0]
    diff = np.zeros(n + 1, dtype=int)
    for r in records:
        if r.site_id != site_id:
            continue
        d = (r.admit_date - start).days
        occupied = math.ceil(r.los_days)
        if occupied == 0:
            continue
        lo = max(d, 0)
        hi = min(d + occupied, n)
        if lo < hi:
            diff[lo] += 1
            diff[hi] -= 1
    return np.cumsum(diff[:-1])


def sites_in(records: Iterable[AdmissionRecord]) -> list[str]:
    """Distinct site ids in first-appearance order."""
    seen: dict[str, None] = {}
    for r in records:
        seen.setdefault(r.site_id, None)
    return list(seen)


def records_window(records: Sequence[AdmissionRecord]) -> tuple[date, date]:
    """Smallest window covering every admission date."""
    if not records:
        raise EmptyWindow("no records")
    dates = [r.admit_date for r in records]
    return min(dates), max(dates)

"""ADS-B CSV ingestion: record parsing, trajectory cleaning, minute aggregation.

The raw schema is a header row with columns timestamp, utc_time, callsign,
longitude, latitude, altitude, velocity, heading (case-insensitive, extra
columns ignored). Missing cells are carried as None, never as zero.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import Iterable, TextIO

from .domain import Trajectory, Waypoint, circular_mean, round_waypoint, validate_waypoint

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = (
    "timestamp",
    "utc_time",
    "callsign",
    "longitude",
    "latitude",
    "altitude",
    "velocity",
    "heading",
)

NUMERIC_COLUMNS = ("longitude", "latitude", "altitude", "velocity", "heading")

_INT_RE = re.compile(r"^[+-]?\d+$")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)$")


class MalformedRowError(ValueError):
    """A CSV row that cannot be mapped onto the declared header."""


@dataclass(frozen=True)
class RawRecord:
    """One ADS-B report; any field may be None when the cell was missing."""

    timestamp: int | None
    utc_time: str | None
    callsign: str | None
    longitude: float | None
    latitude: float | None
    altitude: float | None
    velocity: float | None
    heading: float | None

    def missing_fields(self) -> list[str]:
        return [f.name for f in fields(self) if getattr(self, f.name) is None]

    @property
    def is_complete(self) -> bool:
        return not self.missing_fields()


@dataclass(frozen=True)
class Header:
    """Column positions resolved from a CSV header row."""

    indexes: dict[str, int]
    width: int

    def index(self, name: str) -> int:
        return self.indexes[name]


def parse_header(cells: list[str] | str) -> Header:
    """Resolve the required columns from a header row (case-insensitive)."""
    if isinstance(cells, str):
        cells = next(csv.reader([cells]))
    lowered = [c.strip().lower() for c in cells]
    indexes: dict[str, int] = {}
    for name in REQUIRED_COLUMNS:
        if name not in lowered:
            raise MalformedRowError(f"header is missing required column {name!r}")
        indexes[name] = lowered.index(name)
    return Header(indexes=indexes, width=len(cells))


def parse_record(
    line: str | list[str],
    header: Header,
    *,
    row_number: int | None = None,
    strict: bool = False,
) -> RawRecord:
    """Parse one CSV row into a RawRecord.

    Numeric cells accept base-10 with optional sign and fraction. Empty
    cells become None in both modes; a non-numeric cell in a numeric
    column becomes None in tolerant mode and raises in strict mode.
    A row whose cell count differs from the header always raises.
    """
    cells = next(csv.reader([line])) if isinstance(line, str) else list(line)
    where = f" (row {row_number})" if row_number is not None else ""
    if len(cells) != header.width:
        raise MalformedRowError(
            f"malformed row{where}: expected {header.width} cells, got {len(cells)}"
        )

    def text_cell(name: str) -> str | None:
        value = cells[header.index(name)].strip()
        return value or None

    def numeric_cell(name: str, pattern: re.Pattern[str]) -> str | None:
        value = cells[header.index(name)].strip()
        if not value:
            return None
        if not pattern.match(value):
            if strict:
                raise MalformedRowError(
                    f"malformed row{where}: non-numeric {name} cell {value!r}"
                )
            return None
        return value

    ts_text = numeric_cell("timestamp", _INT_RE)
    numeric: dict[str, float | None] = {}
    for name in NUMERIC_COLUMNS:
        cell = numeric_cell(name, _NUMBER_RE)
        numeric[name] = float(cell) if cell is not None else None

    record = RawRecord(
        timestamp=int(ts_text) if ts_text is not None else None,
        utc_time=text_cell("utc_time"),
        callsign=text_cell("callsign"),
        **numeric,
    )
    _check_utc_agreement(record, where)
    return record


def _check_utc_agreement(record: RawRecord, where: str) -> None:
    # The Unix timestamp is authoritative; a disagreeing UTC column is
    # only worth a log line.
    if record.timestamp is None or record.utc_time is None:
        return
    try:
        parsed = datetime.strptime(record.utc_time, "%Y-%m-%d %H:%M:%S")
    except ValueError:
        logger.debug("unparseable utc_time %r%s", record.utc_time, where)
        return
    if int(parsed.replace(tzinfo=timezone.utc).timestamp()) != record.timestamp:
        logger.warning(
            "utc_time %r disagrees with timestamp %d%s",
            record.utc_time,
            record.timestamp,
            where,
        )


@dataclass
class CleaningResult:
    """Kept trajectories plus per-reason drop counts."""

    trajectories: list[Trajectory]
    kept: int = 0
    incomplete: int = 0
    invalid: int = 0
    duplicate: int = 0

    @property
    def total(self) -> int:
        return self.kept + self.incomplete + self.invalid + self.duplicate

    def summary(self) -> dict[str, int]:
        return {
            "kept": self.kept,
            "incomplete": self.incomplete,
            "invalid": self.invalid,
            "duplicate": self.duplicate,
        }


def _candidate_trajectories(records: list[RawRecord]) -> list[list[RawRecord]]:
    """Split one callsign's records into candidate trajectories.

    Records are stably sorted by timestamp; the k-th record seen at any
    given timestamp goes to candidate k. A feed that contains the same
    flight twice therefore produces two parallel candidates, which the
    duplicate check collapses; unique timestamps produce exactly one.
    """
    ordered = sorted(
        records, key=lambda r: (r.timestamp is None, r.timestamp if r.timestamp is not None else 0)
    )
    layers: list[list[RawRecord]] = []
    seen: dict[int | None, int] = {}
    for record in ordered:
        layer = seen.get(record.timestamp, 0)
        seen[record.timestamp] = layer + 1
        while len(layers) <= layer:
            layers.append([])
        layers[layer].append(record)
    return layers


def clean_trajectories(records: Iterable[RawRecord]) -> CleaningResult:
    """Group records into trajectories, dropping bad ones with counts.

    A candidate trajectory is dropped as *incomplete* if any record has a
    missing field, as *invalid* if any waypoint fails validation, and as
    *duplicate* if its (callsign, first timestamp, last timestamp) triple
    repeats one already kept (first occurrence wins). Survivors are
    canonically rounded. Output is sorted by callsign then first timestamp.
    """
    groups: dict[str | None, list[RawRecord]] = {}
    for record in records:
        groups.setdefault(record.callsign, []).append(record)

    result = CleaningResult(trajectories=[])
    seen_triples: set[tuple[str, int, int]] = set()
    for callsign in sorted(groups, key=lambda c: (c is None, c or "")):
        for candidate in _candidate_trajectories(groups[callsign]):
            if any(not r.is_complete for r in candidate):
                result.incomplete += 1
                continue
            waypoints = [
                Waypoint(r.timestamp, r.longitude, r.latitude, r.altitude, r.velocity, r.heading)
                for r in candidate
            ]
            verdicts = [validate_waypoint(w) for w in waypoints]
            if not all(verdicts):
                first_bad = next(v for v in verdicts if not v)
                logger.debug("dropping %s: %s", callsign, first_bad.reason)
                result.invalid += 1
                continue
            triple = (callsign, waypoints[0].timestamp, waypoints[-1].timestamp)
            if triple in seen_triples:
                result.duplicate += 1
                continue
            seen_triples.add(triple)
            result.kept += 1
            result.trajectories.append(
                Trajectory(callsign, tuple(round_waypoint(w) for w in waypoints))
            )

    result.trajectories.sort(key=lambda t: (t.callsign, t.waypoints[0].timestamp))
    return result


def minute_means(traj: Trajectory) -> list[tuple[int, tuple[float, float, float, float, float]]]:
    """Unrounded minute-bucket aggregates, as (bucket_timestamp, values).

    Buckets are floor(timestamp / 60); linear attributes are arithmetic
    means, heading is the circular mean. Exposed separately so the
    rounding step can be checked against these raw values.
    """
    buckets: dict[int, list[Waypoint]] = {}
    for w in traj.waypoints:
        buckets.setdefault(w.timestamp // 60, []).append(w)
    out = []
    for bucket in sorted(buckets):
        group = buckets[bucket]
        n = len(group)
        values = (
            sum(w.longitude for w in group) / n,
            sum(w.latitude for w in group) / n,
            sum(w.altitude for w in group) / n,
            sum(w.velocity for w in group) / n,
            circular_mean([w.heading for w in group]),
        )
        out.append((bucket * 60, values))
    return out


def aggregate_minutes(traj: Trajectory) -> Trajectory:
    """Aggregate a cleaned trajectory to one canonical waypoint per minute.

    Empty minutes yield no waypoint; the resulting gaps are handled by
    windowing, not here.
    """
    waypoints = tuple(
        round_waypoint(Waypoint(ts, *values)) for ts, values in minute_means(traj)
    )
    return Trajectory(traj.callsign, waypoints)


# --- CSV I/O ---------------------------------------------------------------


def read_adsb_csv(source: str | Path | TextIO, *, strict: bool = False) -> list[RawRecord]:
    """Read raw records from a CSV file or file-like object."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_adsb_csv(fh, strict=strict)
    reader = csv.reader(source)
    try:
        header = parse_header(next(reader))
    except StopIteration:
        raise MalformedRowError("empty file: header row required") from None
    records = []
    for row_number, cells in enumerate(reader, start=2):
        if not cells:
            continue
        records.append(parse_record(cells, header, row_number=row_number, strict=strict))
    return records


def _utc_text(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%Y-%m-%d %H:%M:%S")


def format_waypoint_row(callsign: str, w: Waypoint) -> list[str]:
    """Canonical CSV cells for one waypoint (fixed decimal counts)."""
    return [
        str(w.timestamp),
        _utc_text(w.timestamp),
        callsign,
        f"{w.longitude:.5f}",
        f"{w.latitude:.5f}",
        f"{w.altitude:.3f}",
        f"{w.velocity:.3f}",
        f"{w.heading:.2f}",
    ]


def write_trajectories_csv(trajectories: Iterable[Trajectory], target: str | Path | TextIO) -> None:
    """Write cleaned, aggregated trajectories back out in the input schema."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_trajectories_csv(trajectories, fh)
            return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for traj in trajectories:
        for w in traj.waypoints:
            writer.writerow(format_waypoint_row(traj.callsign, w))


def _plain_float_text(value: float) -> str:
    """Shortest round-trippable decimal, never in scientific notation.

    The raw-CSV number grammar has no exponent form, so tiny values like
    7.5e-14 must be written positionally.
    """
    text = repr(float(value))
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    return text


def write_records_csv(records: Iterable[RawRecord], target: str | Path | TextIO) -> None:
    """Write raw records (full float precision, None as empty cell)."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_records_csv(records, fh)
            return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for r in records:
        writer.writerow(
            [
                "" if r.timestamp is None else str(r.timestamp),
                r.utc_time or "",
                r.callsign or "",
            ]
            + [
                "" if v is None else _plain_float_text(v)
                for v in (r.longitude, r.latitude, r.altitude, r.velocity, r.heading)
            ]
        )


def records_to_csv_text(records: Iterable[RawRecord]) -> str:
    buf = io.StringIO()
    write_records_csv(records, buf)
    return buf.getvalue()

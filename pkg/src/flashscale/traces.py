"""HTTP access-log ingestion and CPU-demand aggregation.

Parses Common Log Format lines (the format used by the classic NASA
Kennedy Space Center web logs), loads flash-crowd hit traces from CSV,
and aggregates parsed requests into a uniformly sampled series of total
required CPU per interval. All functions here are pure: they never
mutate their inputs, so results are order-independent and safe to
compute in parallel chunks.
"""

from __future__ import annotations

import calendar
import math
from dataclasses import dataclass
from typing import BinaryIO, Callable, Iterable

import numpy as np


class MalformedLine(ValueError):
    """A log line that does not match Common Log Format.

    ``offset`` is the byte offset within the line of the first
    character that violated the format.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class IoFailure(OSError):
    """Underlying stream could not be read."""


class EmptyInput(ValueError):
    """An operation that needs at least one record received none."""


class OutOfRange(ValueError):
    """A splice would extend past the end of the base series."""


class BadHitTrace(ValueError):
    """Hit-trace CSV is missing the header or unevenly spaced."""


@dataclass(frozen=True)
class LogRecord:
    """One parsed HTTP request line.

    ``timestamp`` is seconds since the Unix epoch in UTC; the zone
    offset present in the log line has already been applied.
    ``nbytes`` is None when the log recorded ``-`` (no body).
    """

    host: str
    timestamp: float
    method: str
    path: str
    protocol: str | None
    status: int
    nbytes: int | None


@dataclass(frozen=True)
class HitSeries:
    """Hits-per-interval trace of a flash-crowd event.

    ``start_time`` is in seconds (epoch or relative, caller's choice);
    ``interval`` is the sample spacing in seconds.
    """

    start_time: float
    interval: float
    hits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hits", np.asarray(self.hits, dtype=np.float64))
        if self.interval <= 0:
            raise ValueError("interval must be positive")
        if self.hits.ndim != 1 or len(self.hits) == 0:
            raise ValueError("hits must be a non-empty 1-d sequence")
        if np.any(self.hits < 0):
            raise ValueError("hit counts must be non-negative")


@dataclass(frozen=True)
class WorkloadSeries:
    """Uniformly sampled series of total required CPU per interval.

    ``demand[i]`` covers the half-open window
    ``[start_time + i * interval, start_time + (i + 1) * interval)``
    in CPU capacity units per interval.
    """

    start_time: float
    interval: float
    demand: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "demand", np.asarray(self.demand, dtype=np.float64))
        if self.interval <= 0:
            raise ValueError("interval must be positive")
        if self.demand.ndim != 1 or len(self.demand) == 0:
            raise ValueError("demand must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(self.demand)) or np.any(self.demand < 0):
            raise ValueError("demand values must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.demand)

    def time_of(self, index: int) -> float:
        return self.start_time + index * self.interval

    def to_csv(self) -> str:
        """Serialize as ``index,start_epoch,interval_s,demand`` rows."""
        lines = ["index,start_epoch,interval_s,demand"]
        for i, value in enumerate(self.demand):
            lines.append(
                f"{i},{float(self.start_time)!r},{float(self.interval)!r},{float(value)!r}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "WorkloadSeries":
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows or rows[0] != "index,start_epoch,interval_s,demand":
            raise ValueError("missing workload CSV header")
        start = interval = None
        demand = []
        for row in rows[1:]:
            _, start_s, interval_s, value = row.split(",")
            start, interval = float(start_s), float(interval_s)
            demand.append(float(value))
        if start is None:
            raise EmptyInput("workload CSV has no data rows")
        return cls(start_time=start, interval=interval, demand=np.array(demand))


# A pluggable cost model maps one request to a non-negative CPU amount.
CpuCostModel = Callable[[LogRecord], float]


def unit_cost(record: LogRecord) -> float:
    """Default cost model: every request needs one CPU unit."""
    return 1.0


def bytes_cost(per_kib: float = 0.1, floor: float = 0.05) -> CpuCostModel:
    """Cost proportional to response size, for sensitivity runs."""

    def cost(record: LogRecord) -> float:
        if record.nbytes is None:
            return floor
        return floor + per_kib * record.nbytes / 1024.0

    return cost


_MONTHS = {
    "Jan": 1, "Feb": 2, "Mar": 3, "Apr": 4, "May": 5, "Jun": 6,
    "Jul": 7, "Aug": 8, "Sep": 9, "Oct": 10, "Nov": 11, "Dec": 12,
}

_ASCII_DIGITS = frozenset("0123456789")


def _ascii_int(token: str) -> int | None:
    # str.isdigit() accepts unicode digits that int() rejects, so gate
    # on ASCII explicitly; returns None for anything else.
    if token and all(ch in _ASCII_DIGITS for ch in token):
        return int(token)
    return None


def _parse_clf_timestamp(text: str, base_offset: int) -> float:
    # dd/Mon/yyyy:HH:MM:SS zone, zone like -0400 or +0130
    parts = text.split()
    if len(parts) != 2:
        raise MalformedLine("timestamp must be 'date zone'", base_offset)
    date_s, zone_s = parts
    pieces = date_s.replace("/", ":").split(":")
    if len(pieces) != 6:
        raise MalformedLine("date must be dd/Mon/yyyy:HH:MM:SS", base_offset)
    day_s, mon_s, year_s, hh_s, mm_s, ss_s = pieces
    if mon_s not in _MONTHS:
        raise MalformedLine(f"unknown month {mon_s!r}", base_offset + len(day_s) + 1)
    fields = [_ascii_int(token) for token in (day_s, year_s, hh_s, mm_s, ss_s)]
    if any(value is None for value in fields):
        raise MalformedLine("non-numeric date field", base_offset)
    day, year, hh, mm, ss = fields
    if not (1 <= day <= 31 and 0 <= hh <= 23 and 0 <= mm <= 59 and 0 <= ss <= 60):
        raise MalformedLine("date field out of range", base_offset)
    zone_hh = _ascii_int(zone_s[1:3]) if len(zone_s) == 5 else None
    zone_mm = _ascii_int(zone_s[3:5]) if len(zone_s) == 5 else None
    if len(zone_s) != 5 or zone_s[0] not in "+-" or zone_hh is None or zone_mm is None:
        raise MalformedLine(f"bad zone {zone_s!r}", base_offset + len(date_s) + 1)
    try:
        epoch = calendar.timegm((year, _MONTHS[mon_s], day, hh, mm, ss, 0, 0, 0))
    except (ValueError, OverflowError):
        raise MalformedLine("invalid calendar date", base_offset) from None
    zone_minutes = zone_hh * 60 + zone_mm
    if zone_s[0] == "-":
        zone_minutes = -zone_minutes
    # Local time = UTC + zone, so UTC = local - zone.
    return float(epoch - zone_minutes * 60)


def parse_clf_line(line: str) -> LogRecord:
    """Parse one Common Log Format line into a LogRecord.

    Accepts ``host ident authuser [date] "request" status bytes``.
    The request is ``METHOD path`` optionally followed by a protocol
    token. A bytes field of ``-`` maps to None. Raises MalformedLine
    (never anything else) on any input that does not fit, with the byte
    offset of the first violation.
    """
    if not isinstance(line, str):
        raise MalformedLine("line must be text", 0)
    line = line.rstrip("\r\n")
    if not line.strip():
        raise MalformedLine("empty line", 0)

    bracket = line.find("[")
    if bracket < 0:
        raise MalformedLine("no timestamp bracket", len(line))
    head = line[:bracket].split()
    if len(head) != 3:
        raise MalformedLine("expected host, ident, authuser before timestamp", 0)
    host = head[0]

    bracket_end = line.find("]", bracket)
    if bracket_end < 0:
        raise MalformedLine("unterminated timestamp bracket", bracket)
    timestamp = _parse_clf_timestamp(line[bracket + 1 : bracket_end], bracket + 1)

    quote = line.find('"', bracket_end)
    if quote < 0:
        raise MalformedLine("no request field", bracket_end + 1)
    quote_end = line.find('"', quote + 1)
    if quote_end < 0:
        raise MalformedLine("unterminated request field", quote)
    request = line[quote + 1 : quote_end].split()
    if len(request) == 2:
        method, path = request
        protocol = None
    elif len(request) == 3:
        method, path, protocol = request
    else:
        raise MalformedLine("request must be METHOD path [protocol]", quote + 1)

    tail = line[quote_end + 1 :].split()
    if len(tail) < 2:
        raise MalformedLine("missing status or bytes field", quote_end + 1)
    status_s, bytes_s = tail[0], tail[1]
    status = _ascii_int(status_s)
    if status is None:
        raise MalformedLine(f"non-numeric status {status_s!r}", quote_end + 2)
    if not 100 <= status <= 599:
        raise MalformedLine(f"status {status} outside [100, 599]", quote_end + 2)
    if bytes_s == "-":
        nbytes = None
    else:
        nbytes = _ascii_int(bytes_s)
        if nbytes is None:
            raise MalformedLine(f"bad bytes field {bytes_s!r}", quote_end + 2)

    return LogRecord(
        host=host,
        timestamp=timestamp,
        method=method,
        path=path,
        protocol=protocol,
        status=status,
        nbytes=nbytes,
    )


def load_trace(source: BinaryIO) -> tuple[list[LogRecord], int]:
    """Read an access log stream, skipping and counting malformed lines.

    Returns ``(records, skipped_count)`` in file order. Lines are
    decoded as latin-1 so arbitrary bytes never abort the load; only a
    failing read raises (IoFailure).
    """
    records: list[LogRecord] = []
    skipped = 0
    try:
        raw = source.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    text = raw.decode("latin-1") if isinstance(raw, bytes) else raw
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            records.append(parse_clf_line(line))
        except MalformedLine:
            skipped += 1
    return records, skipped


def load_hit_csv(text: str) -> HitSeries:
    """Load a flash-crowd trace from CSV with header ``time_seconds,hits``.

    Rows must be evenly spaced; the spacing becomes the series interval.
    """
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows or rows[0].strip() != "time_seconds,hits":
        raise BadHitTrace("expected header 'time_seconds,hits'")
    if len(rows) < 3:
        raise BadHitTrace("need at least two data rows to infer the interval")
    times = []
    hits = []
    for row in rows[1:]:
        try:
            time_s, hits_s = row.split(",")
            times.append(float(time_s))
            hits.append(float(hits_s))
        except ValueError:
            raise BadHitTrace(f"bad hit-trace row {row!r}") from None
    deltas = np.diff(times)
    if not np.allclose(deltas, deltas[0]):
        raise BadHitTrace("hit trace rows are not evenly spaced")
    return HitSeries(start_time=times[0], interval=float(deltas[0]), hits=np.array(hits))


def aggregate_demand(
    records: Iterable[LogRecord],
    interval: float,
    cost: CpuCostModel = unit_cost,
) -> WorkloadSeries:
    """Aggregate request records into total required CPU per interval.

    ``demand[i]`` sums ``cost(r)`` over records with timestamp in
    ``[start + i * interval, start + (i + 1) * interval)`` where
    ``start`` is the earliest timestamp floored to an interval
    boundary. Intervals with no records are zero. Input order is
    irrelevant.
    """
    if interval <= 0:
        raise ValueError("interval must be positive")
    records = list(records)
    if not records:
        raise EmptyInput("no records to aggregate")
    times = np.array([r.timestamp for r in records])
    costs = np.array([float(cost(r)) for r in records])
    if np.any(costs < 0):
        raise ValueError("cost model returned a negative cost")
    start = math.floor(times.min() / interval) * interval
    bins = np.floor((times - start) / interval).astype(np.int64)
    demand = np.zeros(int(bins.max()) + 1)
    np.add.at(demand, bins, costs)
    return WorkloadSeries(start_time=float(start), interval=float(interval), demand=demand)


def resample_hits(spike: HitSeries, interval: float) -> np.ndarray:
    """Re-bin a hit trace onto a coarser interval by summation.

    The spike interval must divide the target interval evenly.
    """
    ratio = interval / spike.interval
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ValueError(
            f"spike interval {spike.interval} does not divide target {interval}"
        )
    ratio = int(round(ratio))
    if ratio == 1:
        return spike.hits.copy()
    n_out = math.ceil(len(spike.hits) / ratio)
    padded = np.zeros(n_out * ratio)
    padded[: len(spike.hits)] = spike.hits
    return padded.reshape(n_out, ratio).sum(axis=1)


def splice_slashdot(
    base: WorkloadSeries,
    spike: HitSeries,
    offset: int,
    cost_per_hit: float = 1.0,
) -> WorkloadSeries:
    """Add a flash-crowd spike onto a base workload at an interval offset.

    The spike is resampled to the base interval by summation, scaled by
    ``cost_per_hit``, and added element-wise starting at index
    ``offset``. Everything outside the spike span is unchanged.
    """
    if offset < 0:
        raise OutOfRange(f"offset {offset} is negative")
    extra = resample_hits(spike, base.interval) * cost_per_hit
    if offset + len(extra) > len(base):
        raise OutOfRange(
            f"spike of {len(extra)} intervals at offset {offset} "
            f"extends past base length {len(base)}"
        )
    demand = base.demand.copy()
    demand[offset : offset + len(extra)] += extra
    return WorkloadSeries(base.start_time, base.interval, demand)

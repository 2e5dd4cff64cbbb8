"""Parsing of delimited event logs into time-ordered cases."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from typing import BinaryIO, Iterable, Sequence

# Day-first; strptime accepts unpadded day/month/hour for %d/%m/%H.
DEFAULT_TIMESTAMP_FORMATS = (
    "%d-%m-%Y %H:%M:%S",
    "%d-%m-%Y %H:%M",
    "%d/%m/%Y %H:%M:%S",
    "%d/%m/%Y %H:%M",
)


class IngestError(ValueError):
    """Fatal problem with the log as a whole (unreadable, empty, bad header)."""


@dataclass(frozen=True)
class IngestConfig:
    delimiter: str = ";"
    case_col: str = "case_id"
    activity_col: str = "activity"
    timestamp_col: str = "timestamp"
    timestamp_formats: tuple[str, ...] = DEFAULT_TIMESTAMP_FORMATS
    tiebreak_col: str | None = None


@dataclass(frozen=True)
class EventRecord:
    case_id: str
    activity: str
    timestamp: datetime
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.case_id:
            raise ValueError("case_id must be non-empty")
        if not self.activity.strip():
            raise ValueError("activity must be non-empty")


@dataclass(frozen=True)
class RawCase:
    case_id: str
    events: tuple[EventRecord, ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError(f"case {self.case_id!r} has no events")

    @property
    def activities(self) -> list[str]:
        return [e.activity for e in self.events]


@dataclass(frozen=True)
class IngestSummary:
    total_rows: int
    parsed_rows: int
    skipped_rows: int
    case_count: int
    event_count: int
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "parsed_rows": self.parsed_rows,
            "skipped_rows": self.skipped_rows,
            "case_count": self.case_count,
            "event_count": self.event_count,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
        }


def parse_timestamp(text: str, formats: Sequence[str]) -> datetime | None:
    """Return the first successful parse of `text` under `formats`, else None."""
    text = text.strip()
    for fmt in formats:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    return None


def _read_text(source: BinaryIO | bytes | str) -> str:
    if isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        try:
            data = source.read()
        except OSError as exc:
            raise IngestError(f"cannot read event log: {exc}") from exc
    if isinstance(data, str):
        return data
    text = data.decode("utf-8", errors="replace")
    return text[1:] if text.startswith("﻿") else text


def parse_log(source, config: IngestConfig = IngestConfig()) -> tuple[list[RawCase], IngestSummary]:
    """Parse a delimited event log and group its rows into cases.

    `source` may be a binary stream, raw bytes or a file path. Rows with a
    missing case id, a blank activity or an unparseable timestamp are
    skipped and counted by reason. Events of a case are ordered by
    timestamp, then by the tie-break column if configured, then by file
    order. Cases are returned in order of first appearance.
    """
    try:
        text = _read_text(source)
    except OSError as exc:
        raise IngestError(f"cannot read event log: {exc}") from exc

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=config.delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestError("empty log: no header row") from None

    wanted = [config.case_col, config.activity_col, config.timestamp_col]
    if config.tiebreak_col:
        wanted.append(config.tiebreak_col)
    missing = [c for c in wanted if c not in header]
    if missing:
        raise IngestError(f"missing columns {missing} in header {header}")
    i_case = header.index(config.case_col)
    i_act = header.index(config.activity_col)
    i_ts = header.index(config.timestamp_col)
    i_tie = header.index(config.tiebreak_col) if config.tiebreak_col else None
    used = {i_case, i_act, i_ts}
    extra = [(i, h) for i, h in enumerate(header) if i not in used]

    total = 0
    reasons: Counter[str] = Counter()
    # case_id -> list of (timestamp, tiebreak, row number, record)
    grouped: dict[str, list] = {}
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        total += 1
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        case_id = row[i_case].strip()
        activity = row[i_act].strip()
        if not case_id:
            reasons["missing case id"] += 1
            continue
        if not activity:
            reasons["missing activity"] += 1
            continue
        ts = parse_timestamp(row[i_ts], config.timestamp_formats)
        if ts is None:
            reasons["bad timestamp"] += 1
            continue
        attrs = tuple((h, row[i]) for i, h in extra)
        rec = EventRecord(case_id, activity, ts, attrs)
        tie = row[i_tie].strip() if i_tie is not None else ""
        grouped.setdefault(case_id, []).append((ts, tie, total, rec))

    parsed = total - sum(reasons.values())
    if parsed == 0:
        raise IngestError("empty log: no parseable rows")

    cases = []
    for case_id, items in grouped.items():
        items.sort(key=lambda t: t[:3])
        cases.append(RawCase(case_id, tuple(t[3] for t in items)))

    summary = IngestSummary(
        total_rows=total,
        parsed_rows=parsed,
        skipped_rows=total - parsed,
        case_count=len(cases),
        event_count=sum(len(c.events) for c in cases),
        skip_reasons=dict(reasons),
    )
    return cases, summary


def case_length_histogram(cases: Iterable[RawCase]) -> dict[int, int]:
    """Number of cases per events-per-case value, keyed ascending."""
    counts = Counter(len(c.events) for c in cases)
    if not counts:
        raise ValueError("case_length_histogram needs at least one case")
    return dict(sorted(counts.items()))


def write_log(cases: Iterable[RawCase], sink, config: IngestConfig = IngestConfig(),
              timestamp_format: str | None = None) -> None:
    """Write cases as a delimited log that `parse_log` reads back with `config`."""
    fmt = timestamp_format or config.timestamp_formats[0]
    cases = list(cases)
    attr_cols: list[str] = []
    for c in cases:
        for e in c.events:
            for k, _ in e.attributes:
                if k not in attr_cols:
                    attr_cols.append(k)
    writer = csv.writer(sink, delimiter=config.delimiter, lineterminator="\n")
    writer.writerow([config.case_col, config.timestamp_col, config.activity_col, *attr_cols])
    for c in cases:
        for e in c.events:
            attrs = dict(e.attributes)
            writer.writerow([e.case_id, e.timestamp.strftime(fmt), e.activity,
                             *(attrs.get(k, "") for k in attr_cols)])

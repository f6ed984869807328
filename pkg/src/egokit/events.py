"""Chronological multimodal event log.

Every piece of first-person experience the runtime reasons over lives here:
visual narration lines and spoken utterances, each reduced to a timestamped,
normalized text record. The log is kept sorted at all times so downstream
window queries are simple slices.
"""
from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

VISUAL = "visual"
SPOKEN = "spoken"
MODALITIES = (VISUAL, SPOKEN)

_WS = re.compile(r"\s+")

SESSION_EPOCH = datetime(2000, 1, 1, 0, 0, 0)


class EmptyContent(ValueError):
    """Event content normalized to the empty string."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def normalize_content(text: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces."""
    return _WS.sub(" ", text).strip()


@dataclass(frozen=True)
class Event:
    timestamp: int  # milliseconds since session epoch
    modality: str
    content: str
    source_id: str = ""

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp: {self.timestamp}")
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality: {self.modality!r}")
        normalized = normalize_content(self.content)
        if not normalized:
            raise EmptyContent("event content is empty after normalization")
        object.__setattr__(self, "content", normalized)


@dataclass(frozen=True)
class TimeWindow:
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"window start {self.start} > end {self.end}")

    def contains(self, t: int) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class EventLog:
    """Immutable snapshot of the sorted event sequence.

    Appends return a new snapshot; equal timestamps preserve insertion order,
    and late arrivals slot in at their sorted position without disturbing
    what is already there.
    """

    events: tuple[Event, ...] = ()
    epoch: datetime = SESSION_EPOCH
    _keys: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        keys = tuple(e.timestamp for e in self.events)
        if any(a > b for a, b in zip(keys, keys[1:])):
            raise ValueError("events out of order")
        object.__setattr__(self, "_keys", keys)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    @property
    def span(self) -> TimeWindow:
        if not self.events:
            return TimeWindow(0, 0)
        return TimeWindow(self._keys[0], self._keys[-1])


def append_event(log: EventLog, e: Event) -> EventLog:
    """Insert ``e`` at its sorted position (after any equal timestamps)."""
    i = bisect_right(log._keys, e.timestamp)
    return replace(log, events=log.events[:i] + (e,) + log.events[i:])


def extend_log(log: EventLog, events: Iterable[Event]) -> EventLog:
    for e in events:
        log = append_event(log, e)
    return log


def query_range(log: EventLog, w: TimeWindow) -> tuple[Event, ...]:
    """Events with ``w.start <= timestamp <= w.end``, in log order."""
    lo = bisect_left(log._keys, w.start)
    hi = bisect_right(log._keys, w.end)
    return log.events[lo:hi]


def serialize_event(e: Event) -> str:
    # Normalization removed tabs/newlines from content, so four TSV fields
    # round-trip unambiguously.
    return f"{e.timestamp}\t{e.modality}\t{e.source_id}\t{e.content}"


def serialize_log(log: EventLog) -> str:
    return "".join(serialize_event(e) + "\n" for e in log.events)


def parse_log_line(line: str, lineno: int) -> Event:
    parts = line.split("\t", 3)
    if len(parts) != 4:
        raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", lineno)
    ts_text, modality, source_id, content = parts
    try:
        timestamp = int(ts_text)
    except ValueError:
        raise ParseError(f"bad timestamp {ts_text!r}", lineno) from None
    if timestamp < 0:
        raise ParseError(f"negative timestamp {timestamp}", lineno)
    if modality not in MODALITIES:
        raise ParseError(f"unknown modality {modality!r}", lineno)
    try:
        return Event(timestamp, modality, content, source_id)
    except EmptyContent:
        raise ParseError("empty content", lineno) from None


def ingest_log_lines(lines: Iterable[str], epoch: datetime = SESSION_EPOCH) -> EventLog:
    log = EventLog(epoch=epoch)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        log = append_event(log, parse_log_line(line, lineno))
    return log


def ingest_log_file(path: str | Path, epoch: datetime = SESSION_EPOCH) -> EventLog:
    """Read a tab-separated event file (one record per line, UTF-8)."""
    with open(path, encoding="utf-8") as fh:
        return ingest_log_lines(fh, epoch=epoch)

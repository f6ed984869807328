"""Query-specific context assembly under a token budget.

Two mechanisms cooperate: long-horizon compression (partition the past into
aligned chunks, summarize each against the query, keep the most relevant
summaries) and short-horizon window selection (parse an explicit temporal
hint from the query, or fall back to a recency window). The assembled bundle
renders to plain text lines and is guaranteed never to exceed its budget.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .events import Event, EventLog, TimeWindow, query_range
from .providers import ProviderFailure, SummarizerProvider

HOUR_MS = 3_600_000


def estimate_tokens(text: str) -> int:
    """Model-free token estimate: one token per 4 characters, rounded up."""
    return (len(text) + 3) // 4


@dataclass(frozen=True)
class ContextConfig:
    chunk_duration: int = HOUR_MS
    per_summary_cap: int = 64  # estimated tokens per chunk summary
    long_term_share: float = 0.3
    storyline_share: float = 0.7
    default_window: int = 900_000  # fallback lookback when no hint parses


DEFAULT_CONFIG = ContextConfig()


class InvalidDuration(ValueError):
    pass


class InvalidBudget(ValueError):
    pass


@dataclass(frozen=True)
class Chunk:
    window: TimeWindow
    events: tuple[Event, ...]

    def text(self) -> str:
        return "\n".join(e.content for e in self.events)


@dataclass(frozen=True)
class ChunkSummary:
    window: TimeWindow
    text: str
    relevance: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.relevance <= 1.0:
            raise ValueError(f"relevance {self.relevance} outside [0, 1]")


@dataclass(frozen=True)
class ContextBundle:
    long_term: tuple[ChunkSummary, ...]
    storyline: tuple[Event, ...]
    budget: int
    used: int
    window: TimeWindow


def render_summary_line(s: ChunkSummary) -> str:
    return f"[SUMMARY {s.window.start}–{s.window.end}] {s.text}"


def render_event_line(e: Event) -> str:
    return f"[t={e.timestamp} {e.modality}] {e.content}"


def render_bundle(bundle: ContextBundle) -> str:
    lines = [render_summary_line(s) for s in bundle.long_term]
    lines += [render_event_line(e) for e in bundle.storyline]
    return "".join(line + "\n" for line in lines)


def _line_cost(line: str) -> int:
    # Charge the newline too so per-line costs upper-bound the rendered total.
    return estimate_tokens(line + "\n")


def partition_chunks(log: EventLog, chunk_duration: int = HOUR_MS) -> tuple[Chunk, ...]:
    """Group events by ``floor(t / chunk_duration)``; windows are aligned to
    multiples of the duration from the epoch and empty chunks are omitted."""
    if chunk_duration <= 0:
        raise InvalidDuration(f"chunk_duration must be positive, got {chunk_duration}")
    buckets: dict[int, list[Event]] = {}
    for e in log:
        buckets.setdefault(e.timestamp // chunk_duration, []).append(e)
    chunks = []
    for k in sorted(buckets):
        window = TimeWindow(k * chunk_duration, (k + 1) * chunk_duration - 1)
        chunks.append(Chunk(window, tuple(buckets[k])))
    return tuple(chunks)


def summarize_and_select(
    chunks: tuple[Chunk, ...],
    query: str,
    provider: SummarizerProvider,
    budget: int,
    cfg: ContextConfig = DEFAULT_CONFIG,
) -> tuple[ChunkSummary, ...]:
    """Summarize every chunk, then greedily keep the most relevant summaries
    (ties favor the earlier window) until the next one would push the
    long-term share of the budget over its cap. Output is chronological."""
    if budget <= 0:
        raise InvalidBudget(f"budget must be positive, got {budget}")
    summaries = []
    for chunk in chunks:
        try:
            text, relevance = provider(chunk.text(), query)
        except Exception as exc:
            raise ProviderFailure(
                f"summarizer failed on chunk [{chunk.window.start}, {chunk.window.end}]: {exc}"
            ) from exc
        text = normalize_summary(text, cfg.per_summary_cap)
        relevance = min(1.0, max(0.0, relevance))
        summaries.append(ChunkSummary(chunk.window, text, relevance))

    share = int(budget * cfg.long_term_share)
    selected: list[ChunkSummary] = []
    used = 0
    for s in sorted(summaries, key=lambda s: (-s.relevance, s.window.start)):
        cost = _line_cost(render_summary_line(s))
        if used + cost > share:
            break
        selected.append(s)
        used += cost
    selected.sort(key=lambda s: s.window.start)
    return tuple(selected)


def normalize_summary(text: str, cap: int) -> str:
    text = " ".join(text.split())
    max_chars = cap * 4
    return text[:max_chars] if len(text) > max_chars else text


_BETWEEN = re.compile(r"between\s+(\d{1,2}):(\d{2})\s+and\s+(\d{1,2}):(\d{2})", re.I)
_LAST = re.compile(r"last\s+(\d+)\s+(minutes?|seconds?)", re.I)
_AT = re.compile(r"\bat\s+(\d{1,2}):(\d{2})", re.I)


def tcot_window(
    query: str,
    log: EventLog,
    now: int,
    cfg: ContextConfig = DEFAULT_CONFIG,
) -> TimeWindow:
    """Pick the short-horizon window for the query.

    Recognized hints: ``between HH:MM and HH:MM``, ``last N minutes|seconds``,
    ``at HH:MM`` (the named minute), all read against the session epoch's
    time of day. Without a hint, the window is the trailing default lookback.
    """
    epoch_ms = (log.epoch.hour * 3600 + log.epoch.minute * 60 + log.epoch.second) * 1000

    def clock_to_session(hh: str, mm: str) -> int:
        return (int(hh) * 3600 + int(mm) * 60) * 1000 - epoch_ms

    def clamp(t: int) -> int:
        return max(0, min(now, t))

    m = _BETWEEN.search(query)
    if m:
        a = clamp(clock_to_session(m.group(1), m.group(2)))
        b = clamp(clock_to_session(m.group(3), m.group(4)))
        return TimeWindow(min(a, b), max(a, b))
    m = _LAST.search(query)
    if m:
        unit = 60_000 if m.group(2).lower().startswith("minute") else 1_000
        return TimeWindow(clamp(now - int(m.group(1)) * unit), clamp(now))
    m = _AT.search(query)
    if m:
        start = clamp(clock_to_session(m.group(1), m.group(2)))
        return TimeWindow(start, clamp(start + 60_000))
    return TimeWindow(max(0, now - cfg.default_window), max(0, now))


def assemble_context(
    query: str,
    log: EventLog,
    provider: SummarizerProvider,
    budget: int,
    now: int,
    cfg: ContextConfig = DEFAULT_CONFIG,
    window: TimeWindow | None = None,
) -> ContextBundle:
    """Build the bundle: storyline from the short-horizon window (newest
    events kept when over the storyline share), long-term summaries from
    the chunks strictly preceding the window. ``used <= budget`` always."""
    if budget <= 0:
        raise InvalidBudget(f"budget must be positive, got {budget}")
    if window is None:
        window = tcot_window(query, log, now, cfg)

    storyline = list(query_range(log, window))
    share = int(budget * cfg.storyline_share)
    used = 0
    kept: list[Event] = []
    for e in reversed(storyline):  # newest first; oldest dropped on overflow
        cost = _line_cost(render_event_line(e))
        if used + cost > share:
            break
        kept.append(e)
        used += cost
    kept.reverse()

    preceding = tuple(
        c
        for c in partition_chunks(log, cfg.chunk_duration)
        if c.window.end < window.start
    )
    long_term = summarize_and_select(preceding, query, provider, budget, cfg)

    bundle = ContextBundle(
        long_term=long_term,
        storyline=tuple(kept),
        budget=budget,
        used=0,
        window=window,
    )
    used_total = estimate_tokens(render_bundle(bundle))
    assert used_total <= budget, f"bundle used {used_total} > budget {budget}"
    return ContextBundle(long_term, tuple(kept), budget, used_total, window)


def merge_timeline(
    segments: list[tuple[TimeWindow, tuple[Event, ...]]]
) -> tuple[Event, ...]:
    """Concatenate segments onto one clock: each segment starts where the
    previous one ended, and offsets inside a segment are preserved."""
    merged: list[Event] = []
    offset = 0
    for window, events in segments:
        for e in events:
            merged.append(
                Event(e.timestamp - window.start + offset, e.modality, e.content, e.source_id)
            )
        offset += window.end - window.start
    return tuple(merged)

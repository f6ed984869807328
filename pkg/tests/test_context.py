from __future__ import annotations

import math
import random
from datetime import datetime

import pytest
from hypothesis import given, settings, strategies as st

from egokit.context import (
    ContextConfig,
    InvalidDuration,
    assemble_context,
    estimate_tokens,
    merge_timeline,
    partition_chunks,
    render_bundle,
    render_summary_line,
    summarize_and_select,
    tcot_window,
)
from egokit.events import Event, EventLog, TimeWindow
from egokit.providers import KeywordSummarizer

from conftest import build_log

HOUR = 3_600_000


def test_estimate_tokens_rounds_up():
    assert estimate_tokens("") == 0
    assert estimate_tokens("abcd") == 1
    assert estimate_tokens("abcde") == 2


def test_partition_empty_log():
    assert partition_chunks(EventLog(), HOUR) == ()


def test_partition_two_hour_span_gives_two_chunks():
    log = build_log(
        [
            (0, "visual", "start"),
            (HOUR - 1, "visual", "end of first"),
            (HOUR, "visual", "start of second"),
            (2 * HOUR - 1, "visual", "end of second"),
        ]
    )
    chunks = partition_chunks(log, HOUR)
    assert len(chunks) == 2
    assert chunks[0].window == TimeWindow(0, HOUR - 1)
    assert chunks[1].window == TimeWindow(HOUR, 2 * HOUR - 1)


def test_partition_rejects_bad_duration():
    with pytest.raises(InvalidDuration):
        partition_chunks(EventLog(), 0)


def test_partition_matches_floor_grouping():
    rng = random.Random(3)
    duration = 7_000
    log = build_log(
        [(rng.randrange(0, 200_000), "visual", f"e{i}") for i in range(100)]
    )
    chunks = partition_chunks(log, duration)
    # oracle: group-by floor(t / duration)
    expected: dict[int, list[int]] = {}
    for e in log:
        expected.setdefault(e.timestamp // duration, []).append(e.timestamp)
    assert len(chunks) == len(expected)
    for chunk in chunks:
        bucket = chunk.window.start // duration
        assert [e.timestamp for e in chunk.events] == expected[bucket]
        assert all(chunk.window.contains(e.timestamp) for e in chunk.events)
    total = sum(len(c.events) for c in chunks)
    assert total == len(log)


class FixedSummarizer:
    """Deterministic provider: fixed relevance per chunk index, fixed text."""

    def __init__(self, relevances, text="x" * 40):
        self.relevances = list(relevances)
        self.text = text
        self.calls = 0

    def __call__(self, chunk_text, query):
        relevance = self.relevances[self.calls]
        self.calls += 1
        return self.text, relevance


def _greedy_oracle(summaries, share):
    """Independent restatement of the selection rule."""
    chosen = []
    used = 0
    for s in sorted(summaries, key=lambda s: (-s.relevance, s.window.start)):
        cost = (len(render_summary_line(s)) + 1 + 3) // 4
        if used + cost > share:
            break
        used += cost
        chosen.append(s)
    return sorted(chosen, key=lambda s: s.window.start)


def test_select_no_chunks():
    assert summarize_and_select((), "q", KeywordSummarizer(), 100) == ()


def test_select_single_fitting_chunk():
    log = build_log([(10, "visual", "the red marker")])
    chunks = partition_chunks(log, HOUR)
    got = summarize_and_select(chunks, "red marker", KeywordSummarizer(), 1000)
    assert len(got) == 1
    assert "red marker" in got[0].text


def test_select_top3_by_relevance_in_chronological_order():
    log = build_log([(i * HOUR + 5, "visual", f"hour {i} happenings") for i in range(5)])
    chunks = partition_chunks(log, HOUR)
    provider = FixedSummarizer([0.9, 0.8, 0.7, 0.2, 0.1])
    probe = summarize_and_select(chunks, "q", FixedSummarizer([0.9, 0.8, 0.7, 0.2, 0.1]), 10_000)
    costs = [(len(render_summary_line(s)) + 1 + 3) // 4 for s in probe]
    top3 = sum(costs[:3])  # relevance order equals chronological order here
    budget = math.ceil(top3 / 0.3)
    while int(budget * 0.3) < top3:
        budget += 1
    assert int(budget * 0.3) < top3 + costs[3]  # share admits exactly three
    got = summarize_and_select(chunks, "q", provider, budget)
    assert [s.relevance for s in got] == [0.9, 0.8, 0.7]
    starts = [s.window.start for s in got]
    assert starts == sorted(starts)
    oracle = _greedy_oracle(probe, int(budget * 0.3))
    assert [s.window.start for s in got] == [s.window.start for s in oracle]


def test_selection_monotone_in_relevance():
    log = build_log([(i * HOUR + 5, "visual", f"hour {i}") for i in range(6)])
    chunks = partition_chunks(log, HOUR)
    base = [0.5, 0.4, 0.6, 0.3, 0.2, 0.45]
    budget = 900
    got = summarize_and_select(chunks, "q", FixedSummarizer(base), budget)
    selected_starts = {s.window.start for s in got}
    for i in range(len(base)):
        if chunks[i].window.start not in selected_starts:
            continue
        raised = list(base)
        raised[i] = min(1.0, raised[i] + 0.3)
        got_raised = summarize_and_select(chunks, "q", FixedSummarizer(raised), budget)
        assert chunks[i].window.start in {s.window.start for s in got_raised}


EPOCH_10AM = datetime(2000, 1, 1, 10, 0, 0)


def test_window_between_hint():
    log = EventLog(epoch=EPOCH_10AM)
    w = tcot_window("what did I do between 10:00 and 10:05", log, now=600_000)
    assert w == TimeWindow(0, 300_000)


def test_window_default_rule():
    w = tcot_window("what happened", EventLog(), now=2_000_000)
    assert w == TimeWindow(1_100_000, 2_000_000)


def test_window_last_minutes_hint():
    w = tcot_window("show me the last 2 minutes", EventLog(), now=500_000)
    assert w == TimeWindow(380_000, 500_000)


def test_window_at_hint():
    log = EventLog(epoch=EPOCH_10AM)
    w = tcot_window("what was I doing at 10:30", log, now=7_200_000)
    assert w == TimeWindow(1_800_000, 1_860_000)


def test_window_clamped_to_now():
    w = tcot_window("last 10 minutes", EventLog(), now=60_000)
    assert w == TimeWindow(0, 60_000)


def test_assemble_all_inside_window():
    log = build_log([(100, "visual", "a"), (200, "spoken", "b")])
    bundle = assemble_context("anything recent", log, KeywordSummarizer(), 500, now=1000)
    assert bundle.long_term == ()
    assert [e.timestamp for e in bundle.storyline] == [100, 200]
    assert bundle.used <= bundle.budget


def test_assemble_tiny_budget_keeps_newest_or_nothing():
    log = build_log([(100, "visual", "first " * 10), (900, "visual", "second " * 10)])
    bundle = assemble_context("q", log, KeywordSummarizer(), budget=30, now=1000)
    assert len(bundle.storyline) <= 1
    if bundle.storyline:
        assert bundle.storyline[0].timestamp == 900
    assert bundle.used <= 30


def test_assemble_long_term_strictly_precedes_window():
    entries = [(i * HOUR + 500, "visual", f"activity {i} stuff") for i in range(4)]
    log = build_log(entries)
    now = 3 * HOUR + 1000
    bundle = assemble_context("last 5 minutes", log, KeywordSummarizer(), 2000, now)
    for summary in bundle.long_term:
        assert summary.window.end < bundle.window.start


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 12 * HOUR), min_size=0, max_size=40),
    st.integers(16, 600),
)
def test_assemble_never_exceeds_budget(stamps, budget):
    log = build_log(
        [(t, "visual", f"thing number {i} happened here") for i, t in enumerate(stamps)]
    )
    now = max(stamps) if stamps else 0
    bundle = assemble_context("what happened", log, KeywordSummarizer(), budget, now)
    assert bundle.used <= budget
    assert estimate_tokens(render_bundle(bundle)) == bundle.used


def test_merge_single_segment_rebased_to_zero():
    events = (Event(5000, "visual", "a"), Event(7000, "visual", "b"))
    merged = merge_timeline([(TimeWindow(5000, 9000), events)])
    assert [e.timestamp for e in merged] == [0, 2000]


def test_merge_two_segments_offsets():
    first = (Event(0, "visual", "a"), Event(10_000, "visual", "b"))
    second = (Event(50_000, "visual", "c"), Event(60_000, "visual", "d"))
    merged = merge_timeline(
        [(TimeWindow(0, 10_000), first), (TimeWindow(50_000, 60_000), second)]
    )
    assert [e.timestamp for e in merged] == [0, 10_000, 10_000, 20_000]


def test_merge_empty():
    assert merge_timeline([]) == ()


def test_merge_preserves_gaps():
    events = (Event(1000, "visual", "a"), Event(1700, "visual", "b"))
    merged = merge_timeline([(TimeWindow(1000, 2000), events)])
    assert merged[1].timestamp - merged[0].timestamp == 700

from __future__ import annotations

import pytest

from egokit.providers import (
    KeywordSummarizer,
    ParseError,
    ScriptedAsr,
    StubTable,
    load_stub_table,
    passthrough_tts,
    scripted_sequence,
    stub_complete,
)


def test_empty_table_returns_default():
    assert stub_complete(StubTable(default="fallback"), "anything") == "fallback"


def test_first_contained_pattern_wins():
    table = StubTable((("calorie", "answer is B"),), "nope")
    assert stub_complete(table, "check the calorie count") == "answer is B"


def test_overlapping_patterns_earlier_entry_wins():
    table = StubTable((("app", "first"), ("apple", "second")), "default")
    assert stub_complete(table, "an apple a day") == "first"


def test_load_table(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("foo\tgot foo\nbar\tgot bar\nDEFAULT\tfallback\n", encoding="utf-8")
    table = load_stub_table(path)
    assert table.entries == (("foo", "got foo"), ("bar", "got bar"))
    assert table.default == "fallback"


def test_load_table_missing_default(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("foo\tbar\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_stub_table(path)


def test_load_table_bad_line_reports_number(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("foo\tok\nno-tab-here\nDEFAULT\td\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_stub_table(path)
    assert err.value.line == 2


def test_load_table_duplicate_patterns_keep_order(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("x\tfirst\nx\tsecond\nDEFAULT\td\n", encoding="utf-8")
    table = load_stub_table(path)
    assert stub_complete(table, "x marks the spot") == "first"


def test_keyword_summarizer_scores_overlap():
    s = KeywordSummarizer()
    text, relevance = s("picked up the red marker\nwashed a plate", "where is the red marker")
    assert "red marker" in text
    assert relevance == 1.0
    _, low = s("washed a plate", "where is the red marker")
    assert low < 0.5


def test_keyword_summarizer_deterministic():
    s = KeywordSummarizer()
    assert s("a b c", "b") == s("a b c", "b")


def test_scripted_asr_pops_in_order():
    asr = ScriptedAsr(["first", "second"], fallback="eh")
    assert asr(b"", 16000) == "first"
    assert asr(b"", 16000) == "second"
    assert asr(b"", 16000) == "eh"


def test_passthrough_tts():
    assert passthrough_tts("hello") == b"hello"


def test_scripted_sequence_exhaustion():
    lm = scripted_sequence(["one"])
    assert lm("x") == "one"
    with pytest.raises(Exception):
        lm("x")

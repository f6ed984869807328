from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from egokit.answering import (
    MCQuestion,
    MalformedQuestion,
    NoExtractableAnswer,
    Vote,
    answer_question,
    extract_choice,
    majority_vote,
    normalize_question,
    render_prompt_variants,
)
from egokit.context import assemble_context
from egokit.providers import KeywordSummarizer, ProviderFailure, StubTable, make_stub_lm

from conftest import build_log


def test_normalize_numeric_labels():
    q = normalize_question("What did I hold?\n1. a mug\n2. a pen\n3. a key")
    assert q.options == ("a mug", "a pen", "a key")
    assert q.lettered()[0] == ("A", "a mug")


def test_normalize_already_lettered_is_stable():
    raw = "What did I hold?\nA. a mug\nB. a pen"
    q1 = normalize_question(raw)
    q2 = normalize_question(raw)
    assert q1 == q2
    assert q1.options == ("a mug", "a pen")


def test_normalize_relabels_sparse_letters_in_order():
    q = normalize_question("Which way did I go?\nB. left\nD. right")
    assert q.options == ("left", "right")
    assert [letter for letter, _ in q.lettered()] == ["A", "B"]


def test_normalize_needs_two_options():
    with pytest.raises(MalformedQuestion):
        normalize_question("Anything?\nA. only one")


def test_normalize_adds_viewpoint_preamble():
    q = normalize_question("what is this\nA. a mug\nB. a pen")
    assert q.stem.startswith("From my first-person view, ")
    grounded = normalize_question("what did I do\nA. ate\nB. slept")
    assert grounded.stem == "what did I do"


def _context():
    log = build_log([(100, "visual", "holding a mug")])
    return assemble_context("q", log, KeywordSummarizer(), 400, now=500)


def test_variants_k1_contains_everything():
    q = MCQuestion("What am I holding?", ("a mug", "a pen"))
    (prompt,) = render_prompt_variants(q, _context(), k=1)
    assert "What am I holding?" in prompt
    assert "A. a mug" in prompt
    assert "holding a mug" in prompt


def test_variants_k5_pairwise_distinct():
    q = MCQuestion("What am I holding?", ("a mug", "a pen"))
    variants = render_prompt_variants(q, _context(), k=5)
    assert len(set(variants)) == 5


def test_variants_deterministic():
    q = MCQuestion("What am I holding?", ("a mug", "a pen"))
    assert render_prompt_variants(q, _context(), 5) == render_prompt_variants(q, _context(), 5)


def test_extract_answer_is_pattern():
    assert extract_choice("The answer is B.", 4) == "B"


def test_extract_priority_and_last_match():
    assert extract_choice("I considered (A) but the answer is (C)", 4) == "C"


def test_extract_nothing():
    assert extract_choice("no idea", 4) is None


def test_extract_ignores_letters_beyond_options():
    assert extract_choice("the answer is D", 2) is None
    assert extract_choice("(D) then again (B)", 2) == "B"


def test_extract_bare_line():
    assert extract_choice("thinking...\nB\n", 4) == "B"


def test_majority_unanimous():
    assert majority_vote(Vote(("B",) * 5)) == "B"


def test_majority_tie_breaks_to_smallest():
    assert majority_vote(Vote(("A", "B", "A", "B", "C"))) == "A"


def test_majority_all_absent():
    with pytest.raises(NoExtractableAnswer):
        majority_vote(Vote((None,) * 5))


def test_majority_ignores_absent():
    assert majority_vote(Vote((None, "D", None, "D", "C"))) == "D"


@given(st.lists(st.sampled_from(["A", "B", "C", None]), min_size=1, max_size=9))
def test_majority_permutation_invariant(letters):
    if all(x is None for x in letters):
        return
    base = majority_vote(Vote(tuple(letters)))
    rng = random.Random(0)
    for _ in range(20):
        shuffled = list(letters)
        rng.shuffle(shuffled)
        assert majority_vote(Vote(tuple(shuffled))) == base


def _question():
    return MCQuestion("What am I holding?", ("a mug", "a pen", "a key", "a coin"))


def test_answer_question_unanimous():
    log = build_log([(100, "visual", "holding a mug")])
    lm = make_stub_lm(StubTable(default="the answer is A"))
    answer, diag = answer_question(_question(), log, KeywordSummarizer(), lm, 400, 500)
    assert answer == "A"
    assert diag.letters == ["A"] * 5


def test_answer_question_from_context_keyword():
    log = build_log([(100, "visual", "marker kw00x is in view")])
    lm = make_stub_lm(
        StubTable((("kw00x", "the answer is C"),), default="the answer is A")
    )
    answer, _ = answer_question(_question(), log, KeywordSummarizer(), lm, 400, 500)
    assert answer == "C"


def test_answer_question_partial_failures_become_absent_votes():
    calls = []

    def flaky(prompt: str) -> str:
        calls.append(prompt)
        if len(calls) in (1, 3):
            raise ProviderFailure("down")
        return "answer is D"

    log = build_log([(100, "visual", "something")])
    answer, diag = answer_question(_question(), log, KeywordSummarizer(), flaky, 400, 500)
    assert answer == "D"
    assert diag.letters.count("D") == 3
    assert diag.letters.count(None) == 2


def test_answer_question_all_failures_fatal():
    def dead(prompt: str) -> str:
        raise ProviderFailure("down")

    log = build_log([(100, "visual", "something")])
    with pytest.raises(ProviderFailure):
        answer_question(_question(), log, KeywordSummarizer(), dead, 400, 500)


def test_answer_question_k1_equals_single_extraction():
    log = build_log([(100, "visual", "something")])
    completion = "I think (B) is likely but the answer is (C)"
    lm = make_stub_lm(StubTable(default=completion))
    answer, diag = answer_question(
        _question(), log, KeywordSummarizer(), lm, 400, 500, k=1
    )
    assert answer == extract_choice(completion, 4)
    assert len(diag.completions) == 1


def test_answer_question_deterministic_diagnostics():
    log = build_log([(100, "visual", "holding a mug")])
    lm = make_stub_lm(StubTable(default="the answer is B"))
    a1, d1 = answer_question(_question(), log, KeywordSummarizer(), lm, 400, 500)
    a2, d2 = answer_question(_question(), log, KeywordSummarizer(), lm, 400, 500)
    assert a1 == a2
    assert d1.prompts == d2.prompts
    assert d1.completions == d2.completions
    assert d1.letters == d2.letters


def test_answer_question_byte_identical_diagnostics():
    import json

    log = build_log([(100, "visual", "holding a mug")])
    lm = make_stub_lm(StubTable(default="the answer is B"))

    def snapshot():
        answer, diag = answer_question(_question(), log, KeywordSummarizer(), lm, 400, 500)
        return json.dumps(
            {
                "answer": answer,
                "prompts": diag.prompts,
                "completions": diag.completions,
                "letters": diag.letters,
                "window": diag.window,
                "used": diag.context_used,
            },
            sort_keys=True,
        ).encode()

    assert snapshot() == snapshot()

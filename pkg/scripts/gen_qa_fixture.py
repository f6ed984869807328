#!/usr/bin/env python3
"""Regenerate the synthetic QA fixture set under fixtures/.

Produces a 10-hour event log, 50 four-option questions over it, and the
language-model stub table that answers from context keywords. The layout
guarantees the mechanism under test: each question's keyword token appears
in exactly one event; question wording shares no content words with any
other question's events, so only the right chunk can surface the keyword.

Half the questions carry an explicit time hint (short-horizon window path),
half rely on chunk summarization (long-horizon path; hours 0-8 only, since
the trailing default window overlaps the final chunk). The last 20 minutes
of the log are filler so hint-free questions see a keyword-free storyline.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

OBJECTS = """spatula ladle whisk grater peeler corkscrew funnel sieve tongs
skewer trivet ramekin colander zester mandoline thermometer timer scale
kettle teapot saucer tumbler decanter carafe flask canteen thermos pitcher
crock griddle skillet stockpot roaster steamer wok cleaver paring bread
santoku honing mallet masher ricer juicer reamer shears scissors twine
cheesecloth parchment""".split()

ACTIVITIES = """kneading simmering whisking folding proofing glazing
braising searing deglazing reducing julienning dicing mincing scoring
basting brining curing smoking toasting charring blanching shocking
steeping infusing clarifying emulsifying tempering caramelizing rendering
griddling crisping scalding poaching coddling frothing muddling zesting
garnishing plating portioning chilling freezing thawing marinating
tenderizing trussing larding barding resting carving""".split()

COLORS = ["crimson", "teal", "amber", "violet", "olive", "indigo", "coral", "slate"]

HOUR_MS = 3_600_000
MINUTE_MS = 60_000
KEYWORD_SLOTS = [5, 13, 21, 29, 37, 45]  # minutes within an hour
LETTERS = "ABCD"


def build():
    assert len(OBJECTS) >= 50 and len(set(OBJECTS)) == len(OBJECTS)
    assert len(ACTIVITIES) >= 50 and len(set(ACTIVITIES)) == len(ACTIVITIES)

    events: list[tuple[int, str, str, str]] = []  # (t, modality, source, content)
    questions = []
    stub_lines = []

    # filler spine: three per hour, plus a dense keyword-free tail
    filler_n = 0
    for hour in range(10):
        for minute in (0, 20, 40):
            filler_n += 1
            events.append(
                (
                    hour * HOUR_MS + minute * MINUTE_MS,
                    "visual",
                    "cam",
                    f"routine scene {filler_n} nothing notable",
                )
            )
    for minute in (44, 48, 52, 56, 59):
        filler_n += 1
        events.append(
            (
                9 * HOUR_MS + minute * MINUTE_MS,
                "visual",
                "cam",
                f"routine scene {filler_n} nothing notable",
            )
        )

    slot_used: dict[int, int] = {h: 0 for h in range(10)}
    for i in range(50):
        hinted = i % 2 == 0
        hour = (i // 2) % 10 if hinted else (i // 2) % 9
        slot = slot_used[hour]
        slot_used[hour] += 1
        minute = KEYWORD_SLOTS[slot]
        assert not (hour == 9 and minute >= 40), "keyword event in the filler tail"

        keyword = f"kw{i:02d}x"
        obj = OBJECTS[i]
        activity = ACTIVITIES[i]
        gold_letter = LETTERS[i % 4]
        gold_color = COLORS[i % len(COLORS)]
        distractors = [c for c in COLORS if c != gold_color][:3]
        options = list(distractors)
        options.insert(LETTERS.index(gold_letter), gold_color)

        t = hour * HOUR_MS + minute * MINUTE_MS
        events.append(
            (t, "visual", "cam", f"{activity} beside a {gold_color} {obj} tag {keyword}")
        )

        record = {
            "question": f"What color was the {obj} noticed during {activity}?",
            "options": options,
            "answer": gold_letter,
        }
        if hinted:
            lo, hi = max(0, minute - 3), min(59, minute + 3)
            record["hint"] = f"between {hour:02d}:{lo:02d} and {hour:02d}:{hi:02d}"
        questions.append(record)
        stub_lines.append(f"{keyword}\tthe answer is {gold_letter}")

    events.sort(key=lambda e: e[0])
    FIXTURES.mkdir(exist_ok=True)
    (FIXTURES / "qa_events.log").write_text(
        "".join(f"{t}\t{m}\t{s}\t{c}\n" for t, m, s, c in events), encoding="utf-8"
    )
    (FIXTURES / "qa_questions.jsonl").write_text(
        "".join(json.dumps(q, sort_keys=True) + "\n" for q in questions),
        encoding="utf-8",
    )
    (FIXTURES / "qa_stub_lm.tsv").write_text(
        "\n".join(stub_lines) + "\nDEFAULT\tthe answer is A\n", encoding="utf-8"
    )
    print(f"wrote {len(events)} events, {len(questions)} questions")


def verify():
    """Run the generated fixture through the pipeline; demand 100%/chance."""
    sys.path.insert(0, str(ROOT / "src"))
    from egokit.harness import run_qa
    from egokit.providers import load_stub_table

    table = load_stub_table(FIXTURES / "qa_stub_lm.tsv")
    full = run_qa(
        FIXTURES / "qa_questions.jsonl", FIXTURES / "qa_events.log", table
    )
    print("with context:   accuracy =", full.aggregate["accuracy"])
    bare = run_qa(
        FIXTURES / "qa_questions.jsonl",
        FIXTURES / "qa_events.log",
        table,
        context_enabled=False,
    )
    print("without context: accuracy =", bare.aggregate["accuracy"])
    assert full.aggregate["accuracy"] == 1.0, [
        r for r in full.items if not r.get("correct")
    ][:3]
    assert abs(bare.aggregate["accuracy"] - 0.25) <= 0.10


if __name__ == "__main__":
    build()
    verify()

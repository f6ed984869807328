from __future__ import annotations

import json

import pytest

from egokit.builtin_tools import register_builtin_tools
from egokit.context import assemble_context
from egokit.events import EventLog
from egokit.orchestrator import (
    ConfirmationRequest,
    Plan,
    TurnProviders,
    execute_plan,
    generate_plan,
    handle_turn,
    is_affirmative,
)
from egokit.providers import KeywordSummarizer, StubTable, make_stub_lm, scripted_sequence
from egokit.registry import Param, ToolCall, ToolRegistry, ToolSchema

from conftest import build_log


def _ctx():
    return assemble_context("q", EventLog(), KeywordSummarizer(), 400, 0)


def _tools(reg):
    return reg.list_tools(reg.registered_names())


def approve_all(request: ConfirmationRequest) -> str:
    return "yes"


def deny_all(request: ConfirmationRequest) -> str:
    return "no"


def never_answer(request: ConfirmationRequest) -> None:
    return None


def test_generate_plan_empty_array():
    reg = ToolRegistry()
    register_builtin_tools(reg)
    plan, parse = generate_plan("hi", _ctx(), _tools(reg), lambda p: "[]")
    assert plan.calls == ()
    assert parse == "ok"


def test_generate_plan_single_call():
    reg = ToolRegistry()
    register_builtin_tools(reg)
    lm = make_stub_lm(
        StubTable(default='[{"name": "nutrition.lookup", "arguments": {"food": "apple"}}]')
    )
    plan, parse = generate_plan("calories?", _ctx(), _tools(reg), lm)
    assert [c.name for c in plan.calls] == ["nutrition.lookup"]
    assert plan.calls[0].arguments == {"food": "apple"}
    assert parse == "ok"


def test_generate_plan_repair_retry():
    lm = scripted_sequence(
        ["sure! calling the tool now", '[{"name": "memo.list", "arguments": {}}]']
    )
    reg = ToolRegistry()
    register_builtin_tools(reg)
    plan, parse = generate_plan("notes?", _ctx(), _tools(reg), lm)
    assert [c.name for c in plan.calls] == ["memo.list"]
    assert parse == "repaired"


def test_generate_plan_double_failure_degrades_to_empty():
    lm = make_stub_lm(StubTable(default="I will not emit JSON"))
    reg = ToolRegistry()
    register_builtin_tools(reg)
    plan, parse = generate_plan("notes?", _ctx(), _tools(reg), lm)
    assert plan.calls == ()
    assert parse == "failed"


def test_generate_plan_rejects_extra_keys_then_repairs():
    lm = scripted_sequence(
        [
            '[{"name": "memo.list", "arguments": {}, "why": "because"}]',
            '[{"name": "memo.list", "arguments": {}}]',
        ]
    )
    reg = ToolRegistry()
    register_builtin_tools(reg)
    plan, parse = generate_plan("notes?", _ctx(), _tools(reg), lm)
    assert parse == "repaired"
    assert len(plan.calls) == 1


def _failing_registry():
    reg = ToolRegistry()
    reg.register_tool(ToolSchema("ok1", "", (Param("x", "text"),)), lambda a: a["x"])
    reg.register_tool(ToolSchema("boom", "", ()), lambda a: 1 / 0)
    reg.register_tool(ToolSchema("ok2", "", ()), lambda a: "done")
    return reg


def test_execute_all_ok():
    reg = _failing_registry()
    plan = Plan(
        (
            ToolCall("ok1", {"x": "a"}),
            ToolCall("ok2", {}),
            ToolCall("ok1", {"x": "b"}),
        )
    )
    ec = execute_plan(plan, reg, ["ok1", "ok2"], approve_all)
    assert len(ec.results) == 3
    assert ec.skipped == ()
    assert ec.aborted_at is None
    assert not ec.partial


def test_execute_failure_skips_remainder():
    reg = _failing_registry()
    plan = Plan((ToolCall("ok1", {"x": "a"}), ToolCall("boom", {}), ToolCall("ok2", {})))
    ec = execute_plan(plan, reg, ["ok1", "boom", "ok2"], approve_all)
    assert len(ec.results) == 2
    assert ec.results[1][1].status == "error"
    assert [c.name for c in ec.skipped] == ["ok2"]
    assert ec.aborted_at == 1
    assert ec.partial


def test_execute_failure_on_last_call_has_no_skips():
    reg = _failing_registry()
    plan = Plan((ToolCall("ok2", {}), ToolCall("boom", {})))
    ec = execute_plan(plan, reg, ["ok2", "boom"], approve_all)
    assert len(ec.results) == 2
    assert ec.skipped == ()
    assert ec.aborted_at is None
    assert ec.partial  # the error itself marks the turn partial


def test_side_effect_denied_leaves_store_untouched():
    reg = ToolRegistry()
    calendar, _ = register_builtin_tools(reg)
    plan = Plan(
        (
            ToolCall("calendar.add", {"title": "dentist", "when": "3 PM"}),
            ToolCall("memo.list", {}),
        )
    )
    ec = execute_plan(plan, reg, reg.registered_names(), deny_all)
    assert calendar.entries == []
    assert ec.results[0][1].status == "error"
    assert "ConfirmationDenied" in ec.results[0][1].error_detail
    assert [c.name for c in ec.skipped] == ["memo.list"]
    assert ec.confirmations[0].affirmative is False


def test_side_effect_timeout_counts_as_denial():
    reg = ToolRegistry()
    calendar, _ = register_builtin_tools(reg)
    plan = Plan((ToolCall("calendar.add", {"title": "x", "when": "now"}),))
    ec = execute_plan(plan, reg, reg.registered_names(), never_answer)
    assert calendar.entries == []
    assert "ConfirmationTimeout" in ec.results[0][1].error_detail


def test_side_effect_approved_runs():
    reg = ToolRegistry()
    calendar, _ = register_builtin_tools(reg)
    plan = Plan((ToolCall("calendar.add", {"title": "dentist", "when": "3 PM"}),))
    ec = execute_plan(plan, reg, reg.registered_names(), approve_all)
    assert calendar.entries == [{"title": "dentist", "when": "3 PM"}]
    assert ec.results[0][1].status == "ok"
    assert ec.confirmations[0].affirmative is True


def test_results_plus_skipped_cover_plan():
    reg = _failing_registry()
    for calls in (
        (),
        (ToolCall("ok1", {"x": "a"}),),
        (ToolCall("boom", {}), ToolCall("ok1", {"x": "a"}), ToolCall("ok2", {})),
        (ToolCall("nope", {}), ToolCall("ok2", {})),
    ):
        plan = Plan(calls)
        ec = execute_plan(plan, reg, ["ok1", "boom", "ok2"], approve_all)
        assert len(ec.results) + len(ec.skipped) == len(plan.calls)
        covered = [c for c, _ in ec.results] + list(ec.skipped)
        assert covered == list(plan.calls)


def test_affirmative_vocabulary():
    assert is_affirmative("yes")
    assert is_affirmative(" Yes. ")
    assert is_affirmative("OK")
    assert not is_affirmative("no")
    assert not is_affirmative(None)
    assert not is_affirmative("yes please")


def _planner_table(plan_json: str, synthesis: str) -> StubTable:
    return StubTable(
        (("PLAN:", plan_json), ("SYNTHESIZE:", synthesis)), "unused default"
    )


def test_turn_direct_answer():
    table = _planner_table("[]", "Nothing to do.")
    reg = ToolRegistry()
    register_builtin_tools(reg)
    providers = TurnProviders(lm=make_stub_lm(table), summarizer=KeywordSummarizer())
    turn = handle_turn("hello", EventLog(), providers, reg, reg.registered_names(), 400, 0)
    assert turn.response == "Nothing to do."
    assert turn.plan.calls == ()
    assert not turn.trace.partial


def test_turn_calories_scenario():
    table = _planner_table(
        '[{"name": "nutrition.lookup", "arguments": {"food": "apple"}}]',
        "An apple has about 95 kcal.",
    )
    log = build_log([(100, "visual", "user picks up an apple")])
    reg = ToolRegistry()
    register_builtin_tools(reg)
    providers = TurnProviders(lm=make_stub_lm(table), summarizer=KeywordSummarizer())
    turn = handle_turn(
        "check the calories of this apple", log, providers, reg,
        reg.registered_names(), 600, 200,
    )
    assert turn.trace.results[0][1].payload == {"food": "apple", "kcal": 95}
    assert "95" in turn.response


def test_turn_abort_synthesizes_partial():
    reg = _failing_registry()
    plan_json = json.dumps(
        [{"name": "boom", "arguments": {}}, {"name": "ok2", "arguments": {}}]
    )
    seen_prompts = []

    def lm(prompt: str) -> str:
        seen_prompts.append(prompt)
        if prompt.startswith("PLAN:"):
            return plan_json
        return "Partially done."

    providers = TurnProviders(lm=lm, summarizer=KeywordSummarizer())
    turn = handle_turn("go", EventLog(), providers, reg, ["boom", "ok2"], 400, 0)
    assert turn.trace.partial
    assert turn.response == "Partially done."
    synth = [p for p in seen_prompts if p.startswith("SYNTHESIZE:")]
    assert len(synth) == 1
    assert "partial result" in synth[0]


def test_turn_empty_allowlist_is_direct_answer():
    ran = []
    reg = ToolRegistry()
    reg.register_tool(
        ToolSchema("spy", "", ()), lambda a: ran.append(1)
    )
    planner_calls = []

    def lm(prompt: str) -> str:
        planner_calls.append(prompt)
        if prompt.startswith("PLAN:"):
            return '[{"name": "spy", "arguments": {}}]'
        return "Direct answer."

    providers = TurnProviders(lm=lm, summarizer=KeywordSummarizer())
    turn = handle_turn("do things", EventLog(), providers, reg, [], 400, 0)
    assert turn.response == "Direct answer."
    assert turn.plan.calls == ()
    assert ran == []
    assert not any(p.startswith("PLAN:") for p in planner_calls)


def test_turn_synthesis_failure_is_reported_with_trace():
    def lm(prompt: str) -> str:
        if prompt.startswith("PLAN:"):
            return "[]"
        raise RuntimeError("lm down")

    reg = ToolRegistry()
    register_builtin_tools(reg)
    providers = TurnProviders(lm=lm, summarizer=KeywordSummarizer())
    turn = handle_turn("hello", EventLog(), providers, reg, reg.registered_names(), 400, 0)
    assert turn.response.startswith("[error]")
    assert turn.trace.results == ()


def test_side_effect_never_runs_without_affirmative_record():
    reg = ToolRegistry()
    calendar, memos = register_builtin_tools(reg)
    plan = Plan(
        (
            ToolCall("memo.add", {"text": "note"}),
            ToolCall("calendar.add", {"title": "x", "when": "y"}),
        )
    )
    replies = iter(["yes", "nah"])
    ec = execute_plan(plan, reg, reg.registered_names(), lambda req: next(replies))
    assert memos.memos == ["note"]
    assert calendar.entries == []
    for call, result in ec.results:
        schema = reg.schema(call.name)
        if schema.side_effecting and result.status == "ok":
            record = next(r for r in ec.confirmations if r.call == call)
            assert record.affirmative


CLARIFY_TABLE = StubTable(
    (
        ("CLARIFY-CANDIDATES:", '["the mug on the left", "the bottle near the sink"]'),
        ("CLARIFY-SCORE:", "[1, 1]"),
        ("PLAN:", "[]"),
        ("SYNTHESIZE:", "Here is what I found."),
    ),
    "ok",
)


def test_turn_clarifier_asks_and_uses_resolution():
    questions = []

    def asker(question: str) -> str:
        questions.append(question)
        return "the mug on the left"

    reg = ToolRegistry()
    register_builtin_tools(reg)
    providers = TurnProviders(
        lm=make_stub_lm(CLARIFY_TABLE),
        summarizer=KeywordSummarizer(),
        asker=asker,
        clarifier_enabled=True,
    )
    turn = handle_turn("show me this", EventLog(), providers, reg, reg.registered_names(), 400, 0)
    assert questions and "mug on the left" in questions[0]
    assert turn.clarification is not None
    assert turn.clarification.chosen == "the mug on the left"
    assert turn.response == "Here is what I found."


def test_turn_clarifier_skips_when_confident():
    table = StubTable(
        (
            ("CLARIFY-CANDIDATES:", '["check the weather", "check the calendar"]'),
            ("CLARIFY-SCORE:", "[9, 1]"),
            ("PLAN:", "[]"),
            ("SYNTHESIZE:", "Done."),
        ),
        "ok",
    )
    reg = ToolRegistry()
    register_builtin_tools(reg)
    providers = TurnProviders(
        lm=make_stub_lm(table),
        summarizer=KeywordSummarizer(),
        asker=lambda q: pytest.fail("should not ask"),
        clarifier_enabled=True,
    )
    turn = handle_turn("check it", EventLog(), providers, reg, reg.registered_names(), 400, 0)
    assert turn.clarification is None
    assert turn.response == "Done."


def test_turn_clarifier_disabled_by_default():
    table = StubTable(
        (
            ("CLARIFY-CANDIDATES:", '["a", "b"]'),
            ("PLAN:", "[]"),
            ("SYNTHESIZE:", "Done."),
        ),
        "ok",
    )
    reg = ToolRegistry()
    register_builtin_tools(reg)
    providers = TurnProviders(lm=make_stub_lm(table), summarizer=KeywordSummarizer())
    turn = handle_turn("check it", EventLog(), providers, reg, reg.registered_names(), 400, 0)
    assert turn.clarification is None


def test_execution_order_matches_plan_order_by_log_timestamps():
    ticks = iter(range(1000))
    reg = ToolRegistry(clock=lambda: float(next(ticks)))
    register_builtin_tools(reg)
    plan = Plan(
        (
            ToolCall("memo.list", {}),
            ToolCall("nutrition.lookup", {"food": "apple"}),
            ToolCall("weather.lookup", {"city": "london"}),
        )
    )
    execute_plan(plan, reg, reg.registered_names(), approve_all)
    log = reg.invocation_log
    assert [r.tool for r in log] == ["memo.list", "nutrition.lookup", "weather.lookup"]
    stamps = [r.timestamp for r in log]
    assert stamps == sorted(stamps)

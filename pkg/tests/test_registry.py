from __future__ import annotations

import pytest

from egokit.registry import (
    DuplicateName,
    MissingRequired,
    Param,
    ToolCall,
    ToolRegistry,
    ToolSchema,
    TypeMismatch,
    UnknownParam,
    validate_args,
)


def echo_schema(name="echo"):
    return ToolSchema(name, "echoes", (Param("q", "text"),))


def make_registry(n=1):
    reg = ToolRegistry(clock=lambda: 0.0)
    for i in range(n):
        reg.register_tool(echo_schema(f"tool{i}"), lambda args: args)
    return reg


def test_register_and_list():
    reg = ToolRegistry()
    reg.register_tool(ToolSchema("memo.add", "adds", (Param("text", "text"),)), lambda a: a)
    assert [s.name for s in reg.list_tools(["memo.add"])] == ["memo.add"]


def test_duplicate_name_rejected():
    reg = make_registry(1)
    with pytest.raises(DuplicateName):
        reg.register_tool(echo_schema("tool0"), lambda a: a)


def test_list_preserves_registration_order():
    reg = make_registry(10)
    names = [f"tool{i}" for i in range(10)]
    assert [s.name for s in reg.list_tools(names)] == names


def test_empty_allowlist_lists_nothing():
    assert make_registry(3).list_tools([]) == []


def test_allowlist_subset():
    reg = make_registry(5)
    got = [s.name for s in reg.list_tools(["tool1", "tool3"])]
    assert got == ["tool1", "tool3"]


def test_validate_accepts_good_call():
    assert validate_args(echo_schema(), ToolCall("echo", {"q": "apple"})) == {"q": "apple"}


def test_validate_missing_required():
    with pytest.raises(MissingRequired) as err:
        validate_args(echo_schema(), ToolCall("echo", {}))
    assert err.value.param == "q"


def test_validate_type_mismatch_not_coerced():
    with pytest.raises(TypeMismatch) as err:
        validate_args(echo_schema(), ToolCall("echo", {"q": 7}))
    assert err.value.param == "q"
    assert err.value.expected == "text"
    assert err.value.got == "integer"


def test_validate_unknown_param():
    with pytest.raises(UnknownParam):
        validate_args(echo_schema(), ToolCall("echo", {"q": "x", "extra": 1}))


def test_validate_string_not_coerced_to_integer():
    schema = ToolSchema("t", "", (Param("n", "integer"),))
    with pytest.raises(TypeMismatch):
        validate_args(schema, ToolCall("t", {"n": "7"}))


def test_validate_bool_is_not_integer():
    schema = ToolSchema("t", "", (Param("n", "integer"),))
    with pytest.raises(TypeMismatch):
        validate_args(schema, ToolCall("t", {"n": True}))


def test_validate_integer_accepted_for_real():
    schema = ToolSchema("t", "", (Param("x", "real"),))
    assert validate_args(schema, ToolCall("t", {"x": 7})) == {"x": 7}
    assert validate_args(schema, ToolCall("t", {"x": 7.5})) == {"x": 7.5}


def test_validate_enum():
    schema = ToolSchema("t", "", (Param("mode", "enum", enum=("fast", "slow")),))
    assert validate_args(schema, ToolCall("t", {"mode": "fast"})) == {"mode": "fast"}
    with pytest.raises(TypeMismatch):
        validate_args(schema, ToolCall("t", {"mode": "medium"}))


def test_validate_optional_param_absent():
    schema = ToolSchema("t", "", (Param("x", "text", required=False),))
    assert validate_args(schema, ToolCall("t", {})) == {}


def test_call_tool_ok():
    reg = make_registry(1)
    result = reg.call_tool(["tool0"], ToolCall("tool0", {"q": "apple"}))
    assert result.status == "ok"
    assert result.payload == {"q": "apple"}


def test_call_tool_not_allowlisted():
    reg = make_registry(2)
    result = reg.call_tool(["tool0"], ToolCall("tool1", {"q": "x"}))
    assert result.status == "error"
    assert "NotAllowed" in result.error_detail


def test_call_tool_impl_failure_captured_and_logged():
    reg = ToolRegistry(clock=lambda: 0.0)

    def broken(args):
        raise RuntimeError("kaput")

    reg.register_tool(echo_schema("broken"), broken)
    before = len(reg.invocation_log)
    result = reg.call_tool(["broken"], ToolCall("broken", {"q": "x"}))
    assert result.status == "error"
    assert "kaput" in result.error_detail
    assert len(reg.invocation_log) == before + 1
    assert reg.invocation_log[-1].outcome == "failed"


def test_log_counts_every_attempt_including_rejections():
    reg = make_registry(1)
    calls = [
        ToolCall("tool0", {"q": "ok"}),
        ToolCall("nope", {}),
        ToolCall("tool0", {"q": 5}),
        ToolCall("tool0", {}),
    ]
    for call in calls:
        reg.call_tool(["tool0"], call)
    assert len(reg.invocation_log) == len(calls)
    outcomes = [r.outcome for r in reg.invocation_log]
    assert outcomes == ["ok", "rejected", "rejected", "rejected"]


def test_impl_never_sees_invalid_arguments():
    seen = []
    reg = ToolRegistry()
    schema = ToolSchema(
        "strict", "", (Param("n", "integer"), Param("mode", "enum", enum=("a", "b")))
    )
    reg.register_tool(schema, lambda args: seen.append(args))
    bad_calls = [
        ToolCall("strict", {"n": "5", "mode": "a"}),
        ToolCall("strict", {"n": 5, "mode": "zzz"}),
        ToolCall("strict", {"n": 5}),
        ToolCall("strict", {"n": 5, "mode": "a", "junk": 0}),
    ]
    for call in bad_calls:
        assert reg.call_tool(["strict"], call).status == "error"
    assert seen == []
    assert reg.call_tool(["strict"], ToolCall("strict", {"n": 5, "mode": "a"})).status == "ok"
    assert seen == [{"n": 5, "mode": "a"}]


def test_list_tools_unaffected_by_call_history():
    reg = make_registry(3)
    names = ["tool0", "tool1", "tool2"]
    before = [s.name for s in reg.list_tools(names)]
    reg.call_tool(names, ToolCall("tool1", {"q": "x"}))
    reg.call_tool(names, ToolCall("missing", {}))
    assert [s.name for s in reg.list_tools(names)] == before
    assert reg.registered_names() == names

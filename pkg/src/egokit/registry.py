"""Tool registry: typed schemas, discovery, strict validation, allowlisting.

Arguments are validated against the declared schema before an implementation
ever sees them; mismatches abort the call (no coercion) and every attempt,
accepted or rejected, lands in the invocation log.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

TYPE_TEXT = "text"
TYPE_INTEGER = "integer"
TYPE_REAL = "real"
TYPE_BOOLEAN = "boolean"
TYPE_ENUM = "enum"


class DuplicateName(ValueError):
    pass


class ValidationError(ValueError):
    """Base for argument validation failures; ``code`` names the rule."""

    code = "Invalid"

    def __init__(self, param: str, detail: str):
        super().__init__(f"{self.code}({param}): {detail}")
        self.param = param
        self.detail = detail


class MissingRequired(ValidationError):
    code = "MissingRequired"


class TypeMismatch(ValidationError):
    code = "TypeMismatch"

    def __init__(self, param: str, expected: str, got: str):
        super().__init__(param, f"expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class UnknownParam(ValidationError):
    code = "UnknownParam"


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    required: bool = True
    description: str = ""
    enum: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.type not in (TYPE_TEXT, TYPE_INTEGER, TYPE_REAL, TYPE_BOOLEAN, TYPE_ENUM):
            raise ValueError(f"unknown param type {self.type!r}")
        if self.type == TYPE_ENUM and not self.enum:
            raise ValueError(f"enum param {self.name!r} needs at least one value")


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str
    params: tuple[Param, ...] = ()
    side_effecting: bool = False

    def __post_init__(self) -> None:
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate param names in {self.name}")

    def to_wire(self) -> dict[str, Any]:
        params = []
        for p in self.params:
            entry: dict[str, Any] = {
                "name": p.name,
                "type": p.type,
                "required": p.required,
                "description": p.description,
            }
            if p.type == TYPE_ENUM:
                entry["enum"] = list(p.enum)
            params.append(entry)
        return {
            "name": self.name,
            "description": self.description,
            "params": params,
            "side_effecting": self.side_effecting,
        }


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict[str, Any] = field(default_factory=dict)

    def to_wire(self) -> dict[str, Any]:
        return {"name": self.name, "arguments": self.arguments}


@dataclass(frozen=True)
class ToolResult:
    status: str  # "ok" | "error"
    payload: Any = None
    error_detail: str | None = None

    def __post_init__(self) -> None:
        if (self.status == "error") != (self.error_detail is not None):
            raise ValueError("error_detail present iff status=error")

    @classmethod
    def ok(cls, payload: Any) -> "ToolResult":
        return cls("ok", payload)

    @classmethod
    def error(cls, detail: str) -> "ToolResult":
        return cls("error", None, detail)

    def to_wire(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "payload": self.payload,
            "error_detail": self.error_detail,
        }


@dataclass(frozen=True)
class LogRecord:
    timestamp: float
    tool: str
    outcome: str  # "ok" | "rejected" | "failed"
    detail: str = ""


def _type_name(value: Any) -> str:
    if isinstance(value, bool):
        return TYPE_BOOLEAN
    if isinstance(value, int):
        return TYPE_INTEGER
    if isinstance(value, float):
        return TYPE_REAL
    if isinstance(value, str):
        return TYPE_TEXT
    return type(value).__name__


def validate_args(schema: ToolSchema, call: ToolCall) -> dict[str, Any]:
    """Return the validated argument map or raise; values are never coerced.

    ``real`` accepts an integer literal (the wire cannot distinguish 7 from
    7.0) but nothing else bends: strings are not parsed into numbers and
    booleans are not integers.
    """
    by_name = {p.name: p for p in schema.params}
    for name in call.arguments:
        if name not in by_name:
            raise UnknownParam(name, "not declared by the schema")
    validated: dict[str, Any] = {}
    for p in schema.params:
        if p.name not in call.arguments:
            if p.required:
                raise MissingRequired(p.name, "required parameter absent")
            continue
        value = call.arguments[p.name]
        got = _type_name(value)
        if p.type == TYPE_TEXT and not isinstance(value, str):
            raise TypeMismatch(p.name, TYPE_TEXT, got)
        if p.type == TYPE_INTEGER and (isinstance(value, bool) or not isinstance(value, int)):
            raise TypeMismatch(p.name, TYPE_INTEGER, got)
        if p.type == TYPE_REAL and (
            isinstance(value, bool) or not isinstance(value, (int, float))
        ):
            raise TypeMismatch(p.name, TYPE_REAL, got)
        if p.type == TYPE_BOOLEAN and not isinstance(value, bool):
            raise TypeMismatch(p.name, TYPE_BOOLEAN, got)
        if p.type == TYPE_ENUM:
            if not isinstance(value, str):
                raise TypeMismatch(p.name, TYPE_ENUM, got)
            if value not in p.enum:
                raise TypeMismatch(p.name, f"enum{list(p.enum)}", repr(value))
        validated[p.name] = value
    return validated


ToolImpl = Callable[[dict[str, Any]], Any]


class ToolRegistry:
    """Insertion-ordered tool registry with an append-only invocation log."""

    def __init__(self, clock: Callable[[], float] = time.time):
        self._tools: dict[str, tuple[ToolSchema, ToolImpl]] = {}
        self._log: list[LogRecord] = []
        self._clock = clock

    def register_tool(self, schema: ToolSchema, impl: ToolImpl) -> "ToolRegistry":
        if schema.name in self._tools:
            raise DuplicateName(schema.name)
        self._tools[schema.name] = (schema, impl)
        return self

    def schema(self, name: str) -> ToolSchema | None:
        entry = self._tools.get(name)
        return entry[0] if entry else None

    def registered_names(self) -> list[str]:
        return list(self._tools)

    def list_tools(self, allowlist: Iterable[str]) -> list[ToolSchema]:
        allowed = set(allowlist)
        return [schema for schema, _ in self._tools.values() if schema.name in allowed]

    @property
    def invocation_log(self) -> tuple[LogRecord, ...]:
        return tuple(self._log)

    def _record(self, tool: str, outcome: str, detail: str = "") -> None:
        self._log.append(LogRecord(self._clock(), tool, outcome, detail))

    def call_tool(self, allowlist: Iterable[str], call: ToolCall) -> ToolResult:
        """Allowlist gate, then validation, then the implementation. Failures
        come back inside the result; nothing is raised past this boundary."""
        if call.name not in set(allowlist):
            self._record(call.name, "rejected", "NotAllowed")
            return ToolResult.error(f"NotAllowed: {call.name!r} is not allowlisted")
        if call.name not in self._tools:
            self._record(call.name, "rejected", "UnknownTool")
            return ToolResult.error(f"UnknownTool: {call.name!r} is not registered")
        schema, impl = self._tools[call.name]
        try:
            validated = validate_args(schema, call)
        except ValidationError as exc:
            self._record(call.name, "rejected", str(exc))
            return ToolResult.error(str(exc))
        try:
            payload = impl(validated)
        except Exception as exc:
            self._record(call.name, "failed", str(exc))
            return ToolResult.error(f"ToolFailure: {exc}")
        self._record(call.name, "ok")
        return ToolResult.ok(payload)


def schemas_to_wire(schemas: Iterable[ToolSchema]) -> str:
    return json.dumps([s.to_wire() for s in schemas], sort_keys=False)

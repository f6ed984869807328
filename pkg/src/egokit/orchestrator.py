"""Plan-then-execute turn loop with runtime guardrails.

A turn assembles context, optionally routes through the clarifier gate,
asks the language model for a tool plan, executes it strictly in order
(side-effecting calls run only after an explicit affirmative confirmation),
and synthesizes the response. Any failure mid-plan skips the remaining
calls; there is no rollback, the response just summarizes what happened.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from . import clarifier as clar
from .context import ContextConfig, DEFAULT_CONFIG, ContextBundle, assemble_context, render_bundle
from .events import EventLog
from .providers import LanguageModelProvider, SummarizerProvider
from .registry import ToolCall, ToolRegistry, ToolResult, ToolSchema, schemas_to_wire

logger = logging.getLogger(__name__)

PLAN_MARKER = "PLAN:"
SYNTH_MARKER = "SYNTHESIZE:"
CONFIRM_DEADLINE_MS = 30_000
AFFIRMATIVE = frozenset({"yes", "y", "ok", "okay", "confirm", "approve", "sure"})

# Confirmer and asker block until the user replies; None means timeout.
Confirmer = Callable[["ConfirmationRequest"], "str | None"]
Asker = Callable[[str], "str | None"]


@dataclass(frozen=True)
class Plan:
    calls: tuple[ToolCall, ...] = ()
    rationale: str | None = None


@dataclass(frozen=True)
class ConfirmationRequest:
    call: ToolCall
    prompt: str
    deadline: int = CONFIRM_DEADLINE_MS


@dataclass(frozen=True)
class ConfirmationRecord:
    call: ToolCall
    prompt: str
    reply: str | None
    affirmative: bool


@dataclass(frozen=True)
class ExecutionContext:
    results: tuple[tuple[ToolCall, ToolResult], ...] = ()
    aborted_at: int | None = None
    skipped: tuple[ToolCall, ...] = ()
    confirmations: tuple[ConfirmationRecord, ...] = ()

    @property
    def partial(self) -> bool:
        return self.aborted_at is not None or any(
            r.status == "error" for _, r in self.results
        )

    def to_wire(self) -> dict[str, Any]:
        return {
            "results": [
                {"call": c.to_wire(), "result": r.to_wire()} for c, r in self.results
            ],
            "aborted_at": self.aborted_at,
            "skipped": [c.to_wire() for c in self.skipped],
            "confirmations": [
                {
                    "call": rec.call.to_wire(),
                    "reply": rec.reply,
                    "affirmative": rec.affirmative,
                }
                for rec in self.confirmations
            ],
        }


@dataclass(frozen=True)
class ClarificationRecord:
    question: str
    reply: str | None
    chosen: str


@dataclass
class Turn:
    query: str
    context: ContextBundle
    response: str = ""
    trace: ExecutionContext = field(default_factory=ExecutionContext)
    plan: Plan = field(default_factory=Plan)
    plan_parse: str = "ok"  # "ok" | "repaired" | "failed"
    clarification: ClarificationRecord | None = None

    def to_wire(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "query": self.query,
            "plan": [c.to_wire() for c in self.plan.calls],
            "plan_parse": self.plan_parse,
            "trace": self.trace.to_wire(),
            "response": self.response,
            "partial": self.trace.partial,
        }
        if self.clarification:
            record["clarification"] = {
                "question": self.clarification.question,
                "reply": self.clarification.reply,
                "chosen": self.clarification.chosen,
            }
        return record


@dataclass
class TurnProviders:
    lm: LanguageModelProvider
    summarizer: SummarizerProvider
    confirmer: Confirmer = lambda req: None  # absent user: every ask times out
    asker: Asker | None = None
    clarifier_enabled: bool = False


def render_plan_prompt(query: str, ctx: ContextBundle, tools: list[ToolSchema]) -> str:
    return (
        f"{PLAN_MARKER}\n"
        f"Available tools:\n{schemas_to_wire(tools)}\n"
        f"Context:\n{render_bundle(ctx)}"
        f"User request: {query}\n"
        'Reply with a JSON array of {"name": ..., "arguments": {...}} steps, '
        "or [] to answer directly."
    )


def _parse_plan(completion: str) -> Plan:
    data = json.loads(completion)
    if not isinstance(data, list):
        raise ValueError(f"expected a JSON array, got {type(data).__name__}")
    calls = []
    for i, item in enumerate(data):
        if not isinstance(item, dict):
            raise ValueError(f"step {i} is not an object")
        extra = set(item) - {"name", "arguments"}
        if extra:
            raise ValueError(f"step {i} has unknown keys {sorted(extra)}")
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise ValueError(f"step {i} is missing a tool name")
        arguments = item.get("arguments", {})
        if not isinstance(arguments, dict):
            raise ValueError(f"step {i} arguments are not an object")
        calls.append(ToolCall(name, arguments))
    return Plan(tuple(calls))


def generate_plan(
    query: str,
    ctx: ContextBundle,
    tools: list[ToolSchema],
    lm: LanguageModelProvider,
) -> tuple[Plan, str]:
    """Returns (plan, parse outcome). One repair retry on a malformed
    completion; a second failure degrades to the empty plan."""
    prompt = render_plan_prompt(query, ctx, tools)
    try:
        completion = lm(prompt)
    except Exception as exc:
        logger.warning("planner call failed: %s", exc)
        return Plan(), "failed"
    try:
        return _parse_plan(completion), "ok"
    except (ValueError, json.JSONDecodeError) as exc:
        repair = (
            f"{prompt}\n"
            f"Your previous reply could not be parsed ({exc}). "
            "Reply with ONLY the JSON array."
        )
        try:
            completion = lm(repair)
            return _parse_plan(completion), "repaired"
        except Exception as exc2:
            logger.warning("plan repair failed: %s", exc2)
            return Plan(), "failed"


def confirmation_prompt(call: ToolCall) -> str:
    return (
        f"This will run {call.name} with {json.dumps(call.arguments, sort_keys=True)}. "
        "Shall I go ahead?"
    )


def is_affirmative(reply: str | None) -> bool:
    return reply is not None and reply.strip().lower().rstrip(".!") in AFFIRMATIVE


def execute_plan(
    plan: Plan,
    registry: ToolRegistry,
    allowlist: list[str] | set[str],
    confirmer: Confirmer,
    deadline_ms: int = CONFIRM_DEADLINE_MS,
) -> ExecutionContext:
    """Run calls strictly in order. A side-effecting call needs an explicit
    affirmative reply first; denial, timeout, or any error result aborts the
    rest of the plan (best effort, no rollback)."""
    results: list[tuple[ToolCall, ToolResult]] = []
    confirmations: list[ConfirmationRecord] = []
    for i, call in enumerate(plan.calls):
        schema = registry.schema(call.name)
        if schema is not None and schema.side_effecting:
            request = ConfirmationRequest(call, confirmation_prompt(call), deadline_ms)
            reply = confirmer(request)
            approved = is_affirmative(reply)
            confirmations.append(
                ConfirmationRecord(call, request.prompt, reply, approved)
            )
            if not approved:
                detail = "ConfirmationTimeout" if reply is None else "ConfirmationDenied"
                results.append((call, ToolResult.error(f"{detail}: {call.name} not run")))
                skipped = plan.calls[i + 1 :]
                return ExecutionContext(
                    tuple(results),
                    i if skipped else None,
                    skipped,
                    tuple(confirmations),
                )
        result = registry.call_tool(allowlist, call)
        results.append((call, result))
        if result.status == "error":
            skipped = plan.calls[i + 1 :]
            return ExecutionContext(
                tuple(results),
                i if skipped else None,
                skipped,
                tuple(confirmations),
            )
    return ExecutionContext(tuple(results), None, (), tuple(confirmations))


def render_synthesis_prompt(query: str, execution: ExecutionContext) -> str:
    lines = [SYNTH_MARKER, f"User request: {query}", "Tool outcomes:"]
    if not execution.results:
        lines.append("(no tools were used)")
    for call, result in execution.results:
        lines.append(
            f"- {call.name}({json.dumps(call.arguments, sort_keys=True)}) -> "
            f"{json.dumps(result.to_wire(), sort_keys=True)}"
        )
    for call in execution.skipped:
        lines.append(f"- {call.name}: skipped")
    if execution.partial:
        lines.append(
            "The plan did not finish. Summarize the partial result for the user."
        )
    else:
        lines.append("Answer the user based on these outcomes.")
    return "\n".join(lines)


def _clarify(
    query: str,
    ctx: ContextBundle,
    providers: TurnProviders,
) -> tuple[str, ClarificationRecord | None]:
    """One clarification round at most; returns the effective query."""
    completion = providers.lm(clar.render_candidates_prompt(query, render_bundle(ctx)))
    candidates = clar.parse_candidates(completion)
    if len(candidates) < 2:
        return query, None
    cin = clar.ClarifierInput(
        text_history=(query,),
        visual_history=tuple(e for e in ctx.storyline if e.modality == "visual"),
        pending=tuple(candidates),
    )
    scored = clar.score_candidates(cin, candidates, providers.lm)
    decision = clar.decide(scored)
    if decision.kind == "answer":
        chosen = next(c for c in scored if c.id == decision.interpretation_id)
        return chosen.paraphrase, None
    reply = providers.asker(decision.question) if providers.asker else None
    ranked = sorted(scored, key=lambda c: -c.score)
    chosen = ranked[0]
    if reply:
        cin = clar.apply_reply(
            clar.ClarifierInput(
                text_history=(query,),
                visual_history=cin.visual_history,
                pending=tuple(scored),
            ),
            reply,
        )
        if cin.resolved_id is not None:
            chosen = next(c for c in scored if c.id == cin.resolved_id)
        else:
            rescored = clar.score_candidates(cin, scored, providers.lm)
            chosen = sorted(rescored, key=lambda c: -c.score)[0]
    record = ClarificationRecord(decision.question or "", reply, chosen.paraphrase)
    return chosen.paraphrase, record


def handle_turn(
    query: str,
    log: EventLog,
    providers: TurnProviders,
    registry: ToolRegistry,
    allowlist: list[str] | set[str],
    budget: int,
    now: int,
    cfg: ContextConfig = DEFAULT_CONFIG,
) -> Turn:
    ctx = assemble_context(query, log, providers.summarizer, budget, now, cfg)
    turn = Turn(query=query, context=ctx)

    effective_query = query
    if providers.clarifier_enabled:
        try:
            effective_query, turn.clarification = _clarify(query, ctx, providers)
        except Exception as exc:
            logger.warning("clarifier gate failed, continuing: %s", exc)

    tools = registry.list_tools(allowlist)
    if tools:
        turn.plan, turn.plan_parse = generate_plan(
            effective_query, ctx, tools, providers.lm
        )
    turn.trace = execute_plan(turn.plan, registry, allowlist, providers.confirmer)

    try:
        response = providers.lm(render_synthesis_prompt(effective_query, turn.trace))
    except Exception as exc:
        turn.response = f"[error] response synthesis failed: {exc}"
        return turn
    turn.response = response if response.strip() else "(no response)"
    return turn

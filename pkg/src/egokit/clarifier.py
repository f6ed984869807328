"""Intent disambiguation gate: score interpretations, answer or ask.

Given candidate readings of an ambiguous request, a scoring pass assigns
normalized probabilities and a deterministic rule decides between committing
to the top candidate and asking one short follow-up question built from the
top two paraphrases. The user's reply is folded back into the history so a
single re-scoring round can settle the turn.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

from .events import Event
from .providers import LanguageModelProvider

logger = logging.getLogger(__name__)

P_MIN_ANSWER = 0.5
ASK_MARGIN = 0.15

SCORING_MARKER = "CLARIFY-SCORE:"
CANDIDATES_MARKER = "CLARIFY-CANDIDATES:"


@dataclass(frozen=True)
class Interpretation:
    id: str
    paraphrase: str
    score: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class ClarifierInput:
    text_history: tuple[str, ...] = ()
    visual_history: tuple[Event, ...] = ()
    state: str = ""
    pending: tuple[Interpretation, ...] = ()
    resolved_id: str | None = None


@dataclass(frozen=True)
class ClarifierDecision:
    kind: str  # "answer" | "ask"
    interpretation_id: str | None = None
    question: str | None = None


def render_scoring_prompt(input: ClarifierInput, candidates: list[Interpretation]) -> str:
    lines = [SCORING_MARKER]
    for e in input.visual_history:
        lines.append(f"[seen t={e.timestamp}] {e.content}")
    for text in input.text_history:
        lines.append(f"[said] {text}")
    if input.state:
        lines.append(f"[state] {input.state}")
    lines.append("Candidate interpretations:")
    for i, c in enumerate(candidates, start=1):
        lines.append(f"{i}. {c.paraphrase}")
    lines.append("Rate how likely each candidate is, as a JSON array of numbers.")
    return "\n".join(lines)


def _parse_scores(completion: str, n: int) -> list[float] | None:
    try:
        raw = json.loads(completion)
    except json.JSONDecodeError:
        return None
    if not isinstance(raw, list) or len(raw) != n:
        return None
    try:
        scores = [float(x) for x in raw]
    except (TypeError, ValueError):
        return None
    if any(s < 0 for s in scores):
        return None
    return scores


def score_candidates(
    input: ClarifierInput,
    candidates: list[Interpretation],
    lm: LanguageModelProvider,
) -> list[Interpretation]:
    """Score every candidate and normalize to a distribution. Provider
    failure, malformed output, and all-zero scores fall back to uniform."""
    if not candidates:
        raise ValueError("need at least one candidate")
    try:
        completion = lm(render_scoring_prompt(input, candidates))
        scores = _parse_scores(completion, len(candidates))
    except Exception as exc:
        logger.warning("clarifier scoring provider failed: %s", exc)
        scores = None
    if scores is None or sum(scores) == 0:
        scores = [1.0] * len(candidates)
    total = sum(scores)
    return [replace(c, score=s / total) for c, s in zip(candidates, scores)]


def decide(
    candidates: list[Interpretation],
    cost_ask: float = ASK_MARGIN,
    p_min_answer: float = P_MIN_ANSWER,
) -> ClarifierDecision:
    """Answer with the top candidate only when it is both confident enough
    and clearly ahead; otherwise ask which of the top two was meant.
    ``cost_ask`` is the required lead: a cheaper question means asking on a
    smaller gap. Ties between candidates keep the earlier one on top."""
    ranked = sorted(
        range(len(candidates)), key=lambda i: (-candidates[i].score, i)
    )
    top = candidates[ranked[0]]
    second = candidates[ranked[1]] if len(ranked) > 1 else None
    lead = top.score - (second.score if second else 0.0)
    if top.score >= p_min_answer and lead >= cost_ask:
        return ClarifierDecision("answer", interpretation_id=top.id)
    if second is None:
        return ClarifierDecision("answer", interpretation_id=top.id)
    question = f"Do you mean {top.paraphrase} or {second.paraphrase}?"
    return ClarifierDecision("ask", question=question)


def apply_reply(input: ClarifierInput, reply: str) -> ClarifierInput:
    """Fold the user's reply into the history; when it names one of the
    offered readings, record the resolution in the state summary."""
    reply = reply.strip()
    if not reply:
        return input
    resolved = None
    low = reply.lower()
    for c in input.pending:
        paraphrase = c.paraphrase.lower()
        if paraphrase in low or low in paraphrase:
            resolved = c
            break
    updated = replace(input, text_history=input.text_history + (reply,))
    if resolved is not None:
        return replace(
            updated,
            state=(input.state + f" resolved={resolved.paraphrase}").strip(),
            resolved_id=resolved.id,
        )
    return updated


def render_candidates_prompt(query: str, context_text: str) -> str:
    return (
        f"{CANDIDATES_MARKER}\n"
        f"Request: {query}\n"
        f"Context:\n{context_text}"
        "If the request is ambiguous, list up to 3 candidate readings as a "
        "JSON array of strings; reply [] when it is clear."
    )


def parse_candidates(completion: str) -> list[Interpretation]:
    try:
        raw = json.loads(completion)
    except json.JSONDecodeError:
        return []
    if not isinstance(raw, list):
        return []
    out = []
    for i, item in enumerate(raw[:3], start=1):
        if isinstance(item, str) and item.strip():
            out.append(Interpretation(id=f"c{i}", paraphrase=item.strip()))
    return out

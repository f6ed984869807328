"""Multiple-choice answering over the assembled context.

Normalizes free-form question fixtures into lettered options, renders a
small ensemble of syntactically different prompts, extracts the chosen
letter from each completion with prioritized regexes, and majority-votes
the ensemble.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .context import ContextConfig, DEFAULT_CONFIG, ContextBundle, assemble_context, render_bundle
from .events import EventLog
from .providers import LanguageModelProvider, ProviderFailure, SummarizerProvider

LETTERS = "ABCDE"


class MalformedQuestion(ValueError):
    pass


class NoExtractableAnswer(RuntimeError):
    pass


@dataclass(frozen=True)
class MCQuestion:
    stem: str
    options: tuple[str, ...]  # option i is lettered LETTERS[i]
    hint: str | None = None

    def __post_init__(self) -> None:
        if not 2 <= len(self.options) <= 5:
            raise MalformedQuestion(f"need 2-5 options, got {len(self.options)}")

    def lettered(self) -> list[tuple[str, str]]:
        return [(LETTERS[i], text) for i, text in enumerate(self.options)]


@dataclass(frozen=True)
class Vote:
    letters: tuple[str | None, ...]


@dataclass
class Diagnostics:
    prompts: list[str] = field(default_factory=list)
    completions: list[str | None] = field(default_factory=list)
    letters: list[str | None] = field(default_factory=list)
    window: tuple[int, int] = (0, 0)
    context_used: int = 0
    answer: str | None = None


_OPTION_LINE = re.compile(r"^\s*(?:\(?([A-Ea-e1-5])[.)\]:]|\(([A-Ea-e1-5])\))\s+(.+)$")
_SUBJECT_PRONOUNS = re.compile(r"\b(i|you|he|she|it|we|they)\b", re.I)
VIEWPOINT_PREAMBLE = "From my first-person view, "


def normalize_question(raw: str, hint: str | None = None) -> MCQuestion:
    """Parse ``stem`` + labeled option lines, re-letter the options
    contiguously from A in their original order, and ground the stem in the
    first person when it names no subject."""
    stem_lines: list[str] = []
    options: list[str] = []
    for line in raw.splitlines():
        m = _OPTION_LINE.match(line)
        if m:
            options.append(m.group(3).strip())
        elif line.strip() and not options:
            stem_lines.append(line.strip())
    if len(options) < 2:
        raise MalformedQuestion(f"found {len(options)} options, need at least 2")
    if len(options) > 5:
        raise MalformedQuestion(f"found {len(options)} options, at most 5 supported")
    stem = " ".join(stem_lines)
    if not stem:
        raise MalformedQuestion("no question stem found")
    if not _SUBJECT_PRONOUNS.search(stem):
        stem = VIEWPOINT_PREAMBLE + stem
    return MCQuestion(stem, tuple(options), hint)


def _options_block(q: MCQuestion) -> str:
    return "\n".join(f"{letter}. {text}" for letter, text in q.lettered())


def render_prompt_variants(q: MCQuestion, ctx: ContextBundle, k: int = 5) -> list[str]:
    """``k`` distinct prompt renderings of the same question and context."""
    if k < 1:
        raise ValueError("k must be >= 1")
    context_text = render_bundle(ctx)
    options = _options_block(q)
    templates = [
        (
            "Answer the multiple-choice question using only the context.\n"
            f"Context:\n{context_text}"
            f"Question: {q.stem}\n{options}\n"
            "Reply with the single best option letter."
        ),
        (
            f"Options:\n{options}\n"
            f"Question: {q.stem}\n"
            f"Context:\n{context_text}"
            "Which option is correct? Give the letter."
        ),
        (f"{context_text}Q: {q.stem}\n{options}\nA:"),
        (
            f"Context:\n{context_text}"
            f"Question: {q.stem}\n{options}\n"
            "Think step by step about what happened, then state your final "
            "answer as 'the answer is X'."
        ),
        (
            f"I need to decide: {q.stem}\n"
            f"My notes:\n{context_text}"
            f"The candidates are:\n{options}\n"
            "State the letter of the correct candidate."
        ),
    ]
    variants = []
    for i in range(k):
        text = templates[i % len(templates)]
        if i >= len(templates):
            text = f"(restatement {i // len(templates)})\n" + text
        variants.append(text)
    return variants


_ANSWER_IS = re.compile(r"answer\s+is\s*:?\s*\(?\s*([A-Ea-e])\b", re.I)
_PARENS = re.compile(r"\(([A-Ea-e])\)")
_BARE_LINE = re.compile(r"^\s*([A-Ea-e])\s*\.?\s*$", re.M)


def extract_choice(completion: str, num_options: int) -> str | None:
    """Extract the chosen letter: 'answer is L' beats '(L)' beats a bare-L
    line; within a pattern the last valid match wins. Letters outside the
    option range never match."""
    if not 2 <= num_options <= 5:
        raise ValueError(f"num_options must be in 2..5, got {num_options}")
    valid = LETTERS[:num_options]
    for pattern in (_ANSWER_IS, _PARENS, _BARE_LINE):
        hits = [m.group(1).upper() for m in pattern.finditer(completion)]
        hits = [h for h in hits if h in valid]
        if hits:
            return hits[-1]
    return None


def majority_vote(v: Vote) -> str:
    present = [x for x in v.letters if x is not None]
    if not present:
        raise NoExtractableAnswer("no variant produced an extractable answer")
    counts: dict[str, int] = {}
    for x in present:
        counts[x] = counts.get(x, 0) + 1
    # most frequent; ties broken by the smallest letter
    return min(counts, key=lambda letter: (-counts[letter], letter))


def answer_question(
    q: MCQuestion,
    log: EventLog,
    summarizer: SummarizerProvider,
    lm: LanguageModelProvider,
    budget: int,
    now: int,
    k: int = 5,
    cfg: ContextConfig = DEFAULT_CONFIG,
) -> tuple[str, Diagnostics]:
    """Full answering pass: context, k prompt variants, extraction, vote.

    A provider failure on one variant degrades to an absent vote; only a
    failure of every variant is fatal.
    """
    window_query = q.hint if q.hint else q.stem
    ctx = assemble_context(window_query, log, summarizer, budget, now, cfg)
    diag = Diagnostics(window=(ctx.window.start, ctx.window.end), context_used=ctx.used)
    failures = 0
    letters: list[str | None] = []
    for prompt in render_prompt_variants(q, ctx, k):
        diag.prompts.append(prompt)
        try:
            completion = lm(prompt)
        except Exception:
            failures += 1
            diag.completions.append(None)
            letters.append(None)
            continue
        diag.completions.append(completion)
        letters.append(extract_choice(completion, len(q.options)))
    if failures == k:
        raise ProviderFailure(f"all {k} variant calls failed")
    diag.letters = letters
    answer = majority_vote(Vote(tuple(letters)))
    diag.answer = answer
    return answer, diag

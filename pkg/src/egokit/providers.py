"""Pluggable model providers and their deterministic scripted stubs.

Every model call in the runtime (composer LLM, chunk summarizer, ASR, TTS)
goes through one of the small interfaces below. Tests and the offline
harnesses wire in stub implementations driven by ordered substring tables,
so the whole system runs without any network or model weights.
"""
from __future__ import annotations

import json
import os
import re
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

# A language model provider maps a rendered prompt to a completion.
LanguageModelProvider = Callable[[str], str]


class ProviderFailure(RuntimeError):
    """A provider call failed; carries optional context about the call."""


class SummarizerProvider(Protocol):
    def __call__(self, chunk_text: str, query: str) -> tuple[str, float]:
        """Return (summary text, relevance in [0, 1]) for the chunk."""


class AsrProvider(Protocol):
    def __call__(self, samples: bytes, sample_rate: int) -> str:
        """Transcribe a PCM16LE mono segment to text."""


class TtsProvider(Protocol):
    def __call__(self, text: str) -> bytes:
        """Synthesize text to an audio payload."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class StubTable:
    """Ordered substring-match table: first pattern contained in the input
    wins, else the default response."""

    entries: tuple[tuple[str, str], ...] = ()
    default: str = ""

    def lookup(self, prompt: str) -> str:
        for pattern, response in self.entries:
            if pattern in prompt:
                return response
        return self.default


def stub_complete(table: StubTable, prompt: str) -> str:
    return table.lookup(prompt)


def make_stub_lm(table: StubTable) -> LanguageModelProvider:
    return lambda prompt: table.lookup(prompt)


def load_stub_table(path: str | Path) -> StubTable:
    """Parse ``pattern<TAB>response`` lines; the last line must be
    ``DEFAULT<TAB>response``. Duplicate patterns are kept in order."""
    entries: list[tuple[str, str]] = []
    default: str | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if default is not None:
                raise ParseError("content after DEFAULT line", lineno)
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ParseError("expected pattern<TAB>response", lineno)
            pattern, response = parts
            if pattern == "DEFAULT":
                default = response
            elif not pattern:
                raise ParseError("empty pattern", lineno)
            else:
                entries.append((pattern, response))
    if default is None:
        raise ParseError("missing DEFAULT line", lineno if entries else 0)
    return StubTable(tuple(entries), default)


_WORD = re.compile(r"[a-z0-9]+")
_STOPWORDS = frozenset(
    "a an and are at be did do for from i in is it of on the this to was "
    "what when where which who you".split()
)


def _keywords(text: str) -> set[str]:
    return {w for w in _WORD.findall(text.lower()) if w not in _STOPWORDS}


@dataclass(frozen=True)
class KeywordSummarizer:
    """Reference summarizer stub: relevance is the fraction of query
    keywords present in the chunk; the summary keeps the chunk lines that
    contain any of them (or the first line when none match)."""

    max_chars: int = 256

    def __call__(self, chunk_text: str, query: str) -> tuple[str, float]:
        query_kw = _keywords(query)
        lines = [ln for ln in chunk_text.splitlines() if ln.strip()]
        if not query_kw or not lines:
            summary = lines[0] if lines else ""
            return summary[: self.max_chars], 0.0
        hits = [ln for ln in lines if _keywords(ln) & query_kw]
        covered = _keywords(" ".join(hits)) & query_kw
        relevance = len(covered) / len(query_kw)
        summary = " / ".join(hits) if hits else lines[0]
        return summary[: self.max_chars], relevance


@dataclass
class ScriptedAsr:
    """Returns queued transcripts in dispatch order, then the fallback."""

    transcripts: list[str] = field(default_factory=list)
    fallback: str = ""

    def __call__(self, samples: bytes, sample_rate: int) -> str:
        if self.transcripts:
            return self.transcripts.pop(0)
        return self.fallback


def passthrough_tts(text: str) -> bytes:
    return text.encode("utf-8")


@dataclass(frozen=True)
class HttpCompletionProvider:
    """Adapter for an HTTP completion endpoint, configured via environment:
    EGOKIT_LM_URL, EGOKIT_LM_KEY, EGOKIT_LM_TIMEOUT_MS. Excluded from the
    test suite; present so a real model can replace the stubs unchanged."""

    url: str
    api_key: str = ""
    timeout_ms: int = 30_000

    @classmethod
    def from_env(cls) -> "HttpCompletionProvider":
        url = os.environ.get("EGOKIT_LM_URL", "")
        if not url:
            raise ProviderFailure("EGOKIT_LM_URL is not set")
        return cls(
            url=url,
            api_key=os.environ.get("EGOKIT_LM_KEY", ""),
            timeout_ms=int(os.environ.get("EGOKIT_LM_TIMEOUT_MS", "30000")),
        )

    def __call__(self, prompt: str) -> str:
        body = json.dumps({"prompt": prompt}).encode("utf-8")
        req = urllib.request.Request(self.url, data=body, method="POST")
        req.add_header("Content-Type", "application/json")
        if self.api_key:
            req.add_header("Authorization", f"Bearer {self.api_key}")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_ms / 1000) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:  # network and decode failures alike
            raise ProviderFailure(str(exc)) from exc
        if "completion" not in payload:
            raise ProviderFailure("response missing 'completion' field")
        return str(payload["completion"])


def scripted_sequence(responses: Sequence[str]) -> LanguageModelProvider:
    """A provider that replays a fixed sequence of completions, raising
    once exhausted. Handy for repair-retry tests."""
    remaining = list(responses)

    def provider(prompt: str) -> str:
        if not remaining:
            raise ProviderFailure("scripted sequence exhausted")
        return remaining.pop(0)

    return provider

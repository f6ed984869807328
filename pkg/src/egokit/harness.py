"""Offline experiment harnesses: QA over fixtures, audio replay conformance,
and the vote-stabilization Monte Carlo. All runs are seeded and reproducible
bit-for-bit; reports carry per-item rows plus aggregates recomputed from them.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .answering import MCQuestion, answer_question
from .audio import VadConfig, VadState, iter_chunks, process_chunk, read_wav
from .board import (
    EngineConfig,
    VoteBuffer,
    fen_decode,
    grid_from_state,
    push_and_commit,
    simulate_observation,
    vote_grids,
)
from .board.state import BoardState, EMPTY
from .context import ContextConfig
from .events import EventLog, ingest_log_file
from .providers import KeywordSummarizer, StubTable, make_stub_lm


@dataclass
class RunReport:
    command: str
    config: dict[str, Any]
    items: list[dict[str, Any]] = field(default_factory=list)
    aggregate: dict[str, Any] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    passed: bool = False

    def to_text(self) -> str:
        lines = [f"== {self.command} =="]
        for key, value in sorted(self.config.items()):
            lines.append(f"  {key} = {value}")
        for row in self.items:
            lines.append("  " + json.dumps(row, sort_keys=True))
        lines.append("  aggregate: " + json.dumps(self.aggregate, sort_keys=True))
        lines.append(f"  wall_clock_s: {self.wall_clock_s:.3f}")
        lines.append(f"  result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"row": "config", **self.config}, sort_keys=True)]
        lines += [json.dumps({"row": "item", **r}, sort_keys=True) for r in self.items]
        lines.append(
            json.dumps(
                {"row": "aggregate", "passed": self.passed, **self.aggregate},
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")


# ----------------------------------------------------------------------
# QA pipeline


def load_qa_fixture(path: str | Path) -> list[dict[str, Any]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                stem = record["question"]
                options = record["options"]
                gold = record["answer"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad fixture record: {exc}") from exc
            if not isinstance(options, list) or not 2 <= len(options) <= 5:
                raise ValueError(f"{path}:{lineno}: need 2-5 options")
            records.append(
                {
                    "question": str(stem),
                    "options": [str(o) for o in options],
                    "answer": str(gold),
                    "hint": record.get("hint"),
                }
            )
    return records


def run_qa(
    fixture_path: str | Path,
    events_path: str | Path | None,
    lm_table: StubTable,
    budget: int = 2048,
    chunk_duration: int = 3_600_000,
    context_enabled: bool = True,
    accuracy_floor: float | None = None,
    k: int = 5,
) -> RunReport:
    """Answer every fixture question; pass iff accuracy clears the floor."""
    start = time.perf_counter()
    records = load_qa_fixture(fixture_path)
    log = (
        ingest_log_file(events_path)
        if (events_path and context_enabled)
        else EventLog()
    )
    now = log.span.end if len(log) else 0
    cfg = ContextConfig(chunk_duration=chunk_duration)
    lm = make_stub_lm(lm_table)
    summarizer = KeywordSummarizer()

    report = RunReport(
        command="qa",
        config={
            "fixture": str(fixture_path),
            "events": str(events_path),
            "budget": budget,
            "chunk_duration": chunk_duration,
            "context_enabled": context_enabled,
            "k": k,
            "accuracy_floor": accuracy_floor,
        },
    )
    correct = 0
    for i, record in enumerate(records):
        q = MCQuestion(record["question"], tuple(record["options"]), record["hint"])
        try:
            answer, diag = answer_question(q, log, summarizer, lm, budget, now, k, cfg)
        except Exception as exc:
            report.items.append({"item": i, "answer": None, "gold": record["answer"], "error": str(exc)})
            continue
        hit = answer == record["answer"]
        correct += hit
        report.items.append(
            {
                "item": i,
                "answer": answer,
                "gold": record["answer"],
                "correct": hit,
                "votes": diag.letters,
                "window": list(diag.window),
                "context_used": diag.context_used,
            }
        )
    total = len(records)
    accuracy = correct / total if total else None
    report.aggregate = {"total": total, "correct": correct, "accuracy": accuracy}
    report.wall_clock_s = time.perf_counter() - start
    report.passed = total == 0 or accuracy_floor is None or accuracy >= accuracy_floor
    return report


# ----------------------------------------------------------------------
# Audio replay conformance


def load_expected_events(path: str | Path) -> list[tuple[int, str]]:
    expected = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected chunk_index<TAB>event_kind")
            expected.append((int(parts[0]), parts[1]))
    return expected


def parse_playing_ranges(text: str) -> list[tuple[int, int]]:
    """Parse ``start:end[,start:end...]`` chunk-index ranges (end exclusive)."""
    ranges = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        a, b = part.split(":")
        ranges.append((int(a), int(b)))
    return ranges


def replay_events(
    samples: np.ndarray,
    cfg: VadConfig,
    playing_ranges: list[tuple[int, int]] | None = None,
) -> list[tuple[int, str]]:
    playing_ranges = playing_ranges or []
    state = VadState()
    emitted = []
    for idx, chunk in enumerate(iter_chunks(samples, cfg)):
        playing = any(a <= idx < b for a, b in playing_ranges)
        state, events = process_chunk(state, chunk, cfg, playing)
        emitted.extend((idx, e.kind) for e in events)
    return emitted


def replay_audio(
    wav_path: str | Path,
    expected_path: str | Path,
    cfg: VadConfig | None = None,
    playing_ranges: list[tuple[int, int]] | None = None,
) -> RunReport:
    """Chunk the WAV through the state machine and diff emitted events
    against the expectations; pass iff they match exactly."""
    start = time.perf_counter()
    cfg = cfg or VadConfig()
    samples, rate = read_wav(wav_path)
    if rate != cfg.sample_rate:
        raise ValueError(f"{wav_path}: {rate} Hz, session expects {cfg.sample_rate}")
    emitted = replay_events(samples, cfg, playing_ranges)
    expected = load_expected_events(expected_path)

    report = RunReport(
        command="replay-audio",
        config={
            "wav": str(wav_path),
            "expected": str(expected_path),
            "chunks": math.ceil(len(samples) / cfg.chunk_samples),
            "playing": playing_ranges or [],
        },
    )
    first_divergence = None
    for i in range(max(len(emitted), len(expected))):
        got = emitted[i] if i < len(emitted) else None
        want = expected[i] if i < len(expected) else None
        match = got == want
        if not match and first_divergence is None:
            first_divergence = (got or want)[0]
        report.items.append({"event": i, "got": got, "want": want, "match": match})
    report.aggregate = {
        "emitted": len(emitted),
        "expected": len(expected),
        "first_divergent_chunk": first_divergence,
    }
    report.wall_clock_s = time.perf_counter() - start
    report.passed = first_divergence is None and len(emitted) == len(expected)
    return report


# ----------------------------------------------------------------------
# Vote-stabilization Monte Carlo


def binomial_commit_probability(n: int, tau: float, p: float) -> float:
    """P[a square's true class is observed at least ceil(tau*n) times in n
    frames when each frame flips it away with probability p]."""
    m_star = math.ceil(tau * n - 1e-9)
    keep = 1.0 - p
    return sum(
        math.comb(n, m) * keep**m * p ** (n - m) for m in range(m_star, n + 1)
    )


def board_montecarlo(
    true_fen: str,
    p: float,
    n: int = 5,
    tau: float = 0.6,
    trials: int = 10_000,
    seed: int = 0,
) -> RunReport:
    """Empirical first-commit correctness of the per-square vote versus the
    analytic binomial value. A square scores only when the vote itself
    commits the true label; unstable squares count as misses."""
    start = time.perf_counter()
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise rate {p} outside [0, 1]")
    truth_state = fen_decode(true_fen)
    truth = grid_from_state(truth_state)
    rng = np.random.default_rng(seed)
    blank = BoardState(tuple([EMPTY] * 64))

    correct_squares = 0
    for _ in range(trials):
        buf = VoteBuffer(n=n, tau=tau, previous=grid_from_state(blank))
        for _ in range(n):
            buf, committed = push_and_commit(
                buf, simulate_observation(truth_state, p, rng)
            )
        winners, counts = vote_grids(buf.ring)
        stable = counts / n >= tau
        correct_squares += int((stable & (winners == truth) & (committed == truth)).sum())

    empirical = correct_squares / (trials * 64)
    analytic = binomial_commit_probability(n, tau, p)
    report = RunReport(
        command="board-mc",
        config={
            "fen": true_fen,
            "p": p,
            "n": n,
            "tau": tau,
            "trials": trials,
            "seed": seed,
        },
        items=[{"empirical": empirical, "analytic": analytic}],
        aggregate={
            "empirical": empirical,
            "analytic": analytic,
            "abs_error": abs(empirical - analytic),
        },
    )
    report.wall_clock_s = time.perf_counter() - start
    report.passed = abs(empirical - analytic) <= 0.01
    return report

#!/usr/bin/env python3
"""Regenerate the WAV replay fixtures under fixtures/audio/.

Each fixture is a deterministic synthetic stream plus the event file the
replay harness diffs against. Expected events come from the independent
reference interpreter in tests/, then are double-checked against the
implementation before being written.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from egokit.audio import VadConfig, iter_chunks, write_wav
from egokit.harness import replay_events
from oracle_vad import reference_vad_run

RATE = 16_000
OUT = ROOT / "fixtures" / "audio"


def tone(ms, peak, freq=440.0):
    t = np.arange(int(ms * RATE / 1000)) / RATE
    return (np.sin(2 * np.pi * freq * t) * peak).astype(np.int16)


def silence(ms):
    return np.zeros(int(ms * RATE / 1000), dtype=np.int16)


FIXTURES = {
    "silence": (np.concatenate([silence(1500)]), []),
    "single_utterance": (
        np.concatenate([silence(300), tone(400, 2000), silence(800)]),
        [],
    ),
    "double_utterance": (
        np.concatenate(
            [silence(200), tone(500, 2500), silence(800), tone(300, 2200, 330), silence(900)]
        ),
        [],
    ),
    "barge_in": (
        np.concatenate([silence(100), tone(60, 3000), silence(1000)]),
        [(0, 200)],  # playback active for the whole stream
    ),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cfg = VadConfig()
    for name, (samples, playing) in FIXTURES.items():
        chunks = [c.samples for c in iter_chunks(samples, cfg)]
        flags = [any(a <= i < b for a, b in playing) for i in range(len(chunks))]
        expected = reference_vad_run(chunks, cfg, flags)
        got = replay_events(samples, cfg, playing)
        assert [(e[1], e[0]) for e in expected] == got, name

        write_wav(OUT / f"{name}.wav", samples, RATE)
        lines = "".join(f"{e[1]}\t{e[0]}\n" for e in expected)
        (OUT / f"{name}.events").write_text(lines, encoding="utf-8")
        playing_text = ",".join(f"{a}:{b}" for a, b in playing)
        (OUT / f"{name}.playing").write_text(playing_text + "\n", encoding="utf-8")
        print(f"{name}: {len(chunks)} chunks, {len(expected)} events")


if __name__ == "__main__":
    main()

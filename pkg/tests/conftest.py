from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from egokit.events import Event, EventLog, append_event

RATE = 16_000


def tone(ms: int, peak: int, freq: float = 440.0, rate: int = RATE) -> np.ndarray:
    t = np.arange(int(ms * rate / 1000)) / rate
    return (np.sin(2 * np.pi * freq * t) * peak).astype(np.int16)


def quiet(ms: int, rate: int = RATE) -> np.ndarray:
    return np.zeros(int(ms * rate / 1000), dtype=np.int16)


def build_log(entries: list[tuple[int, str, str]]) -> EventLog:
    log = EventLog()
    for t, modality, content in entries:
        log = append_event(log, Event(t, modality, content, "test"))
    return log


@pytest.fixture
def fixtures_dir() -> Path:
    return Path(__file__).parent.parent / "fixtures"

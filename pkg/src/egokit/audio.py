"""Energy VAD with pre-roll, silence segmentation, and barge-in detection.

The state machine is a pure function of (state, chunk, config, playing
flag): identical inputs replay to identical event sequences, which is what
the conformance harness leans on. All duration bookkeeping is done in
sample counts, so nothing depends on wall clocks or float accumulation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

FULL_SCALE = 32768
IDLE = "IDLE"
RECORDING = "RECORDING"
HALT_PLAYBACK = "halt_playback"
DISPATCH = "dispatch"


class EmptyChunk(ValueError):
    pass


class RateMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AudioChunk:
    samples: np.ndarray  # int16 mono PCM
    sample_rate: int = 16_000

    def __post_init__(self) -> None:
        if self.samples.size == 0:
            raise EmptyChunk("audio chunk has no samples")

    @property
    def duration_ms(self) -> float:
        return self.samples.size * 1000 / self.sample_rate


@dataclass(frozen=True)
class VadConfig:
    gain: float = 5.0
    theta_start: float = 0.10
    theta_barge_in: float = 0.25
    t_silence: int = 700  # ms of quiet that finalizes a segment
    t_min: int = 250  # ms below which finalized segments are dropped
    preroll: int = 300  # ms of lookback prepended to each segment
    sample_rate: int = 16_000
    chunk_samples: int = 320  # 20 ms at 16 kHz

    def __post_init__(self) -> None:
        if self.gain <= 0:
            raise ValueError("gain must be positive")
        if not 0 < self.theta_start <= self.theta_barge_in <= 1:
            raise ValueError("need 0 < theta_start <= theta_barge_in <= 1")

    @property
    def preroll_samples(self) -> int:
        return self.preroll * self.sample_rate // 1000

    @property
    def silence_samples(self) -> int:
        return self.t_silence * self.sample_rate // 1000


@dataclass(frozen=True)
class VadState:
    mode: str = IDLE
    ring: np.ndarray = None  # type: ignore[assignment]
    segment: np.ndarray = None  # type: ignore[assignment]
    silence: int = 0  # accumulated quiet samples while recording

    def __post_init__(self) -> None:
        empty = np.zeros(0, dtype=np.int16)
        if self.ring is None:
            object.__setattr__(self, "ring", empty)
        if self.segment is None:
            object.__setattr__(self, "segment", empty)


@dataclass(frozen=True)
class VadEvent:
    kind: str  # HALT_PLAYBACK or DISPATCH
    segment: np.ndarray | None = None


def amplitude(chunk: AudioChunk, gain: float) -> float:
    """Peak amplitude of the gained chunk as a fraction of full scale,
    saturating at 1.0."""
    peak = int(np.abs(chunk.samples.astype(np.int32)).max())
    return min(1.0, gain * peak / FULL_SCALE)


def apply_gain(samples: np.ndarray, gain: float) -> np.ndarray:
    scaled = np.clip(samples.astype(np.float64) * gain, -FULL_SCALE, FULL_SCALE - 1)
    return scaled.astype(np.int16)


def process_chunk(
    state: VadState,
    chunk: AudioChunk,
    cfg: VadConfig,
    playing: bool,
) -> tuple[VadState, list[VadEvent]]:
    if chunk.sample_rate != cfg.sample_rate:
        raise RateMismatch(f"chunk at {chunk.sample_rate} Hz, session at {cfg.sample_rate} Hz")

    gained = apply_gain(chunk.samples, cfg.gain)
    ring = np.concatenate([state.ring, gained])[-cfg.preroll_samples :]
    level = amplitude(chunk, cfg.gain)
    events: list[VadEvent] = []

    if playing and level > cfg.theta_barge_in:
        events.append(VadEvent(HALT_PLAYBACK))

    mode, segment, silence = state.mode, state.segment, state.silence
    if mode == IDLE:
        if level > cfg.theta_start:
            mode = RECORDING
            segment = ring.copy()
            silence = 0
    else:
        segment = np.concatenate([segment, gained])
        if level < cfg.theta_start:
            silence += chunk.samples.size
            if silence >= cfg.silence_samples:
                if segment.size * 1000 > cfg.t_min * cfg.sample_rate:
                    events.append(VadEvent(DISPATCH, segment))
                mode = IDLE
                segment = np.zeros(0, dtype=np.int16)
                silence = 0
        else:
            silence = 0

    return VadState(mode, ring, segment, silence), events


def iter_chunks(samples: np.ndarray, cfg: VadConfig):
    """Split a PCM stream into the session's chunk size; a short tail is
    kept as a final smaller chunk."""
    for start in range(0, len(samples), cfg.chunk_samples):
        piece = samples[start : start + cfg.chunk_samples]
        if piece.size:
            yield AudioChunk(piece, cfg.sample_rate)


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a PCM16LE mono WAV file."""
    import wave

    with wave.open(str(path), "rb") as wav:
        if wav.getsampwidth() != 2 or wav.getnchannels() != 1:
            raise ValueError("expected 16-bit mono PCM")
        rate = wav.getframerate()
        data = wav.readframes(wav.getnframes())
    return np.frombuffer(data, dtype="<i2").astype(np.int16), rate


def write_wav(path, samples: np.ndarray, rate: int = 16_000) -> None:
    import wave

    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(samples.astype("<i2").tobytes())

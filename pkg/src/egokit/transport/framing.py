"""Bit-exact binary framing: 4-byte big-endian payload length, then one
frame-type byte, then the payload."""
from __future__ import annotations

import struct
from dataclasses import dataclass

CONTROL = 0x01
AUDIO = 0x02
VIDEO = 0x03
EVENT = 0x04
FRAME_TYPES = (CONTROL, AUDIO, VIDEO, EVENT)

MAX_PAYLOAD = 16 * 1024 * 1024
_HEADER = struct.Struct(">IB")


class UnknownFrameType(ValueError):
    pass


class OversizeFrame(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    frame_type: int
    payload: bytes

    def __post_init__(self) -> None:
        if self.frame_type not in FRAME_TYPES:
            raise UnknownFrameType(f"frame type 0x{self.frame_type:02x}")
        if len(self.payload) > MAX_PAYLOAD:
            raise OversizeFrame(f"payload of {len(self.payload)} bytes")


def encode_frame(f: Frame) -> bytes:
    return _HEADER.pack(len(f.payload), f.frame_type) + f.payload


def decode_frame(buf: bytes) -> tuple[Frame | None, bytes]:
    """Decode one frame from the head of ``buf``. Returns (None, buf)
    untouched when more bytes are needed."""
    if len(buf) < _HEADER.size:
        return None, buf
    length, frame_type = _HEADER.unpack_from(buf)
    if length > MAX_PAYLOAD:
        raise OversizeFrame(f"declared payload of {length} bytes")
    if frame_type not in FRAME_TYPES:
        raise UnknownFrameType(f"frame type 0x{frame_type:02x}")
    end = _HEADER.size + length
    if len(buf) < end:
        return None, buf
    return Frame(frame_type, buf[_HEADER.size : end]), buf[end:]


class FrameDecoder:
    """Incremental decoder for a byte stream."""

    def __init__(self) -> None:
        self._buf = b""

    def feed(self, data: bytes) -> list[Frame]:
        self._buf += data
        frames = []
        while True:
            frame, self._buf = decode_frame(self._buf)
            if frame is None:
                return frames
            frames.append(frame)

from .framing import (
    AUDIO,
    CONTROL,
    EVENT,
    FRAME_TYPES,
    Frame,
    FrameDecoder,
    MAX_PAYLOAD,
    OversizeFrame,
    UnknownFrameType,
    VIDEO,
    decode_frame,
    encode_frame,
)
from .messages import (
    BadControlMessage,
    KINDS,
    control_message,
    decode_control,
    encode_control,
)
from .server import BindError, RuntimeDeps, Server, ServerConfig, serve

__all__ = [
    "AUDIO",
    "BadControlMessage",
    "BindError",
    "CONTROL",
    "EVENT",
    "FRAME_TYPES",
    "Frame",
    "FrameDecoder",
    "KINDS",
    "MAX_PAYLOAD",
    "OversizeFrame",
    "RuntimeDeps",
    "Server",
    "ServerConfig",
    "UnknownFrameType",
    "VIDEO",
    "control_message",
    "decode_control",
    "decode_frame",
    "encode_control",
    "encode_frame",
    "serve",
]

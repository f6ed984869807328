"""Control-message vocabulary: UTF-8 JSON objects inside control frames.

Every message carries ``kind`` plus a session-scoped ``id``; reply kinds
(``confirm_reply``, ``clarify_reply``) reuse the id of the request they
answer, and ``response`` reuses the id of its ``query``/``transcript``.
"""
from __future__ import annotations

import json
from typing import Any

from .framing import CONTROL, Frame

KINDS = frozenset(
    {
        "query",
        "response",
        "confirm_request",
        "confirm_reply",
        "clarify_question",
        "clarify_reply",
        "tool_call",
        "tool_result",
        "transcript",
        "halt",
        "tools_list",
        "error",
    }
)


class BadControlMessage(ValueError):
    pass


def control_message(kind: str, id: str, **fields: Any) -> dict[str, Any]:
    if kind not in KINDS:
        raise BadControlMessage(f"unknown kind {kind!r}")
    return {"kind": kind, "id": id, **fields}


def encode_control(message: dict[str, Any]) -> Frame:
    if message.get("kind") not in KINDS:
        raise BadControlMessage(f"unknown kind {message.get('kind')!r}")
    return Frame(CONTROL, json.dumps(message, separators=(",", ":")).encode("utf-8"))


def decode_control(frame: Frame) -> dict[str, Any]:
    if frame.frame_type != CONTROL:
        raise BadControlMessage(f"not a control frame: type 0x{frame.frame_type:02x}")
    try:
        message = json.loads(frame.payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadControlMessage(f"bad control payload: {exc}") from exc
    if not isinstance(message, dict):
        raise BadControlMessage("control payload is not an object")
    kind = message.get("kind")
    if kind not in KINDS:
        raise BadControlMessage(f"unknown kind {kind!r}")
    if "id" not in message:
        raise BadControlMessage("control message missing id")
    return message

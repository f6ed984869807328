"""Minimal server-side WebSocket (RFC 6455) so browsers can join.

Only what a browser client needs: the upgrade handshake, masked client
frames with continuation, binary messages, ping/pong, and close. Our binary
framing rides inside WebSocket binary messages unchanged.
"""
from __future__ import annotations

import base64
import hashlib
import socket
import struct

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

# generous cap: one carried frame (header + max payload) with slack
MAX_MESSAGE = 17 * 1024 * 1024

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class HandshakeError(ValueError):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def read_handshake(conn: socket.socket, initial: bytes) -> bytes:
    """Complete the HTTP upgrade; returns bytes read past the header."""
    data = initial
    while b"\r\n\r\n" not in data:
        more = conn.recv(4096)
        if not more:
            raise HandshakeError("connection closed during handshake")
        data += more
        if len(data) > 65536:
            raise HandshakeError("oversized handshake request")
    header, rest = data.split(b"\r\n\r\n", 1)
    lines = header.decode("latin-1").split("\r\n")
    if not lines[0].startswith("GET "):
        raise HandshakeError(f"bad request line {lines[0]!r}")
    headers = {}
    for line in lines[1:]:
        if ":" in line:
            name, value = line.split(":", 1)
            headers[name.strip().lower()] = value.strip()
    key = headers.get("sec-websocket-key")
    if not key or "websocket" not in headers.get("upgrade", "").lower():
        raise HandshakeError("not a websocket upgrade")
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    )
    conn.sendall(response.encode("latin-1"))
    return rest


def encode_ws_frame(opcode: int, payload: bytes) -> bytes:
    header = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 65536:
        header += bytes([126]) + struct.pack(">H", n)
    else:
        header += bytes([127]) + struct.pack(">Q", n)
    return header + payload  # server frames are unmasked


class WebSocketChannel:
    """Byte channel over an upgraded socket: recv() yields the payloads of
    binary messages, send() wraps each buffer in one binary message."""

    def __init__(self, conn: socket.socket, leftover: bytes = b""):
        self._conn = conn
        self._buf = leftover
        self._fragments: list[bytes] = []

    def _read_exact(self, n: int) -> bytes | None:
        while len(self._buf) < n:
            try:
                more = self._conn.recv(65536)
            except OSError:
                return None
            if not more:
                return None
            self._buf += more
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def recv(self) -> bytes:
        """Next binary message payload; b'' once the peer closes."""
        while True:
            head = self._read_exact(2)
            if head is None:
                return b""
            fin = bool(head[0] & 0x80)
            opcode = head[0] & 0x0F
            masked = bool(head[1] & 0x80)
            length = head[1] & 0x7F
            if length == 126:
                ext = self._read_exact(2)
                if ext is None:
                    return b""
                length = struct.unpack(">H", ext)[0]
            elif length == 127:
                ext = self._read_exact(8)
                if ext is None:
                    return b""
                length = struct.unpack(">Q", ext)[0]
            if length > MAX_MESSAGE:
                return b""  # refuse to buffer oversized messages
            mask = b""
            if masked:
                mask = self._read_exact(4) or b""
                if len(mask) != 4:
                    return b""
            payload = self._read_exact(length) if length else b""
            if payload is None:
                return b""
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))

            if opcode == OP_CLOSE:
                try:
                    self._conn.sendall(encode_ws_frame(OP_CLOSE, payload[:2]))
                except OSError:
                    pass
                return b""
            if opcode == OP_PING:
                try:
                    self._conn.sendall(encode_ws_frame(OP_PONG, payload))
                except OSError:
                    pass
                continue
            if opcode == OP_PONG:
                continue
            if opcode in (OP_BINARY, OP_TEXT, OP_CONT):
                self._fragments.append(payload)
                if fin:
                    message = b"".join(self._fragments)
                    self._fragments = []
                    if message:
                        return message
                continue
            return b""  # reserved opcode: drop the connection

    def send(self, data: bytes) -> None:
        self._conn.sendall(encode_ws_frame(OP_BINARY, data))

    def close(self) -> None:
        try:
            self._conn.sendall(encode_ws_frame(OP_CLOSE, b""))
        except OSError:
            pass
        try:
            self._conn.close()
        except OSError:
            pass

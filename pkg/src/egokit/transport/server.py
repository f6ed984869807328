"""Full-duplex session server composing VAD -> ASR -> orchestration -> TTS.

Each connection gets three threads: a reader (framing, VAD, reply routing),
a turn worker (strictly sequential turns), and a writer draining an ordered
outbound queue. Synthesized speech is queued as purgeable audio frames so a
barge-in can drop whatever has not reached the wire yet and emit ``halt``
ahead of everything queued later. Connections may be raw framed TCP or a
WebSocket carrying the same frames as binary messages.
"""
from __future__ import annotations

import json
import logging
import queue
import socket
import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..audio import AudioChunk, DISPATCH, HALT_PLAYBACK, VadConfig, VadState, process_chunk
from ..context import ContextConfig, DEFAULT_CONFIG
from ..events import Event, EventLog, ParseError, append_event, parse_log_line
from ..orchestrator import ConfirmationRequest, Turn, TurnProviders, handle_turn
from ..providers import LanguageModelProvider, SummarizerProvider
from ..registry import ToolRegistry
from .framing import AUDIO, CONTROL, EVENT, Frame, FrameDecoder, VIDEO, encode_frame
from .messages import BadControlMessage, control_message, decode_control, encode_control
from .websocket import HandshakeError, WebSocketChannel, read_handshake

logger = logging.getLogger(__name__)


class BindError(OSError):
    pass


@dataclass
class ServerConfig:
    budget: int = 2048
    context: ContextConfig = DEFAULT_CONFIG
    vad: VadConfig = field(default_factory=VadConfig)
    allowlist: tuple[str, ...] = ()
    clarifier_enabled: bool = False
    confirm_deadline_ms: int = 30_000
    trace_dir: str | None = None
    tts_chunk_bytes: int = 1024
    tts_chunk_delay_ms: int = 0  # pacing between speech chunks


@dataclass
class RuntimeDeps:
    registry: ToolRegistry
    lm: LanguageModelProvider
    summarizer: SummarizerProvider
    asr: Any  # AsrProvider
    tts: Any  # TtsProvider


class TcpChannel:
    def __init__(self, conn: socket.socket, leftover: bytes = b""):
        self._conn = conn
        self._leftover = leftover

    def recv(self) -> bytes:
        if self._leftover:
            out, self._leftover = self._leftover, b""
            return out
        try:
            return self._conn.recv(65536)
        except OSError:
            return b""

    def send(self, data: bytes) -> None:
        self._conn.sendall(data)

    def close(self) -> None:
        try:
            self._conn.close()
        except OSError:
            pass


_CLOSE = object()


class Session:
    def __init__(self, channel, deps: RuntimeDeps, cfg: ServerConfig, session_id: str):
        self.channel = channel
        self.deps = deps
        self.cfg = cfg
        self.id = session_id
        self.decoder = FrameDecoder()
        self.vad_state = VadState()
        self.log = EventLog()
        self._log_lock = threading.Lock()  # reader and turn threads both append
        self.closed = threading.Event()

        self._out: deque[tuple[bytes, bool]] = deque()
        self._out_cv = threading.Condition()
        self._pending_tts = 0
        self._waiters: dict[str, queue.Queue] = {}
        self._waiters_lock = threading.Lock()
        self._turns: queue.Queue = queue.Queue()
        self._counter = 0
        self._counter_lock = threading.Lock()

        self._trace_path: Path | None = None
        if cfg.trace_dir:
            trace_dir = Path(cfg.trace_dir)
            trace_dir.mkdir(parents=True, exist_ok=True)
            self._trace_path = trace_dir / f"{session_id}.jsonl"

        self._threads = [
            threading.Thread(target=self._read_loop, name=f"{session_id}-reader", daemon=True),
            threading.Thread(target=self._turn_loop, name=f"{session_id}-turns", daemon=True),
            threading.Thread(target=self._write_loop, name=f"{session_id}-writer", daemon=True),
        ]

    # ------------------------------------------------------------------
    # outbound queue

    def _enqueue(self, data: bytes, purgeable: bool = False) -> None:
        with self._out_cv:
            if purgeable:
                self._pending_tts += 1
            self._out.append((data, purgeable))
            self._out_cv.notify_all()

    def _send_control(self, message: dict[str, Any]) -> None:
        self._enqueue(encode_frame(encode_control(message)))

    def _purge_tts(self) -> None:
        with self._out_cv:
            kept = deque(item for item in self._out if not item[1])
            self._pending_tts -= sum(1 for item in self._out if item[1])
            self._out = kept

    @property
    def playing(self) -> bool:
        with self._out_cv:
            return self._pending_tts > 0

    def _write_loop(self) -> None:
        while True:
            with self._out_cv:
                while not self._out and not self.closed.is_set():
                    self._out_cv.wait(timeout=0.1)
                if not self._out:
                    if self.closed.is_set():
                        return
                    continue
                data, purgeable = self._out.popleft()
            try:
                self.channel.send(data)
            except OSError:
                self.closed.set()
                return
            if purgeable:
                if self.cfg.tts_chunk_delay_ms:
                    time.sleep(self.cfg.tts_chunk_delay_ms / 1000)
                with self._out_cv:
                    self._pending_tts -= 1

    # ------------------------------------------------------------------
    # inbound

    def start(self) -> None:
        tools = self.deps.registry.list_tools(self.cfg.allowlist)
        self._send_control(
            control_message(
                "tools_list", "srv", session=self.id, tools=[t.to_wire() for t in tools]
            )
        )
        for t in self._threads:
            t.start()

    def _fail(self, message: str) -> None:
        try:
            self._send_control(control_message("error", "srv", message=message))
        except Exception:
            pass
        self.close(drain=True)

    def _read_loop(self) -> None:
        while not self.closed.is_set():
            data = self.channel.recv()
            if not data:
                break
            try:
                frames = self.decoder.feed(data)
            except Exception as exc:
                self._fail(f"malformed frame: {exc}")
                return
            for frame in frames:
                try:
                    self._handle_frame(frame)
                except (BadControlMessage, ParseError, ValueError) as exc:
                    self._fail(f"malformed frame: {exc}")
                    return
        self.close()

    def _handle_frame(self, frame: Frame) -> None:
        if frame.frame_type == CONTROL:
            self._handle_control(decode_control(frame))
        elif frame.frame_type == AUDIO:
            self._handle_audio(frame.payload)
        elif frame.frame_type == EVENT:
            for lineno, line in enumerate(frame.payload.decode("utf-8").splitlines(), 1):
                if line:
                    event = parse_log_line(line, lineno)
                    with self._log_lock:
                        self.log = append_event(self.log, event)
        elif frame.frame_type == VIDEO:
            pass  # accepted and ignored; narration arrives via event frames

    def _handle_control(self, message: dict[str, Any]) -> None:
        kind = message["kind"]
        if kind in ("query", "transcript"):
            text = str(message.get("text", ""))
            if not text.strip():
                raise BadControlMessage(f"{kind} without text")
            self._turns.put((str(message["id"]), text, message.get("t")))
        elif kind in ("confirm_reply", "clarify_reply"):
            with self._waiters_lock:
                waiter = self._waiters.get(str(message["id"]))
            if waiter is not None:
                waiter.put(str(message.get("reply", "")))
        elif kind == "halt":
            self._purge_tts()
        # other kinds are server-emitted; ignore echoes

    def _handle_audio(self, payload: bytes) -> None:
        if not payload or len(payload) % 2:
            raise ValueError(f"audio payload of {len(payload)} bytes")
        chunk = AudioChunk(
            np.frombuffer(payload, dtype="<i2"), self.cfg.vad.sample_rate
        )
        self.vad_state, events = process_chunk(
            self.vad_state, chunk, self.cfg.vad, self.playing
        )
        for event in events:
            if event.kind == HALT_PLAYBACK:
                self._purge_tts()
                self._send_control(control_message("halt", "srv", reason="barge_in"))
            elif event.kind == DISPATCH:
                try:
                    text = self.deps.asr(
                        event.segment.astype("<i2").tobytes(), self.cfg.vad.sample_rate
                    )
                except Exception as exc:  # provider failures are per-turn
                    logger.warning("asr failed on a dispatched segment: %s", exc)
                    continue
                if text.strip():
                    turn_id = self._next_id("a")
                    self._send_control(
                        control_message("transcript", turn_id, text=text, final=True)
                    )
                    self._turns.put((turn_id, text, None))

    # ------------------------------------------------------------------
    # turns

    def _next_id(self, prefix: str) -> str:
        with self._counter_lock:
            self._counter += 1
            return f"{prefix}{self._counter}"

    def _await_reply(self, kind: str, turn_id: str, **fields: Any) -> str | None:
        reply_id = self._next_id("c")
        waiter: queue.Queue = queue.Queue()
        with self._waiters_lock:
            self._waiters[reply_id] = waiter
        self._send_control(control_message(kind, reply_id, turn=turn_id, **fields))
        try:
            return waiter.get(timeout=self.cfg.confirm_deadline_ms / 1000)
        except queue.Empty:
            return None
        finally:
            with self._waiters_lock:
                self._waiters.pop(reply_id, None)

    def _turn_loop(self) -> None:
        while True:
            item = self._turns.get()
            if item is _CLOSE:
                return
            turn_id, text, t = item
            try:
                self._run_turn(turn_id, text, t)
            except Exception as exc:
                logger.exception("turn %s failed", turn_id)
                self._send_control(
                    control_message("error", turn_id, message=f"turn failed: {exc}")
                )

    def _run_turn(self, turn_id: str, text: str, t: int | None) -> None:
        with self._log_lock:
            now = int(t) if t is not None else (self.log.span.end if len(self.log) else 0)
            self.log = append_event(self.log, Event(now, "spoken", text, source_id=turn_id))
            log = self.log

        def confirmer(request: ConfirmationRequest) -> str | None:
            return self._await_reply(
                "confirm_request",
                turn_id,
                prompt=request.prompt,
                tool=request.call.name,
                arguments=request.call.arguments,
            )

        def asker(question: str) -> str | None:
            return self._await_reply("clarify_question", turn_id, question=question)

        providers = TurnProviders(
            lm=self.deps.lm,
            summarizer=self.deps.summarizer,
            confirmer=confirmer,
            asker=asker,
            clarifier_enabled=self.cfg.clarifier_enabled,
        )
        turn = handle_turn(
            text,
            log,
            providers,
            self.deps.registry,
            list(self.cfg.allowlist),
            self.cfg.budget,
            now,
            self.cfg.context,
        )
        self._emit_turn(turn_id, turn)

    def _emit_turn(self, turn_id: str, turn: Turn) -> None:
        for call, result in turn.trace.results:
            self._send_control(
                control_message(
                    "tool_call", turn_id, name=call.name, arguments=call.arguments
                )
            )
            self._send_control(
                control_message("tool_result", turn_id, name=call.name, **result.to_wire())
            )
        for call in turn.trace.skipped:
            self._send_control(
                control_message("tool_result", turn_id, name=call.name, status="skipped")
            )
        self._send_control(
            control_message(
                "response", turn_id, text=turn.response, partial=turn.trace.partial
            )
        )
        speech = self.deps.tts(turn.response)
        for start in range(0, len(speech), self.cfg.tts_chunk_bytes):
            piece = speech[start : start + self.cfg.tts_chunk_bytes]
            self._enqueue(encode_frame(Frame(AUDIO, piece)), purgeable=True)
        if self._trace_path:
            record = {"session": self.id, "turn": turn_id, **turn.to_wire()}
            with open(self._trace_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    # ------------------------------------------------------------------

    def close(self, drain: bool = False) -> None:
        if self.closed.is_set():
            return
        if drain:
            # give the writer a moment to flush queued frames (error replies)
            for _ in range(50):
                with self._out_cv:
                    if not self._out:
                        break
                time.sleep(0.01)
        self.closed.set()
        self._turns.put(_CLOSE)
        with self._waiters_lock:
            # unblock any turn stuck on a confirmation/clarification wait;
            # an empty reply counts as a denial
            for waiter in self._waiters.values():
                waiter.put("")
        with self._out_cv:
            self._out_cv.notify_all()
        self.channel.close()

    def join(self, timeout: float = 2.0) -> None:
        for t in self._threads:
            if t is not threading.current_thread():
                t.join(timeout)


class Server:
    """Accepts framed-TCP and WebSocket sessions on one port."""

    def __init__(self, host: str, port: int, deps: RuntimeDeps, cfg: ServerConfig):
        self.deps = deps
        self.cfg = cfg
        try:
            self._listener = socket.create_server((host, port))
        except OSError as exc:
            raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
        self._sessions: set[Session] = set()
        self._lock = threading.Lock()
        self._session_count = 0
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="egokit-accept", daemon=True
        )
        self._closing = False
        self._accept_thread.start()

    @property
    def address(self) -> tuple[str, int]:
        return self._listener.getsockname()[:2]

    def _accept_loop(self) -> None:
        while True:
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            threading.Thread(
                target=self._open_session, args=(conn,), daemon=True
            ).start()

    def _open_session(self, conn: socket.socket) -> None:
        try:
            first = conn.recv(4096)
        except OSError:
            conn.close()
            return
        if not first:
            conn.close()
            return
        try:
            if first[:4] == b"GET " or (len(first) < 4 and b"GET "[: len(first)] == first):
                leftover = read_handshake(conn, first)
                channel = WebSocketChannel(conn, leftover)
            else:
                channel = TcpChannel(conn, leftover=first)
        except HandshakeError as exc:
            logger.info("rejected connection: %s", exc)
            conn.close()
            return
        with self._lock:
            if self._closing:
                conn.close()
                return
            self._session_count += 1
            session_id = f"s{self._session_count:03d}_{uuid.uuid4().hex[:8]}"
            session = Session(channel, self.deps, self.cfg, session_id)
            self._sessions.add(session)
        session.start()
        session.closed.wait()
        session.join()
        with self._lock:
            self._sessions.discard(session)

    def shutdown(self) -> None:
        with self._lock:
            self._closing = True
            sessions = list(self._sessions)
        self._listener.close()
        for session in sessions:
            session.close()
        for session in sessions:
            session.join()


def serve(host: str, port: int, deps: RuntimeDeps, cfg: ServerConfig) -> Server:
    return Server(host, port, deps, cfg)

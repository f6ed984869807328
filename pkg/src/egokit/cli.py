"""Command-line entry points: qa, replay-audio, board-mc, serve."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .audio import VadConfig
from .builtin_tools import register_builtin_tools
from .context import ContextConfig
from .harness import (
    board_montecarlo,
    parse_playing_ranges,
    replay_audio,
    run_qa,
)
from .providers import KeywordSummarizer, ScriptedAsr, StubTable, load_stub_table, make_stub_lm, passthrough_tts
from .registry import ToolRegistry
from .transport import RuntimeDeps, ServerConfig, serve


def _load_table(path: str | None) -> StubTable:
    if path is None:
        return StubTable(default="I cannot help with that offline.")
    if not Path(path).exists():
        raise SystemExit(f"stub table not found: {path}")
    return load_stub_table(path)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file", default=None)
    parser.add_argument("--report-out", help="write the machine-readable report here")
    parser.add_argument("--log-level", default="WARNING")


def _finish(report, args) -> int:
    print(report.to_text())
    if args.report_out:
        report.write(args.report_out)
    return 0 if report.passed else 1


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="egokit")
    sub = parser.add_subparsers(dest="command", required=True)

    qa = sub.add_parser("qa", help="run the QA pipeline over a fixture")
    qa.add_argument("--fixture", required=True)
    qa.add_argument("--events", help="event log file backing the fixture")
    qa.add_argument("--stub-table", required=True, help="language-model stub table")
    qa.add_argument("--budget", type=int, default=2048)
    qa.add_argument("--chunk-duration", type=int, default=ContextConfig().chunk_duration)
    qa.add_argument("--no-context", action="store_true", help="disable context assembly")
    qa.add_argument("--floor", type=float, default=None, help="minimum accuracy to pass")
    qa.add_argument("--k", type=int, default=5)
    _add_common(qa)

    replay = sub.add_parser("replay-audio", help="check VAD events against expectations")
    replay.add_argument("--wav", required=True)
    replay.add_argument("--expected", required=True)
    replay.add_argument("--playing", default="", help="chunk ranges with active playback, e.g. 10:50,70:90")
    _add_common(replay)

    mc = sub.add_parser("board-mc", help="vote-stabilization Monte Carlo")
    mc.add_argument("--fen", default="rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1")
    mc.add_argument("--p", type=float, required=True, help="per-square flip probability")
    mc.add_argument("--n", type=int, default=5)
    mc.add_argument("--tau", type=float, default=0.6)
    mc.add_argument("--trials", type=int, default=10_000)
    mc.add_argument("--seed", type=int, required=True)
    _add_common(mc)

    srv = sub.add_parser("serve", help="start the session server")
    srv.add_argument("--listen", default="127.0.0.1:8765", help="host:port (port 0 for ephemeral)")
    srv.add_argument("--stub-table", help="language-model stub table")
    srv.add_argument("--trace-dir", default=None)
    srv.add_argument("--budget", type=int, default=2048)
    srv.add_argument("--clarifier", action="store_true")
    _add_common(srv)

    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    file_cfg = _load_config(args.config)

    if args.command == "qa":
        report = run_qa(
            args.fixture,
            args.events,
            _load_table(args.stub_table),
            budget=args.budget,
            chunk_duration=args.chunk_duration,
            context_enabled=not args.no_context,
            accuracy_floor=args.floor,
            k=args.k,
        )
        return _finish(report, args)

    if args.command == "replay-audio":
        vad = VadConfig(**file_cfg.get("vad", {}))
        report = replay_audio(
            args.wav,
            args.expected,
            cfg=vad,
            playing_ranges=parse_playing_ranges(args.playing),
        )
        return _finish(report, args)

    if args.command == "board-mc":
        report = board_montecarlo(
            args.fen, args.p, n=args.n, tau=args.tau, trials=args.trials, seed=args.seed
        )
        return _finish(report, args)

    if args.command == "serve":
        host, _, port_text = args.listen.rpartition(":")
        if not host or not port_text.isdigit():
            raise SystemExit(f"bad --listen address {args.listen!r}")
        table = _load_table(args.stub_table)
        lm = make_stub_lm(table)
        registry = ToolRegistry()
        register_builtin_tools(registry, lm=lm)
        allowlist = tuple(file_cfg.get("allowlist", registry.registered_names()))
        deps = RuntimeDeps(
            registry=registry,
            lm=lm,
            summarizer=KeywordSummarizer(),
            asr=ScriptedAsr(fallback=""),
            tts=passthrough_tts,
        )
        cfg = ServerConfig(
            budget=args.budget,
            vad=VadConfig(**file_cfg.get("vad", {})),
            allowlist=allowlist,
            clarifier_enabled=args.clarifier,
            trace_dir=args.trace_dir,
        )
        server = serve(host, int(port_text), deps, cfg)
        bound_host, bound_port = server.address
        print(f"listening on {bound_host}:{bound_port}", flush=True)
        try:
            while True:
                time.sleep(0.5)
        except KeyboardInterrupt:
            print("shutting down", flush=True)
            server.shutdown()
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry points.

    scenespeak serve --mode mover --task sandbox --mock-script script.json
    scenespeak replay trace.jsonl
    scenespeak render-prompt --task task2 --scene sandbox
    scenespeak check trace.jsonl --golden final_scene.json
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .gateway import ProviderConfig, load_prompt_template, render_system_prompt
from .server import SessionServer
from .session import (
    DivergenceError,
    SessionConfig,
    TraceFormatError,
    TraceRecorder,
    replay_trace,
    resolve_scene,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenespeak",
        description="Speech- and gesture-driven scene manipulation service")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the WebSocket session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--mode", default="mover",
                       choices=("control", "voice", "mover"))
    serve.add_argument("--task", default="sandbox",
                       choices=("task1a", "task1b", "sandbox"))
    serve.add_argument("--scene", default=None,
                       help="bundled scene name or scene file (default: the task's)")
    serve.add_argument("--mock-script", default=None,
                       help="JSON script file; use a canned provider")
    serve.add_argument("--provider-url", default=None,
                       help="chat-completions base URL for a live provider")
    serve.add_argument("--model", default="gpt-4")
    serve.add_argument("--api-key-env", default="OPENAI_API_KEY",
                       help="environment variable holding the API key")
    serve.add_argument("--temperature", type=float, default=0.0)
    serve.add_argument("--seed", type=int, default=None)
    serve.add_argument("--record", default=None, metavar="TRACE",
                       help="record the session to a JSONL trace")
    serve.add_argument("--measure-latency", action="store_true",
                       help="report wall-clock first-action latency per request")
    serve.add_argument("--debug-explain", action="store_true")

    replay = sub.add_parser("replay", help="re-run a recorded trace")
    replay.add_argument("trace")
    replay.add_argument("--out-scene", default=None,
                        help="write the final scene JSON here")
    replay.add_argument("--no-verify", action="store_true",
                        help="skip the byte-identity divergence check")

    render = sub.add_parser("render-prompt", help="print a rendered system prompt")
    render.add_argument("--task", default="task2", choices=("task1", "task2"))
    render.add_argument("--scene", default="sandbox")

    check = sub.add_parser("check", help="replay a trace and compare the final scene")
    check.add_argument("trace")
    check.add_argument("--golden", required=True,
                       help="scene JSON the replay must reproduce")
    return parser


DEFAULT_SCENES = {"task1a": "task1a", "task1b": "task1b", "sandbox": "sandbox"}


def cmd_serve(args: argparse.Namespace) -> int:
    provider = None
    if args.provider_url:
        provider = ProviderConfig(
            base_url=args.provider_url,
            model=args.model,
            api_key_env=args.api_key_env,
            temperature=args.temperature,
            seed=args.seed,
        )
    config = SessionConfig(
        mode=args.mode,
        task=args.task,
        scene=args.scene or DEFAULT_SCENES[args.task],
        debug_explain=args.debug_explain,
        provider=provider,
        mock_script=args.mock_script,
        measure_latency=args.measure_latency,
    )
    recorder = TraceRecorder.to_path(args.record) if args.record else None
    server = SessionServer(config, host=args.host, port=args.port, recorder=recorder)
    if args.measure_latency:
        def report_latency(event: dict) -> None:
            if event.get("type") == "event.stream_end":
                latencies = server.session.metrics.latency_ms
                if latencies:
                    print(f"first-action latency: {latencies[-1]:.0f} ms",
                          file=sys.stderr)
        server.session.subscribe(report_latency)
    print(f"serving ws://{args.host}:{args.port} "
          f"(mode={config.mode}, task={config.task})", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        result = replay_trace(args.trace, verify=not args.no_verify)
    except (TraceFormatError, DivergenceError) as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 1
    if args.out_scene:
        Path(args.out_scene).write_text(result.scene.to_json(), encoding="utf-8")
    print(json.dumps(result.metrics, indent=2))
    return 0


def cmd_render_prompt(args: argparse.Namespace) -> int:
    scene = resolve_scene(args.scene)
    template = load_prompt_template(args.task)
    sys.stdout.write(render_system_prompt(template, scene))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    try:
        result = replay_trace(args.trace)
    except (TraceFormatError, DivergenceError) as exc:
        print(f"FAIL: {exc}")
        return 1
    actual = result.scene.to_json()
    golden = Path(args.golden).read_text(encoding="utf-8")
    if actual == golden:
        print(f"PASS: final scene matches {args.golden}")
        return 0
    print(f"FAIL: final scene differs from {args.golden}")
    return 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "serve": cmd_serve,
        "replay": cmd_replay,
        "render-prompt": cmd_render_prompt,
        "check": cmd_check,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

    databoard replay --task benchmark/tasks/e1-cameras-sort.json \
        --provider scripted --out runs/e1
    databoard summarize --runs runs --labels benchmark/labels-example.json
    databoard timeline --events events.json --threshold-ms 90000
    databoard make-benchmark --out benchmark
    databoard serve --stdio
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _cmd_replay(args) -> int:
    from .config import EngineConfig
    from .errors import EngineError
    from .gateway import ScriptedProvider, make_provider
    from .harness.replay import replay_task
    from .harness.tasks import load_task

    task = load_task(args.task)
    config = EngineConfig.load(args.config) if args.config else EngineConfig()
    provider = None
    if args.provider == "scripted":
        if args.fixtures:
            provider = ScriptedProvider.from_file(args.fixtures)
    else:
        block = dict(config.provider)
        block["kind"] = "live"
        if args.endpoint:
            block["endpoint"] = args.endpoint
        if args.model:
            block["model"] = args.model
        provider = make_provider(block)
    try:
        report = replay_task(task, provider, args.out, config,
                             step_budget=args.step_budget)
    except EngineError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report.to_json(), indent=2))
    return 0


def _cmd_summarize(args) -> int:
    from .harness.summarize import load_labels, render_summary, summarize_runs

    runs_dir = Path(args.runs)
    reports = []
    for report_file in sorted(runs_dir.glob("**/report.json")):
        reports.append(json.loads(report_file.read_text()))
    if not reports:
        print(f"no report.json files under {runs_dir}", file=sys.stderr)
        return 1
    labels = load_labels(args.labels) if args.labels else None
    summary = summarize_runs(reports, labels)
    print(render_summary(summary))
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2) + "\n")
    return 0


def _cmd_timeline(args) -> int:
    from .harness.timeline import merge_timeline

    events = json.loads(Path(args.events).read_text())
    if isinstance(events, dict):
        events = events["events"]
    blocks = merge_timeline(events, args.threshold_ms)
    print(json.dumps([b.to_json() for b in blocks], indent=2))
    return 0


def _cmd_make_benchmark(args) -> int:
    from .harness.bundled import build_benchmark

    manifest = build_benchmark(args.out)
    print(f"wrote {manifest}")
    return 0


def _cmd_serve(args) -> int:
    from .config import EngineConfig
    from .gateway import ScriptedProvider
    from .protocol import serve
    from .session import Session

    config = EngineConfig.load(args.config) if args.config else EngineConfig()
    provider = ScriptedProvider.from_file(args.fixtures) if args.fixtures else None
    session = Session(args.title, config, provider=provider)
    if args.stdio:
        stats = serve(session, _StdioTransport())
        print(f"served {stats.handled} frames ({stats.errors} errors)",
              file=sys.stderr)
        return 0
    import socket
    server = socket.create_server(("127.0.0.1", args.port))
    print(f"listening on 127.0.0.1:{args.port}", file=sys.stderr)
    try:
        while True:
            connection, _ = server.accept()
            with connection:
                stream = connection.makefile("rwb")
                serve(session, stream)
    except KeyboardInterrupt:
        return 0


class _StdioTransport:
    def readline(self) -> bytes:
        return sys.stdin.buffer.readline()

    def read(self, count: int) -> bytes:
        return sys.stdin.buffer.read(count)

    def write(self, data: bytes) -> None:
        sys.stdout.buffer.write(data)

    def flush(self) -> None:
        sys.stdout.buffer.flush()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="databoard",
        description="Web-data workbench engine: replay, summarize, serve.")
    sub = parser.add_subparsers(dest="command", required=True)

    replay = sub.add_parser("replay", help="replay a benchmark task headlessly")
    replay.add_argument("--task", required=True, help="task JSON file")
    replay.add_argument("--provider", choices=["scripted", "live"],
                        default="scripted")
    replay.add_argument("--out", help="directory for the run report")
    replay.add_argument("--fixtures", help="scripted-provider fixture file")
    replay.add_argument("--endpoint", help="live provider endpoint")
    replay.add_argument("--model", help="live provider model name")
    replay.add_argument("--config", help="engine config JSON")
    replay.add_argument("--step-budget", type=int, default=600)
    replay.set_defaults(func=_cmd_replay)

    summarize = sub.add_parser("summarize", help="aggregate run reports")
    summarize.add_argument("--runs", required=True, help="directory of runs")
    summarize.add_argument("--labels", help="human accuracy label file")
    summarize.add_argument("--out", help="write the summary JSON here")
    summarize.set_defaults(func=_cmd_summarize)

    timeline = sub.add_parser("timeline", help="merge an event timeline")
    timeline.add_argument("--events", required=True,
                          help="JSON file of {timestamp, category} events")
    timeline.add_argument("--threshold-ms", type=float, default=90000.0)
    timeline.set_defaults(func=_cmd_timeline)

    bench = sub.add_parser("make-benchmark", help="write the bundled benchmark")
    bench.add_argument("--out", default="benchmark")
    bench.set_defaults(func=_cmd_make_benchmark)

    serve_cmd = sub.add_parser("serve", help="serve the wire protocol")
    serve_cmd.add_argument("--stdio", action="store_true",
                           help="speak frames over stdin/stdout")
    serve_cmd.add_argument("--port", type=int, default=7341)
    serve_cmd.add_argument("--title", default="")
    serve_cmd.add_argument("--fixtures", help="scripted-provider fixture file")
    serve_cmd.add_argument("--config", help="engine config JSON")
    serve_cmd.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: serve, replay, analyze, validate.

Failures exit nonzero with one machine-parseable line on stderr:
`error:<code>: <human text>`. AEROTWIN_PORT overrides the serve port and
AEROTWIN_LOG_LEVEL the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import signal
import sys
import threading
from pathlib import Path

from aerotwin.config import ConfigError, load_config
from aerotwin.operator import ScriptError, load_script
from aerotwin.report import build_report
from aerotwin.server import PortInUse, TelemetryServer
from aerotwin.simulation import run_script
from aerotwin.telemetry import (
    EmptyWindow,
    RecordError,
    SessionRecord,
    export_csv,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # single-line machine-parseable failures
        print(f"error:usage: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> _Parser:
    parser = _Parser(prog="aerotwin",
                     description="digital twin of a quadrotor with a 4-DoF arm")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the live teleoperation server")
    serve.add_argument("--config", help="YAML config (defaults built in)")
    serve.add_argument("--port", type=int, help="override the telemetry port")
    serve.add_argument("--record", help="write a session record on shutdown")
    serve.add_argument("--duration", type=float,
                       help="stop after this many simulated seconds")
    serve.add_argument("--no-pace", action="store_true",
                       help="run unpaced (simulation time only; for tests)")
    serve.add_argument("--wait-clients", type=int, default=0,
                       help="hold the loop until this many sessions joined")
    serve.set_defaults(func=cmd_serve)

    replay = sub.add_parser("replay", help="run a waypoint script headlessly")
    replay.add_argument("--config", help="YAML config (defaults built in)")
    replay.add_argument("--script", required=True, help="waypoint script file")
    replay.add_argument("--out", required=True,
                        help="output directory (record, CSV, report)")
    replay.set_defaults(func=cmd_replay)

    analyze = sub.add_parser("analyze", help="report on a session record")
    analyze.add_argument("--record", required=True, help="record file")
    analyze.add_argument("--from", dest="t_from", type=float,
                         help="window start (s)")
    analyze.add_argument("--to", dest="t_to", type=float, help="window end (s)")
    analyze.add_argument("--reference", choices=["gui", "vr"],
                         help="show reference trial deviations next to ours")
    analyze.set_defaults(func=cmd_analyze)

    validate = sub.add_parser("validate", help="check a config (and script)")
    validate.add_argument("--config", help="YAML config to validate")
    validate.add_argument("--script", help="also validate this script")
    validate.set_defaults(func=cmd_validate)
    return parser


def cmd_serve(args) -> int:
    config = load_config(args.config)
    port = args.port
    if port is None and os.environ.get("AEROTWIN_PORT"):
        port = int(os.environ["AEROTWIN_PORT"])
    server = TelemetryServer(
        config,
        port=port,
        pace=not args.no_pace,
        duration=args.duration,
        record_path=args.record,
        wait_sessions=args.wait_clients,
    )

    def _stop(signum, frame):
        server.stop()

    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGINT, _stop)
        signal.signal(signal.SIGTERM, _stop)
    server.start()
    print(f"serving on 127.0.0.1:{server.port}", flush=True)
    server.serve_forever()
    return 0


def cmd_replay(args) -> int:
    config = load_config(args.config)
    script = load_script(args.script, config.geometry, config.limits)
    record, player = run_script(config, script)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    record.save(str(out / "record.jsonl"))
    export_csv(record, str(out / "frames.csv"))
    report = build_report(record, player=player)
    (out / "report.txt").write_text(report, encoding="utf-8")
    print(report, end="")
    print(f"wrote {out / 'record.jsonl'}, {out / 'frames.csv'}, "
          f"{out / 'report.txt'}")
    return 0


def cmd_analyze(args) -> int:
    record = SessionRecord.load(args.record)
    window = None
    if args.t_from is not None or args.t_to is not None:
        window = (
            args.t_from if args.t_from is not None else 0.0,
            args.t_to if args.t_to is not None else record.duration,
        )
        if not record.frames or window[0] > record.duration or window[1] < record.frames[0].t:
            raise EmptyWindow(
                f"window [{window[0]}, {window[1]}] lies outside the record "
                f"(duration {record.duration:.2f} s)"
            )
    print(build_report(record, reference=args.reference, window=window),
          end="")
    return 0


def cmd_validate(args) -> int:
    config = load_config(args.config)
    print(f"config ok: arm reach {config.geometry.total_length:.3f} m, "
          f"{config.rate_hz:.0f} Hz, port {config.port}")
    if args.script:
        script = load_script(args.script, config.geometry, config.limits)
        print(f"script ok: {len(script)} waypoints, "
              f"{sum(wp.dwell for wp in script):.1f} s of dwell")
    return 0


_ERROR_CODES = [
    (ConfigError, "invalid-config"),
    (ScriptError, "invalid-script"),
    (PortInUse, "port-in-use"),
    (RecordError, "record-corrupt"),
    (EmptyWindow, "empty-window"),
    (OSError, "io-error"),
]


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("AEROTWIN_LOG_LEVEL", "WARNING").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single-line CLI error contract
        for exc_type, code in _ERROR_CODES:
            if isinstance(exc, exc_type):
                print(f"error:{code}: {exc}", file=sys.stderr)
                return 2
        print(f"error:internal: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

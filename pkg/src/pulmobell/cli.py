"""Command-line entry points.

    pulmobell serve    --data-dir D --http-port 8080 --device-port 9000
    pulmobell simulate scenario.json --host 127.0.0.1 [--clock accelerated]
    pulmobell run      scenario.json --out outdir
    pulmobell report   SESSION_ID --data-dir D [--csv out.csv]

Exit codes: 0 success, 1 domain/input error, 2 environment error.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import socket
import sys
from pathlib import Path

from .errors import (
    NotFoundError,
    PulmobellError,
    ScenarioError,
    TransportError,
    ValidationError,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_ENV = 2

DEFAULT_HTTP_PORT = 8080
DEFAULT_DEVICE_PORT = 9000


def _default_data_dir() -> str:
    return os.environ.get("PULMOBELL_DATA_DIR", "./pulmobell-data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulmobell")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the host service")
    serve.add_argument("--data-dir", default=_default_data_dir())
    serve.add_argument("--http-port", type=int, default=DEFAULT_HTTP_PORT)
    serve.add_argument("--device-port", type=int, default=DEFAULT_DEVICE_PORT)
    serve.add_argument("--bind", default="127.0.0.1")
    serve.add_argument("--fsync", action="store_true", help="fsync the log on every append")
    serve.add_argument("--static-dir", default=None,
                       help="serve the dashboard from this directory")

    simulate = sub.add_parser("simulate", help="drive a scenario against a running host")
    simulate.add_argument("scenario", help="scenario JSON file")
    simulate.add_argument("--host", default="127.0.0.1")
    simulate.add_argument("--http-port", type=int, default=DEFAULT_HTTP_PORT)
    simulate.add_argument("--device-port", type=int, default=DEFAULT_DEVICE_PORT)
    simulate.add_argument("--clock", choices=("accelerated", "real"), default="accelerated")

    run = sub.add_parser("run", help="hermetic in-process host + simulator")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--out", required=True, help="output directory")

    report = sub.add_parser("report", help="print a stored session summary")
    report.add_argument("session_id")
    report.add_argument("--data-dir", default=_default_data_dir())
    report.add_argument("--csv", default=None, help="also write the CSV export here")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "serve": cmd_serve,
        "simulate": cmd_simulate,
        "run": cmd_run,
        "report": cmd_report,
    }[args.command]
    try:
        return handler(args)
    except KeyboardInterrupt:
        # logs are flushed line-by-line; an interrupt loses nothing
        return EXIT_OK
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValidationError, NotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except PulmobellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def _port_free(bind: str, port: int) -> bool:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((bind, port))
        return True
    except OSError:
        return False
    finally:
        probe.close()


def cmd_serve(args) -> int:
    import uvicorn

    from .host.device_server import DeviceTCPServer
    from .host.http_api import create_app
    from .host.store import SessionStore

    if args.http_port == args.device_port:
        print("http and device ports must be distinct", file=sys.stderr)
        return EXIT_ENV
    for port in (args.http_port, args.device_port):
        if not _port_free(args.bind, port):
            print(f"port {port} is already in use", file=sys.stderr)
            return EXIT_ENV

    store = SessionStore(args.data_dir, fsync=args.fsync)
    static_dir = args.static_dir
    if static_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = candidate if candidate.is_dir() else None
    app = create_app(store, static_dir=static_dir)

    device_server = DeviceTCPServer(args.bind, args.device_port, store)
    device_server.start()
    print(
        f"pulmobell host: http on {args.bind}:{args.http_port}, "
        f"device port {args.bind}:{args.device_port}, data in {args.data_dir}"
    )
    try:
        uvicorn.run(app, host=args.bind, port=args.http_port, log_level="warning")
    except OSError as exc:
        print(f"http server failed: {exc}", file=sys.stderr)
        return EXIT_ENV
    finally:
        device_server.stop()
        store.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    import urllib.request

    from .sim.device import DeviceSimulator
    from .sim.profiles import load_scenario
    from .transport import TcpTransport

    scenario = load_scenario(args.scenario)
    url = f"http://{args.host}:{args.http_port}/api/sessions"
    body = json.dumps(
        {
            "sets": scenario.regimen.sets,
            "rest_s": scenario.regimen.rest_s,
            "start_level": scenario.regimen.start_level,
            "max_level": scenario.regimen.max_level,
            "device_label": scenario.device_label,
        }
    ).encode()
    try:
        request = urllib.request.Request(
            url, data=body, headers={"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(request, timeout=5.0) as resp:
            created = json.loads(resp.read())
    except OSError as exc:
        raise TransportError(f"cannot reach host at {url}: {exc}") from exc
    token = bytes.fromhex(created["device_token"])

    transport = TcpTransport.connect(args.host, args.device_port)
    sim = DeviceSimulator(scenario, transport, clock=args.clock, token=token)
    report = sim.run()
    print(f"session: {created['id']}")
    print(f"outcome: {report.outcome}")
    print(f"reps {report.counted_reps}/{report.truth_reps_total}")
    for entry in report.sets:
        print(f"  set {entry['set']}: counted {entry['counted_reps']} truth {entry['truth_reps']}")
    if report.transport_error:
        print(f"transport error: {report.transport_error}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_run(args) -> int:
    from .runner import run_scenario
    from .sim.profiles import load_scenario

    scenario = load_scenario(args.scenario)
    outcome = run_scenario(scenario, out_dir=args.out)
    sys.stdout.write(Path(outcome.report_path).read_text())
    if outcome.report.transport_error:
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_report(args) -> int:
    from .host.store import SessionStore, summary_to_dict

    store = SessionStore(args.data_dir)
    summary = store.summary(args.session_id)
    for key, value in summary_to_dict(summary).items():
        print(f"{key}: {value}")
    if args.csv:
        Path(args.csv).write_bytes(store.export_csv(args.session_id))
        print(f"csv: {args.csv}")
    store.close()
    return EXIT_OK


def _entry() -> None:
    # SIGINT should unwind cleanly through the finally blocks above
    signal.signal(signal.SIGINT, signal.default_int_handler)
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        sys.exit(EXIT_OK)


if __name__ == "__main__":
    _entry()

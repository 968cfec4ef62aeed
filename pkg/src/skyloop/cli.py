"""Command-line mission driver: run, replay, and serve.

Typical invocations:

  skyloop --scenario scenarios/reference.json --headless \\
      --human-script scenarios/scripts/reference_confirm.json --log run.ndjson
  skyloop --replay run.ndjson --metrics metrics.json
  skyloop --scenario scenarios/reference.json --clock realtime \\
      --listen 127.0.0.1:8400

Run metrics always land on stdout as JSON; informational chatter goes to
stderr so the output stays pipeable.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import threading
import time
from pathlib import Path

from .bus import Outbox
from .common import dumps_compact
from .console_api import ConsoleGateway, build_app
from .gcs import GcsError, GcsService, LogGapError, read_log
from .harness import (
    AGENT_STEP_MS,
    HarnessError,
    ScriptedHuman,
    load_script,
    metrics_from_log,
    parse_script,
    run_scenario,
)
from .mission import MissionValidationError, parse_mission, traceability_report


class CliError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skyloop",
        description=(
            "Deterministic multi-UAV mission simulation with a human "
            "teammate in the loop"
        ),
    )
    parser.add_argument("--scenario", metavar="FILE",
                        help="mission document (JSON)")
    parser.add_argument("--seed", type=int, metavar="U64",
                        help="override the document's seed")
    parser.add_argument("--clock", choices=("lockstep", "realtime"),
                        default="lockstep", help="clock mode (default lockstep)")
    parser.add_argument("--headless", action="store_true",
                        help="run without the console gateway")
    parser.add_argument("--human-script", metavar="FILE",
                        help="scripted teammate behavior (JSON)")
    parser.add_argument("--log", metavar="PATH",
                        help="write the event log here (replay mode: rewrite)")
    parser.add_argument("--replay", metavar="PATH",
                        help="rebuild state and metrics from a saved log")
    parser.add_argument("--listen", metavar="ADDR",
                        help="serve the console gateway on host:port "
                             "(requires --clock realtime)")
    parser.add_argument("--metrics", metavar="PATH",
                        help="also write the run metrics JSON here")
    parser.add_argument("--traceability", action="store_true",
                        help="print the teaming-factor table and exit")
    return parser


def note(text: str) -> None:
    print(text, file=sys.stderr)


def emit_metrics(metrics, path: str | None) -> None:
    text = json.dumps(metrics.to_record(), indent=2, sort_keys=True)
    print(text)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")


def load_doc(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise CliError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise CliError(f"{path} is not valid JSON: {err}") from err


def script_of(args: argparse.Namespace):
    if args.human_script:
        return load_script(args.human_script)
    # a permanently available teammate who confirms after a fixed pause
    return parse_script({})


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    try:
        return (host or "127.0.0.1", int(port))
    except ValueError as err:
        raise CliError(f"cannot parse listen address {addr!r}") from err


def do_replay(args: argparse.Namespace) -> int:
    records = read_log(args.replay)
    metrics = metrics_from_log(records)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(dumps_compact(record.to_record()))
                fh.write("\n")
        note(f"rewrote {len(records)} records to {args.log}")
    emit_metrics(metrics, args.metrics)
    return 0


def do_lockstep(args: argparse.Namespace) -> int:
    doc = load_doc(args.scenario)
    script = script_of(args)
    run = run_scenario(doc, script, seed=args.seed)
    if args.log:
        run.gcs.write_log(args.log)
        note(f"event log: {args.log} ({len(run.log)} records)")
    if not run.metrics.complete:
        note("configured duration exceeds the simulation time cap; "
             "metrics are flagged incomplete")
    emit_metrics(run.metrics, args.metrics)
    return 0


def start_gateway(gateway: ConsoleGateway, addr: str):
    import uvicorn

    host, port = parse_addr(addr)
    config = uvicorn.Config(
        build_app(gateway), host=host, port=port, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name="console-api", daemon=True)
    thread.start()
    note(f"console gateway listening on http://{host}:{port} (socket at /ws)")
    return server


def do_realtime(args: argparse.Namespace) -> int:
    doc = load_doc(args.scenario)
    spec = parse_mission(doc, clock="realtime")
    gcs = GcsService(spec, doc, clock_mode="realtime", seed=args.seed)

    human = None
    if args.human_script:
        human = ScriptedHuman(
            load_script(args.human_script),
            spec,
            Outbox(gcs.bus, "human"),
            random.Random(f"{gcs.seed}/human"),
        )
        gcs.bus.subscribe("gcs/coord/+", "human")

    gateway = ConsoleGateway(gcs)
    if args.listen:
        start_gateway(gateway, args.listen)

    gcs.start()
    agent_order = sorted(gcs.agents)
    inboxes: dict[str, list] = {name: [] for name in agent_order}
    last_slot = -1
    note(f"mission {spec.name!r} running for {spec.duration_ms} ms; "
         "Ctrl+C stops early")
    try:
        while gcs.clock.now < spec.duration_ms:
            # one guarded turn of the same loop the lockstep driver runs,
            # so console commands never interleave with a delivery step
            with gateway.lock:
                deliveries = gcs.bus.pump()
                now = gcs.clock.now
                for env, subscriber in deliveries:
                    if subscriber in inboxes:
                        inboxes[subscriber].append(env)
                    elif subscriber == "human" and human is not None:
                        human.deliver(env, now)
                slot = now // AGENT_STEP_MS
                if slot > last_slot:
                    last_slot = slot
                    for name in agent_order:
                        agent = gcs.agents[name]
                        agent.inbox.extend(inboxes[name])
                        inboxes[name].clear()
                        agent.step(now)
                if human is not None:
                    human.step(now)
                gcs.step(now)
            time.sleep(gcs.clock.tick / 2000)
    except KeyboardInterrupt:
        note("interrupted; writing artifacts")

    if args.log:
        gcs.write_log(args.log)
        note(f"event log: {args.log} ({len(gcs.log)} records)")
    emit_metrics(metrics_from_log(gcs.log), args.metrics)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.traceability:
            for line in traceability_report():
                print(line)
            return 0
        if args.replay and args.scenario:
            raise CliError("--replay and --scenario are mutually exclusive")
        if args.replay:
            return do_replay(args)
        if not args.scenario:
            raise CliError("one of --scenario or --replay is required")
        if args.listen and args.clock != "realtime":
            raise CliError("--listen requires --clock realtime")
        if args.listen and args.headless:
            raise CliError("--headless and --listen are mutually exclusive")
        if args.clock == "lockstep":
            return do_lockstep(args)
        return do_realtime(args)
    except CliError as err:
        note(f"error: {err}")
        return 2
    except MissionValidationError as err:
        note("mission document is invalid:")
        for issue in getattr(err, "issues", []):
            note(f"  {issue}")
        return 2
    except (HarnessError, LogGapError, GcsError) as err:
        note(f"error: {err}")
        return 2
    except OSError as err:
        note(f"error: {err}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

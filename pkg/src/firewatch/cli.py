"""Command-line interface.

Subcommands:
  keygen    predistribute device key material into a registry file
  simulate  run a scenario offline and write its trace / event log
  replay    post a trace's sealed packages to a running service
  serve     run the HTTP monitoring service
  report    tabulate per-area assessments from an event log

Exit status: 0 on success, 1 on a runtime problem, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import random
import sys
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .errors import FirewatchError
from .rulebase import ENV_FIELDS, load_rulebase

log = logging.getLogger(__name__)


def _device_ids(spec: str) -> list[str]:
    """``--devices`` accepts a count or an explicit comma-separated list."""
    if spec.isdigit() and len(spec) < 15:
        base = 356938035643800
        return [f"{base + i:015d}" for i in range(int(spec))]
    return [part.strip() for part in spec.split(",") if part.strip()]


# ----------------------------------------------------------------------
# keygen


def cmd_keygen(args) -> int:
    from .crypto import predistribute_keys

    out = Path(args.out)
    if out.exists() and not args.force:
        print(f"error: {out} exists; pass --force to overwrite", file=sys.stderr)
        return 1
    ids = _device_ids(args.devices)
    if not ids:
        print("error: no device ids", file=sys.stderr)
        return 1
    rng = random.Random(args.seed) if args.seed is not None else None
    registry = predistribute_keys(ids, rng=rng, pool_size=args.pool_size)
    registry.save(out)
    print(f"registry: {out}")
    for device_id in ids:
        record = registry.get(device_id)
        print(f"  {device_id}  pool={record.pool_size}  "
              f"root={record.merkle_root.hex()[:16]}…")
    return 0


# ----------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    from .crypto import Registry
    from .sim import Simulation, load_scenario

    scenario = load_scenario(args.scenario)
    registry = Registry.load(args.registry) if args.registry else None
    rulebase = load_rulebase(args.rulebase) if args.rulebase else None
    sim = Simulation(scenario, rulebase=rulebase, registry=registry,
                     seed=args.seed)
    if args.registry_out:
        # Saved before the run so a later replay starts from fresh pools.
        sim.registry.save(args.registry_out)
    result = sim.run()

    if args.out:
        result.save_trace(args.out)
        print(f"trace: {args.out} ({len(result.events)} events)")
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for entry in result.pipeline.eventlog.entries():
                fh.write(entry.to_json() + "\n")
        print(f"event log: {args.log}")

    acc = result.accounting
    print(f"scenario {scenario.name}: seed={sim.seed} "
          f"originated={acc.originated} delivered={acc.delivered} "
          f"buffered={acc.buffered} dropped={acc.dropped} "
          f"duplicate-drops={acc.duplicate_drops}")
    if not acc.conserved:
        print("warning: package accounting does not balance", file=sys.stderr)
    for summary in result.pipeline.area_summaries():
        print(f"  area {summary['area_id']}: level={summary['level']} "
              f"samples={summary['samples_today']}")
    for alert in result.pipeline.list_alerts(state_filter="active"):
        print(f"  active alert {alert['alert_id']}: {alert['level']} "
              f"at {alert['percentage']:.1f}%")
    return 0


# ----------------------------------------------------------------------
# replay


def cmd_replay(args) -> int:
    import httpx

    from .sim import read_trace

    events = [e for e in read_trace(args.trace) if e.kind == "measured"]
    if not events:
        print(f"error: no sealed packages in {args.trace}", file=sys.stderr)
        return 1
    events.sort(key=lambda e: e.seq)

    headers = {"Content-Type": "application/octet-stream"}
    if args.token:
        headers["Authorization"] = f"Bearer {args.token}"
    counts: dict[str, int] = {}
    base = args.service.rstrip("/")
    try:
        with httpx.Client(timeout=30.0) as client:
            previous_t = None
            for event in events:
                if not args.fast and previous_t is not None:
                    time.sleep(min(max(event.t - previous_t, 0.0), 1.0))
                previous_t = event.t
                raw = bytes.fromhex(event.detail["raw"])
                response = client.post(f"{base}/packages", content=raw,
                                       headers=headers)
                if response.status_code == 200:
                    status = response.json().get("status", "accepted")
                else:
                    status = f"rejected-{response.status_code}"
                counts[status] = counts.get(status, 0) + 1
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return 1
    total = sum(counts.values())
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"replayed {total} packages: {summary}")
    return 0


# ----------------------------------------------------------------------
# serve


def cmd_serve(args) -> int:
    import secrets

    import uvicorn

    from .crypto import Registry
    from .service import Authenticator, EventLog, IngestPipeline, load_service_config
    from .service.app import EventBus, create_app

    config = load_service_config(args.config)
    overrides = {}
    for flag, key in (("host", "host"), ("port", "port"),
                      ("registry", "registry_path"),
                      ("eventlog", "eventlog_path"),
                      ("rulebase", "rulebase_path"),
                      ("static_dir", "static_dir")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    if overrides:
        config = dataclasses.replace(config, **overrides)

    if not config.registry_path:
        print("error: a registry is required (--registry or config)",
              file=sys.stderr)
        return 1
    registry = Registry.load(config.registry_path)
    rulebase = load_rulebase(config.rulebase_path)
    if not config.eventlog_path:
        log.warning("no event log configured; state will not survive restarts")
    eventlog = EventLog(config.eventlog_path)

    authenticator = Authenticator(timedelta(seconds=config.token_ttl_s))
    for account in config.accounts:
        authenticator.add_account(account.username, account.password,
                                  account.role)
    if not config.accounts:
        password = secrets.token_urlsafe(12)
        authenticator.add_account("admin", password, "admin")
        log.warning("no accounts configured; created admin with password %s",
                    password)

    bus = EventBus()
    pipeline = IngestPipeline(registry, rulebase, eventlog,
                              publish=bus.publish,
                              area_tz=config.area_timezone)
    app = create_app(pipeline, authenticator, bus,
                     static_dir=config.static_dir)
    log.info("serving on %s:%d (%d devices registered)",
             config.host, config.port, len(registry))
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


# ----------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    from .service.eventlog import LogEntry

    path = Path(args.log)
    if not path.exists():
        print(f"error: no such log {path}", file=sys.stderr)
        return 1
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = LogEntry.parse(line)
            if entry.kind == "assessment" and \
                    entry.payload.get("area_id") == args.area:
                rows.append(entry.payload)
    if not rows:
        print(f"error: area {args.area!r} does not appear in {path}",
              file=sys.stderr)
        return 1

    if args.format == "json":
        json.dump(rows, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0

    writer = csv.writer(sys.stdout)
    header = ["timestamp", *ENV_FIELDS,
              *[f"avg_{name}" for name in ENV_FIELDS],
              "window", "percentage", "level"]
    writer.writerow(header)
    for payload in rows:
        ts = datetime.fromtimestamp(int(payload["timestamp"]),
                                    tz=timezone.utc).isoformat()
        values = payload.get("values", {})
        averages = payload.get("averages", {})
        writer.writerow([
            ts,
            *[values.get(name, "") for name in ENV_FIELDS],
            *[averages.get(name, "") for name in ENV_FIELDS],
            payload.get("window_used", ""),
            payload.get("percentage", ""),
            payload.get("level", ""),
        ])
    return 0


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firewatch",
        description="forest-fire risk monitoring: keys, simulation, service")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="predistribute device keys")
    p.add_argument("--devices", required=True,
                   help="device count, or comma-separated 15-digit ids")
    p.add_argument("--out", default="registry.json")
    p.add_argument("--pool-size", type=int, default=1024,
                   help="one-time keys per device (power of two)")
    p.add_argument("--seed", type=int, default=None,
                   help="deterministic key material (testing only)")
    p.add_argument("--force", action="store_true",
                   help="overwrite an existing registry")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("simulate", help="run a scenario offline")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario's seed")
    p.add_argument("--out", default=None, help="write the trace here (JSONL)")
    p.add_argument("--log", default=None,
                   help="write the service event log here (JSONL)")
    p.add_argument("--registry", default=None,
                   help="use an existing registry instead of generating one")
    p.add_argument("--registry-out", default=None,
                   help="save the registry used for the run")
    p.add_argument("--rulebase", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="post a trace to a running service")
    p.add_argument("--trace", required=True)
    p.add_argument("--service", default="http://127.0.0.1:8440")
    p.add_argument("--token", default=None)
    p.add_argument("--fast", action="store_true",
                   help="no pacing between packages")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the monitoring service")
    p.add_argument("--config", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--registry", default=None)
    p.add_argument("--eventlog", default=None)
    p.add_argument("--rulebase", default=None)
    p.add_argument("--static-dir", dest="static_dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="tabulate assessments for one area")
    p.add_argument("--log", required=True, help="service event log (JSONL)")
    p.add_argument("--area", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        logging.getLogger("httpx").setLevel(logging.WARNING)
    try:
        return args.func(args)
    except FirewatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Scenario files: the complete declarative description of a run."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence

import yaml

from ..errors import ScenarioError
from .envmodel import CsvEnvironment, FireEvent, SyntheticEnvironment
from .network import DEFAULT_RADIO_RANGE_M, CoverageSchedule

_IMEI_RE = re.compile(r"^[0-9]{15}$")

DEFAULT_TTL = 8
DEFAULT_CYCLE_PERIOD_S = 300
DEFAULT_START = datetime(2026, 8, 1, 6, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    area_id: str
    lat: float
    lon: float
    battery_pct: float = 100.0
    cycle_offset_s: float = 0.0


@dataclass(frozen=True)
class Directive:
    """Operator action injected at a fixed scenario time."""

    at_s: float
    kind: str  # "declare" | "set-frequency"
    params: Mapping[str, object]


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration_s: float
    cycle_period_s: int
    ttl: int
    radio_range_m: float
    start_time: datetime
    nodes: tuple[NodeSpec, ...]
    environments: Mapping[str, object]  # area id -> environment model
    coverage: Mapping[str, CoverageSchedule]
    directives: tuple[Directive, ...] = ()
    pool_size: int = 64
    key_seed: int = 0

    def environment(self, area_id: str):
        return self.environments[area_id]

    def coverage_of(self, node_id: str) -> CoverageSchedule:
        return self.coverage.get(node_id, CoverageSchedule())


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario YAML file."""
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario not found: {p}")
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario {p} is not valid YAML: {exc}")
    if not isinstance(raw, dict):
        raise ScenarioError(f"scenario {p}: top level must be a mapping")
    return parse_scenario(raw, base_dir=p.parent)


def parse_scenario(raw: dict, base_dir: Path | None = None) -> Scenario:
    name = str(raw.get("name") or "scenario")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError(f"seed must be an integer, got {seed!r}")

    duration = raw.get("duration_s")
    if not isinstance(duration, (int, float)) or duration <= 0:
        raise ScenarioError(f"duration_s must be positive, got {duration!r}")

    start_raw = raw.get("start_time")
    if start_raw is None:
        start = DEFAULT_START
    elif isinstance(start_raw, datetime):
        start = start_raw if start_raw.tzinfo else start_raw.replace(tzinfo=timezone.utc)
    else:
        start = datetime.fromisoformat(str(start_raw))
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)

    environments = {}
    for area in raw.get("areas") or []:
        if not isinstance(area, dict) or "id" not in area:
            raise ScenarioError(f"bad area entry {area!r}")
        area_id = str(area["id"])
        if "csv" in area:
            csv_path = Path(area["csv"])
            if base_dir is not None and not csv_path.is_absolute():
                csv_path = base_dir / csv_path
            environments[area_id] = CsvEnvironment(csv_path)
            continue
        events = []
        for ev in area.get("events") or []:
            if ev.get("kind") != "fire-ramp":
                raise ScenarioError(f"unknown event kind {ev.get('kind')!r}")
            events.append(FireEvent(
                start_cycle=int(ev["start_cycle"]),
                ramp_cycles=int(ev["ramp_cycles"]),
                targets={str(k): float(v) for k, v in (ev.get("targets") or {}).items()},
            ))
        environments[area_id] = SyntheticEnvironment(
            baseline=area.get("baseline") or {},
            noise_pct=float(area.get("noise_pct", 0.0)),
            events=events,
        )

    nodes = []
    seen_ids = set()
    for i, n in enumerate(raw.get("nodes") or []):
        try:
            node = NodeSpec(
                node_id=str(n["id"]),
                area_id=str(n["area"]),
                lat=float(n["lat"]),
                lon=float(n["lon"]),
                battery_pct=float(n.get("battery_pct", 100.0)),
                cycle_offset_s=float(n.get("cycle_offset_s", i)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad node entry {n!r}: {exc}")
        if not _IMEI_RE.match(node.node_id):
            raise ScenarioError(f"node id {node.node_id!r} is not a 15-digit IMEI")
        if node.node_id in seen_ids:
            raise ScenarioError(f"duplicate node id {node.node_id}")
        if node.area_id not in environments:
            raise ScenarioError(f"node {node.node_id} references unknown area {node.area_id!r}")
        seen_ids.add(node.node_id)
        nodes.append(node)
    if not nodes:
        raise ScenarioError("scenario has no nodes")

    coverage: dict[str, CoverageSchedule] = {}
    cov_raw = raw.get("coverage") or {}
    for entry in cov_raw.get("outages") or []:
        node_id = str(entry.get("node"))
        if node_id not in seen_ids:
            raise ScenarioError(f"coverage outage for unknown node {node_id!r}")
        window = (float(entry["from_s"]), float(entry["to_s"]))
        if window[1] <= window[0]:
            raise ScenarioError(f"empty outage window {window} for node {node_id}")
        prev = coverage.get(node_id, CoverageSchedule())
        coverage[node_id] = CoverageSchedule(outages=prev.outages + (window,))
    for node_id in cov_raw.get("never") or []:
        if str(node_id) not in seen_ids:
            raise ScenarioError(f"coverage 'never' for unknown node {node_id!r}")
        coverage[str(node_id)] = CoverageSchedule(never_covered=True)

    directives = []
    for d in raw.get("directives") or []:
        kind = d.get("kind")
        if kind == "declare":
            if str(d.get("area")) not in environments:
                raise ScenarioError(f"declare directive for unknown area {d.get('area')!r}")
            if d.get("level") not in ("LFR", "HFR", "EFR"):
                raise ScenarioError(f"declare directive needs level LFR/HFR/EFR, got {d.get('level')!r}")
            if not isinstance(d.get("ttl_s"), int) or d["ttl_s"] <= 0:
                raise ScenarioError(f"declare directive needs positive integer ttl_s, got {d.get('ttl_s')!r}")
        elif kind == "set-frequency":
            if str(d.get("device")) not in seen_ids:
                raise ScenarioError(f"set-frequency directive for unknown node {d.get('device')!r}")
            if not isinstance(d.get("period_s"), int):
                raise ScenarioError(f"set-frequency directive needs integer period_s, got {d.get('period_s')!r}")
        else:
            raise ScenarioError(f"unknown directive kind {kind!r}")
        params = {k: v for k, v in d.items() if k not in ("at_s", "kind")}
        directives.append(Directive(at_s=float(d.get("at_s", 0)), kind=kind, params=params))

    cycle_period = int(raw.get("cycle_period_s", DEFAULT_CYCLE_PERIOD_S))
    if cycle_period < 1:
        raise ScenarioError(f"cycle_period_s must be >= 1, got {cycle_period}")

    ttl = int(raw.get("ttl", DEFAULT_TTL))
    if ttl < 0:
        raise ScenarioError(f"ttl must be >= 0, got {ttl}")

    return Scenario(
        name=name,
        seed=seed,
        duration_s=float(duration),
        cycle_period_s=cycle_period,
        ttl=ttl,
        radio_range_m=float(raw.get("radio_range_m", DEFAULT_RADIO_RANGE_M)),
        start_time=start,
        nodes=tuple(nodes),
        environments=environments,
        coverage=coverage,
        directives=tuple(sorted(directives, key=lambda d: d.at_s)),
        pool_size=int(raw.get("pool_size", 64)),
        key_seed=int(raw.get("key_seed", 0)),
    )

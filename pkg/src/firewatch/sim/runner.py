"""Deterministic discrete-event simulation of a sensor field.

Nodes sample their area's environment on a fixed cycle, seal each
reading into a wire envelope, and try to hand it to the uplink.  A node
without uplink coverage floods the package to its radio neighbors
(TTL-limited, duplicate-suppressed); an isolated node buffers its own
packages and retries every cycle.  The uplink sink is a real
:class:`~firewatch.service.pipeline.IngestPipeline`, so a simulation
run exercises decryption, signature checks, replay suppression and risk
assessment exactly as the online service would.

Everything is driven by one seeded RNG and a single event heap, so a
(scenario, seed) pair always produces byte-identical traces.
"""
from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Optional

from ..controller import Measurement
from ..crypto import NodeKeyState, Registry, predistribute_keys
from ..crypto.seal import seal_measurement
from ..fuzzy import RiskLevel
from ..rulebase import RuleBase, load_rulebase
from ..service.eventlog import LogEntry
from ..service.pipeline import IngestPipeline
from .events import SimEvent, TraceAccounting, account_trace, write_trace
from .network import NeighborGraph
from .scenario import NodeSpec, Scenario

log = logging.getLogger(__name__)


@dataclass
class _Packet:
    """One copy of a sealed measurement travelling through the mesh."""

    package_id: str  # hex
    raw: bytes
    origin: str
    ttl: int


@dataclass
class _NodeState:
    spec: NodeSpec
    period_s: float
    cycle: int = 0
    buffer: list = field(default_factory=list)
    seen: set = field(default_factory=set)


@dataclass
class SimResult:
    scenario: Scenario
    events: list
    pipeline: IngestPipeline
    registry: Registry

    @property
    def accounting(self) -> TraceAccounting:
        return account_trace(self.events)

    def save_trace(self, path: str | Path) -> None:
        write_trace(self.events, path)


class Simulation:
    """One scenario run.  Construct, then call :meth:`run` once."""

    def __init__(
        self,
        scenario: Scenario,
        rulebase: Optional[RuleBase] = None,
        registry: Optional[Registry] = None,
        seed: Optional[int] = None,
    ):
        self.scenario = scenario
        self.rulebase = rulebase if rulebase is not None else load_rulebase()
        self.seed = scenario.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        if registry is None:
            key_seed = scenario.key_seed or (self.seed + 1_000_003)
            registry = predistribute_keys(
                [n.node_id for n in scenario.nodes],
                rng=random.Random(key_seed),
                pool_size=scenario.pool_size,
            )
        self.registry = registry
        self.keys = {
            n.node_id: NodeKeyState(registry.get(n.node_id))
            for n in scenario.nodes
        }
        self.graph = NeighborGraph.from_positions(
            {n.node_id: (n.lat, n.lon) for n in scenario.nodes},
            scenario.radio_range_m,
        )
        self.pipeline = IngestPipeline(
            registry, self.rulebase, publish=self._on_pipeline_entry)
        self.nodes = {
            n.node_id: _NodeState(spec=n, period_s=float(scenario.cycle_period_s))
            for n in scenario.nodes
        }
        self.events: list[SimEvent] = []
        self._now = 0.0
        self._push_counter = 0
        self._heap: list = []
        self._done = False
        for directive in scenario.directives:
            if directive.at_s < scenario.duration_s:
                self._push(directive.at_s, ("directive", directive))
        for node_id in sorted(self.nodes):
            start = self.nodes[node_id].spec.cycle_offset_s
            if start < scenario.duration_s:
                self._push(start, ("cycle", node_id))

    # ------------------------------------------------------------------
    # event loop

    def run(self) -> SimResult:
        if self._done:
            raise RuntimeError("a Simulation instance runs only once")
        self._done = True
        while self._heap:
            t, _, action = heapq.heappop(self._heap)
            self._now = t
            kind, ref = action
            if kind == "cycle":
                self._cycle(self.nodes[ref], t)
            else:
                self._directive(ref, t)
        log.info("scenario %s finished: %d trace events, %d accepted",
                 self.scenario.name, len(self.events), self.pipeline.accepted_count)
        return SimResult(scenario=self.scenario, events=self.events,
                         pipeline=self.pipeline, registry=self.registry)

    def _push(self, t: float, action) -> None:
        self._push_counter += 1
        heapq.heappush(self._heap, (t, self._push_counter, action))

    def _emit(self, kind: str, node: str = "", area: str = "",
              package_id: str = "", detail: Optional[dict] = None) -> None:
        self.events.append(SimEvent(
            seq=len(self.events) + 1, t=self._now, kind=kind,
            node=node, area=area, package_id=package_id,
            detail=detail or {},
        ))

    # ------------------------------------------------------------------
    # node behaviour

    def _cycle(self, node: _NodeState, t: float) -> None:
        # Buffered packages go first so the sink sees a device's
        # timestamps in origination order.
        pending, node.buffer = node.buffer, []
        for packet in pending:
            self._route(node, packet, t)

        values = self.scenario.environment(node.spec.area_id).sample(node.cycle, self.rng)
        m = Measurement(
            device_id=node.spec.node_id,
            area_id=node.spec.area_id,
            timestamp=self.scenario.start_time + timedelta(seconds=t),
            lat=node.spec.lat,
            lon=node.spec.lon,
            battery_pct=node.spec.battery_pct,
            **values,
        )
        raw, pid = seal_measurement(
            self.keys[node.spec.node_id],
            self.registry.get(node.spec.node_id).aes_key,
            m,
            rng=self.rng,
        )
        pid_hex = pid.hex()
        node.seen.add(pid_hex)
        self._emit("measured", node=node.spec.node_id, area=node.spec.area_id,
                   package_id=pid_hex,
                   detail={"cycle": node.cycle, "raw": raw.hex()})
        self._route(node, _Packet(pid_hex, raw, node.spec.node_id, self.scenario.ttl), t)

        if self.scenario.coverage_of(node.spec.node_id).covered(t):
            period = self.pipeline.poll_frequency(node.spec.node_id)
            if period is not None and period != node.period_s:
                node.period_s = float(period)
                self._emit("frequency-applied", node=node.spec.node_id,
                           detail={"period_s": period})

        node.cycle += 1
        next_t = t + node.period_s
        if next_t < self.scenario.duration_s:
            self._push(next_t, ("cycle", node.spec.node_id))

    def _route(self, node: _NodeState, packet: _Packet, t: float) -> None:
        """Decide what one node does with one package copy.

        Order matters: uplink wins when covered; an isolated node keeps
        its package; otherwise flood while TTL remains.
        """
        node_id = node.spec.node_id
        if self.scenario.coverage_of(node_id).covered(t):
            self._emit("sent-uplink", node=node_id, package_id=packet.package_id)
            self._deliver(node_id, packet)
            return
        neighbors = self.graph.of(node_id)
        if not neighbors:
            node.buffer.append(packet)
            self._emit("buffered", node=node_id, package_id=packet.package_id,
                       detail={"ttl": packet.ttl})
            return
        if packet.ttl > 0:
            self._emit("forwarded", node=node_id, package_id=packet.package_id,
                       detail={"ttl": packet.ttl - 1, "fanout": len(neighbors)})
            relayed = _Packet(packet.package_id, packet.raw, packet.origin,
                              packet.ttl - 1)
            for neighbor_id in neighbors:
                self._receive(neighbor_id, relayed, t)
            return
        self._emit("dropped-ttl", node=node_id, package_id=packet.package_id)

    def _receive(self, node_id: str, packet: _Packet, t: float) -> None:
        node = self.nodes[node_id]
        if packet.package_id in node.seen:
            self._emit("dropped-duplicate", node=node_id,
                       package_id=packet.package_id)
            return
        node.seen.add(packet.package_id)
        self._route(node, packet, t)

    def _deliver(self, node_id: str, packet: _Packet) -> None:
        self._emit("delivered", node=node_id, package_id=packet.package_id,
                   detail={"origin": packet.origin})
        result = self.pipeline.ingest_envelope(packet.raw)
        if result.status == "rejected":
            self._emit("rejected", node=node_id, package_id=packet.package_id,
                       detail={"code": result.code, "reason": result.reason})

    # ------------------------------------------------------------------
    # operator directives and sink feedback

    def _directive(self, directive, t: float) -> None:
        params = directive.params
        if directive.kind == "declare":
            self.pipeline.declare_risk(
                str(params["area"]),
                RiskLevel.parse(str(params["level"])),
                int(params["ttl_s"]),
                now=self.scenario.start_time + timedelta(seconds=t),
            )
        elif directive.kind == "set-frequency":
            self.pipeline.set_frequency(str(params["device"]), int(params["period_s"]))

    def _on_pipeline_entry(self, entry: LogEntry) -> None:
        payload = entry.payload
        if entry.kind == "assessment":
            self._emit("assessment", area=payload["area_id"], detail={
                "level": payload["level"],
                "percentage": payload["percentage"],
                "window_used": payload["window_used"],
            })
        elif entry.kind == "alert":
            self._emit("alert", area=payload["area_id"], detail={
                "alert_id": payload["alert_id"],
                "level": payload["level"],
                "state": payload["state"],
            })


def run_scenario(
    scenario: Scenario,
    rulebase: Optional[RuleBase] = None,
    registry: Optional[Registry] = None,
    seed: Optional[int] = None,
) -> SimResult:
    """Convenience wrapper: build a :class:`Simulation` and run it."""
    return Simulation(scenario, rulebase=rulebase, registry=registry,
                      seed=seed).run()

"""Typed simulation trace events and JSONL serialisation.

A trace is the complete ordered record of one simulation run:
measurement origination, forwarding decisions, drops, deliveries and
the service-side assessments/alerts they caused.  Identical scenario +
seed must give byte-identical trace files, so serialisation is
canonical (sorted keys, fixed float formatting through repr).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

EVENT_KINDS = (
    "measured",
    "sent-uplink",
    "forwarded",
    "dropped-duplicate",
    "dropped-ttl",
    "buffered",
    "delivered",
    "assessment",
    "alert",
    "frequency-applied",
    "rejected",
)


@dataclass(frozen=True)
class SimEvent:
    seq: int
    t: float
    kind: str
    node: str = ""
    area: str = ""
    package_id: str = ""
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"seq": self.seq, "t": self.t, "kind": self.kind}
        if self.node:
            d["node"] = self.node
        if self.area:
            d["area"] = self.area
        if self.package_id:
            d["package_id"] = self.package_id
        if self.detail:
            d["detail"] = self.detail
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def parse(cls, line: str) -> "SimEvent":
        d = json.loads(line)
        return cls(
            seq=int(d["seq"]),
            t=float(d["t"]),
            kind=str(d["kind"]),
            node=d.get("node", ""),
            area=d.get("area", ""),
            package_id=d.get("package_id", ""),
            detail=d.get("detail", {}),
        )


def write_trace(events: Iterable[SimEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(event.to_json() + "\n")


def read_trace(path: str | Path) -> list[SimEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(SimEvent.parse(line))
    return events


@dataclass(frozen=True)
class TraceAccounting:
    """Per-package terminal-state bookkeeping over a whole trace."""

    originated: int
    delivered: int
    buffered: int
    dropped: int  # ttl expiry, or flooding died out against seen-sets
    duplicate_drops: int
    delivered_ids: frozenset[str]

    @property
    def conserved(self) -> bool:
        return self.originated == self.delivered + self.buffered + self.dropped


def account_trace(events: Iterable[SimEvent]) -> TraceAccounting:
    """Classify every originated package by its terminal state.

    ``delivered`` wins over everything (exactly-once is checked by the
    caller against delivery counts); a package still sitting in some
    node's buffer at the end counts ``buffered``; the rest were dropped
    in flight.
    """
    originated: set[str] = set()
    delivered: dict[str, int] = {}
    in_buffer: dict[tuple[str, str], bool] = {}  # (node, pid) -> still held
    duplicate_drops = 0
    for event in events:
        pid = event.package_id
        if event.kind == "measured":
            originated.add(pid)
        elif event.kind == "delivered":
            delivered[pid] = delivered.get(pid, 0) + 1
        elif event.kind == "buffered":
            in_buffer[(event.node, pid)] = True
        elif event.kind in ("sent-uplink", "forwarded", "dropped-ttl"):
            # This node acted on the package, so its copy left the buffer.
            in_buffer.pop((event.node, pid), None)
        elif event.kind == "dropped-duplicate":
            duplicate_drops += 1
    buffered = {pid for (_, pid), still in in_buffer.items()
                if still and pid not in delivered}
    dropped = originated - set(delivered) - buffered
    return TraceAccounting(
        originated=len(originated),
        delivered=len(delivered),
        buffered=len(buffered),
        dropped=len(dropped),
        duplicate_drops=duplicate_drops,
        delivered_ids=frozenset(delivered),
    )

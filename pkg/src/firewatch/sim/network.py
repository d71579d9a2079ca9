"""Radio neighborhood and uplink coverage for simulated nodes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

EARTH_RADIUS_M = 6_371_000.0

#: Two nodes are peers when within this great-circle distance.
DEFAULT_RADIO_RANGE_M = 200.0


def great_circle_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Haversine distance between two WGS84 points, in meters."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


@dataclass(frozen=True)
class NeighborGraph:
    """Static peer-to-peer adjacency derived from node positions."""

    neighbors: Mapping[str, tuple[str, ...]]

    @classmethod
    def from_positions(
        cls,
        positions: Mapping[str, tuple[float, float]],
        radio_range_m: float = DEFAULT_RADIO_RANGE_M,
    ) -> "NeighborGraph":
        ids = sorted(positions)
        adj: dict[str, list[str]] = {i: [] for i in ids}
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                d = great_circle_m(*positions[a], *positions[b])
                if d <= radio_range_m:
                    adj[a].append(b)
                    adj[b].append(a)
        return cls(neighbors={i: tuple(sorted(n)) for i, n in adj.items()})

    def of(self, node_id: str) -> tuple[str, ...]:
        return self.neighbors.get(node_id, ())


@dataclass(frozen=True)
class CoverageSchedule:
    """Uplink availability as a list of outage windows.

    A node is covered by default; each outage is a left-closed interval
    ``[start, end)`` in scenario seconds during which the node cannot
    reach the service directly.  A node with ``never_covered`` set has
    no uplink at all.
    """

    outages: tuple[tuple[float, float], ...] = ()
    never_covered: bool = False

    def covered(self, t: float) -> bool:
        if self.never_covered:
            return False
        return not any(start <= t < end for start, end in self.outages)

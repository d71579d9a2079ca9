"""Environmental ground truth for simulated areas.

Two sources: a parametric model (per-area baselines, optional bounded
multiplicative noise, scheduled fire events that ramp selected
variables towards target values) and replayed CSV time series.
"""
from __future__ import annotations

import csv
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import ScenarioError
from ..rulebase import ENV_FIELDS


@dataclass(frozen=True)
class FireEvent:
    """Linear ramp of selected variables starting at a given cycle.

    During cycles ``start_cycle .. start_cycle + ramp_cycles - 1`` the
    affected variables interpolate linearly from baseline to their
    targets; afterwards they hold the target.
    """

    start_cycle: int
    ramp_cycles: int
    targets: Mapping[str, float]

    def factor(self, cycle: int) -> float:
        if cycle < self.start_cycle:
            return 0.0
        k = cycle - self.start_cycle + 1
        return min(1.0, k / self.ramp_cycles)


class SyntheticEnvironment:
    """Parametric per-area environment with seeded, bounded noise.

    Noise is multiplicative and uniform in ``+/- noise_pct`` percent,
    drawn from the simulation RNG, so a given seed always yields the
    same readings.
    """

    def __init__(
        self,
        baseline: Mapping[str, float],
        noise_pct: float = 0.0,
        events: Sequence[FireEvent] = (),
    ):
        missing = [f for f in ENV_FIELDS if f not in baseline]
        if missing:
            raise ScenarioError(f"baseline missing fields: {missing}")
        self.baseline = {f: float(baseline[f]) for f in ENV_FIELDS}
        self.noise_pct = float(noise_pct)
        self.events = tuple(events)

    def sample(self, cycle: int, rng: random.Random) -> dict[str, float]:
        """Readings for one measurement cycle (0-based)."""
        values = dict(self.baseline)
        for event in self.events:
            f = event.factor(cycle)
            if f > 0.0:
                for name, target in event.targets.items():
                    base = self.baseline[name]
                    values[name] = base + (float(target) - base) * f
        if self.noise_pct > 0.0:
            span = self.noise_pct / 100.0
            for name in ENV_FIELDS:
                values[name] *= 1.0 + rng.uniform(-span, span)
        return values


class CsvEnvironment:
    """Replays recorded readings; one row per cycle.

    The file needs a header with at least the seven environment fields;
    extra columns are ignored.  Cycles beyond the last row hold the
    final readings.
    """

    def __init__(self, path: str | Path):
        self.rows: list[dict[str, float]] = []
        try:
            with open(path, newline="") as fh:
                reader = csv.DictReader(fh)
                for row in reader:
                    try:
                        self.rows.append({f: float(row[f]) for f in ENV_FIELDS})
                    except (KeyError, TypeError, ValueError) as exc:
                        raise ScenarioError(f"{path}: bad row {reader.line_num}: {exc}")
        except OSError as exc:
            raise ScenarioError(f"cannot read environment CSV {path}: {exc}")
        if not self.rows:
            raise ScenarioError(f"{path}: no data rows")

    def sample(self, cycle: int, rng: random.Random) -> dict[str, float]:
        return dict(self.rows[min(cycle, len(self.rows) - 1)])

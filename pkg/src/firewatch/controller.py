"""Per-area risk controller.

Keeps the day's measurement history for an area, picks the averaging
window from the previously assessed risk level (shrinking as risk
grows, and clamped hard while an external risk declaration is active),
runs every variable through its rule table and produces a classified
risk assessment per incoming measurement.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Optional, Sequence
from zoneinfo import ZoneInfo

from .errors import ConfigError, InvalidMeasurementError, StaleTimestampError
from .fuzzy import RiskLevel, aggregate, classify_level, defuzzify_centroid, infer
from .rulebase import ENV_FIELDS, RuleBase

log = logging.getLogger(__name__)

_IMEI_RE = re.compile(r"^[0-9]{15}$")

UTC = timezone.utc


def _require_finite(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidMeasurementError(f"{name}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise InvalidMeasurementError(f"{name}: non-finite value {value!r}")
    return v


@dataclass(frozen=True)
class Measurement:
    """One validated sensor reading from a device in an area.

    Timestamps are UTC instants with second precision; IMEIs are the
    usual 15 decimal digits.
    """

    device_id: str
    area_id: str
    timestamp: datetime
    lat: float
    lon: float
    battery_pct: float
    temperature_c: float
    humidity_pct: float
    wind_kmh: float
    rainfall_mm: float
    co2_ppm: float
    co_ppm: float
    o2_pct: float

    def __post_init__(self):
        if not _IMEI_RE.match(self.device_id):
            raise InvalidMeasurementError(f"bad device id {self.device_id!r} (want 15 digits)")
        if not self.area_id:
            raise InvalidMeasurementError("empty area id")
        ts = self.timestamp
        if not isinstance(ts, datetime) or ts.tzinfo is None:
            raise InvalidMeasurementError("timestamp must be timezone-aware")
        ts = ts.astimezone(UTC).replace(microsecond=0)
        object.__setattr__(self, "timestamp", ts)
        for name in ("lat", "lon", "battery_pct") + ENV_FIELDS:
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if not -90.0 <= self.lat <= 90.0 or not -180.0 <= self.lon <= 180.0:
            raise InvalidMeasurementError(f"bad coordinates ({self.lat}, {self.lon})")
        if not 0.0 <= self.battery_pct <= 100.0:
            raise InvalidMeasurementError(f"battery_pct out of range: {self.battery_pct}")

    def env_value(self, name: str) -> float:
        return getattr(self, name)

    def to_dict(self) -> dict:
        d = {
            "device_id": self.device_id,
            "area_id": self.area_id,
            "timestamp": int(self.timestamp.timestamp()),
            "lat": self.lat,
            "lon": self.lon,
            "battery_pct": self.battery_pct,
        }
        for name in ENV_FIELDS:
            d[name] = getattr(self, name)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Measurement":
        try:
            ts = d["timestamp"]
        except (KeyError, TypeError) as exc:
            raise InvalidMeasurementError("measurement missing timestamp") from exc
        if isinstance(ts, (int, float)):
            ts = datetime.fromtimestamp(int(ts), tz=UTC)
        elif isinstance(ts, str):
            ts = datetime.fromisoformat(ts)
        else:
            raise InvalidMeasurementError(f"bad timestamp {ts!r}")
        try:
            kwargs = {name: d[name] for name in
                      ("device_id", "area_id", "lat", "lon", "battery_pct") + ENV_FIELDS}
        except KeyError as exc:
            raise InvalidMeasurementError(f"measurement missing field {exc.args[0]!r}")
        return cls(timestamp=ts, **kwargs)


@dataclass(frozen=True)
class Declaration:
    """External risk declaration from an emergency service."""

    level: RiskLevel
    declared_at: datetime
    expires_at: datetime

    def active_at(self, when: datetime) -> bool:
        return self.declared_at <= when < self.expires_at


@dataclass(frozen=True)
class RiskAssessment:
    """Outcome of one inference cycle for an area."""

    area_id: str
    timestamp: datetime
    percentage: float
    level: RiskLevel
    window_used: int | str  # sample count, or "all"
    values: dict[str, float]
    averages: dict[str, float]
    activations: dict[str, dict[str, float]]  # per variable, per level name
    clamped: tuple[str, ...] = ()
    declaration_active: bool = False

    def to_dict(self) -> dict:
        return {
            "area_id": self.area_id,
            "timestamp": int(self.timestamp.timestamp()),
            "percentage": self.percentage,
            "level": self.level.name,
            "window_used": self.window_used,
            "values": dict(self.values),
            "averages": dict(self.averages),
            "activations": {v: dict(acts) for v, acts in self.activations.items()},
            "clamped": list(self.clamped),
            "declaration_active": self.declaration_active,
        }


@dataclass
class AreaState:
    """Mutable per-area controller state for the current local day."""

    area_id: str
    tz: str = "UTC"
    history: list[Measurement] = field(default_factory=list)
    current_level: RiskLevel = RiskLevel.NFR
    declaration: Optional[Declaration] = None
    last_assessment: Optional[RiskAssessment] = None

    def local_date(self, when: datetime):
        return when.astimezone(ZoneInfo(self.tz)).date()


def compute_average(values: Sequence[float], window: int | None) -> float:
    """Mean of the most recent ``window`` values (all of them if None).

    Raises:
        ValueError: if ``values`` is empty; callers decide the
            cold-start substitute.
    """
    if not values:
        raise ValueError("no values to average")
    if window is not None:
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        values = values[-window:]
    return math.fsum(values) / len(values)


class RiskController:
    """Runs the full measurement -> assessment pipeline for any area."""

    def __init__(self, rulebase: RuleBase):
        self.rulebase = rulebase
        self.settings = rulebase.controller

    # -- policy -------------------------------------------------------

    def window_size(self, prior: RiskLevel, declaration_active: bool) -> int | None:
        """Averaging window for the next cycle; None means all samples.

        An active declaration forces the tightest window regardless of
        the previously assessed level, so response sharpens immediately
        when emergency services flag an area.
        """
        window = self.settings.windows[prior]
        if declaration_active:
            forced = self.settings.declaration_window
            return forced if window is None else min(window, forced)
        return window

    def recommended_cycle_period(self, level: RiskLevel) -> int:
        """Suggested seconds between samples for devices in an area."""
        return self.settings.cycle_periods_s[level]

    # -- state transitions --------------------------------------------

    def new_area(self, area_id: str, tz: str | None = None) -> AreaState:
        return AreaState(area_id=area_id, tz=tz or self.settings.timezone)

    def rollover(self, state: AreaState) -> None:
        """End-of-day reset: drop history and start the new day at NFR.

        Declarations are left untouched; an emergency does not end at
        midnight.
        """
        log.info("area %s: day rollover, clearing %d samples", state.area_id, len(state.history))
        state.history.clear()
        state.current_level = RiskLevel.NFR
        state.last_assessment = None

    def apply_declaration(
        self,
        state: AreaState,
        level: RiskLevel,
        ttl: timedelta,
        now: datetime,
    ) -> Declaration:
        """Attach an external risk declaration to the area.

        A new declaration replaces any previous one.  NFR cannot be
        declared; clearing happens by letting the TTL lapse.
        """
        level = RiskLevel.parse(level)
        if level == RiskLevel.NFR:
            raise ConfigError("cannot declare NFR; let the declaration expire instead")
        if ttl <= timedelta(0):
            raise ConfigError(f"declaration ttl must be positive, got {ttl}")
        decl = Declaration(level=level, declared_at=now, expires_at=now + ttl)
        state.declaration = decl
        log.info("area %s: %s declared until %s", state.area_id, level, decl.expires_at)
        return decl

    # -- assessment ---------------------------------------------------

    def assess(self, state: AreaState, m: Measurement) -> RiskAssessment:
        """Assess one measurement and fold it into the area state.

        The averaging window is chosen from the level assessed on the
        *previous* cycle.  With an empty history (cold start or just
        after rollover) the incoming values stand in for their own
        averages.

        Raises:
            InvalidMeasurementError: wrong area id.
            StaleTimestampError: timestamp not strictly newer than the
                last accepted sample for the area.
        """
        if m.area_id != state.area_id:
            raise InvalidMeasurementError(
                f"measurement for {m.area_id!r} fed to area {state.area_id!r}")

        if state.history:
            last_ts = state.history[-1].timestamp
            if m.timestamp <= last_ts:
                raise StaleTimestampError(
                    f"area {state.area_id}: timestamp {m.timestamp.isoformat()} "
                    f"not after {last_ts.isoformat()}")
            if state.local_date(m.timestamp) != state.local_date(last_ts):
                self.rollover(state)

        declaration_active = (
            state.declaration is not None and state.declaration.active_at(m.timestamp)
        )
        window = self.window_size(state.current_level, declaration_active)

        values: dict[str, float] = {}
        averages: dict[str, float] = {}
        activations: dict[str, dict[str, float]] = {}
        clamped: list[str] = []
        maps = []
        for name in ENV_FIELDS:
            var = self.rulebase.variable(name)
            value = m.env_value(name)
            if state.history:
                avg = compute_average([s.env_value(name) for s in state.history], window)
            else:
                avg = value
            last_fv = var.fuzzify(value)
            avg_fv = var.fuzzify(avg)
            if last_fv.clamped or avg_fv.clamped:
                clamped.append(name)
            acts = infer(self.rulebase.fam(name), last_fv, avg_fv)
            maps.append(acts)
            values[name] = value
            averages[name] = avg
            activations[name] = {level.name: acts[level] for level in RiskLevel}

        agg = aggregate(maps, self.rulebase.output)
        percentage = defuzzify_centroid(agg, self.settings.centroid_resolution)
        level = classify_level(percentage, self.rulebase.output)

        assessment = RiskAssessment(
            area_id=state.area_id,
            timestamp=m.timestamp,
            percentage=percentage,
            level=level,
            window_used="all" if window is None else window,
            values=values,
            averages=averages,
            activations=activations,
            clamped=tuple(clamped),
            declaration_active=declaration_active,
        )
        state.history.append(m)
        state.current_level = level
        state.last_assessment = assessment
        return assessment

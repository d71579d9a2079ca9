"""Core ingestion pipeline, independent of any transport.

decrypt -> verify signature -> replay check -> parse -> assess ->
persist -> alert transition -> publish.  The HTTP app wraps this; the
offline simulator uses it directly as its uplink sink, so trace replay
through the service reproduces the simulator's assessments bit for
bit.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable, Optional

from ..controller import AreaState, Measurement, RiskAssessment, RiskController
from ..crypto import Registry
from ..crypto.seal import open_envelope
from ..errors import (
    InvalidMeasurementError,
    StaleTimestampError,
    UnknownDeviceError,
    VerificationError,
)
from ..fuzzy import RiskLevel
from ..rulebase import RuleBase
from .eventlog import EventLog, LogEntry

log = logging.getLogger(__name__)

MIN_PERIOD_S = 30
MAX_PERIOD_S = 3600


@dataclass(frozen=True)
class AlertRecord:
    """One alert transition; at most one alert is active per area."""

    alert_id: str
    area_id: str
    level: RiskLevel
    percentage: float
    created_at: datetime
    triggered_by: str = ""  # package id of the triggering measurement
    state: str = "active"  # active | superseded | cleared
    superseded_by: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "area_id": self.area_id,
            "level": self.level.name,
            "percentage": self.percentage,
            "created_at": int(self.created_at.timestamp()),
            "triggered_by": self.triggered_by,
            "state": self.state,
            "superseded_by": self.superseded_by,
        }


@dataclass(frozen=True)
class FrequencySetting:
    device_id: str
    period_s: int
    status: str = "pending"  # pending until the node polls it

    def to_dict(self) -> dict:
        return {"device_id": self.device_id, "period_s": self.period_s,
                "status": self.status}


@dataclass(frozen=True)
class IngestResult:
    status: str  # accepted | replay | rejected
    http_status: int
    reason: str = ""
    code: str = ""
    assessment: Optional[RiskAssessment] = None
    alert: Optional[AlertRecord] = None
    package_id: str = ""


class IngestPipeline:
    """Authoritative service state: areas, alerts, ledger, frequencies.

    All mutating entry points serialise on one lock; per-area ordering
    follows from that.  ``publish`` (if given) is called outside no
    lock-free guarantees with each appended log entry of an
    event-stream kind.
    """

    STREAM_KINDS = ("assessment", "alert", "declaration", "frequency-change")

    def __init__(
        self,
        registry: Registry,
        rulebase: RuleBase,
        eventlog: EventLog | None = None,
        publish: Callable[[LogEntry], None] | None = None,
        area_tz: str | None = None,
    ):
        self.registry = registry
        self.controller = RiskController(rulebase)
        self.eventlog = eventlog if eventlog is not None else EventLog(None)
        self.publish = publish
        self.area_tz = area_tz
        self.areas: dict[str, AreaState] = {}
        self.alerts: dict[str, AlertRecord] = {}          # all alerts by id
        self.active_alerts: dict[str, str] = {}           # area -> alert id
        self.frequencies: dict[str, FrequencySetting] = {}
        self.rejections: list[dict] = []
        self.accepted_count = 0
        self.assessment_tail: dict[str, list[RiskAssessment]] = {}
        self._seen_packages: dict[str, str] = {}          # package id hex -> local date
        self._device_last_ts: dict[str, datetime] = {}
        self._lock = threading.RLock()
        if self.eventlog.last_seq:
            self._rebuild()

    # ------------------------------------------------------------------
    # ingestion

    def ingest_envelope(self, raw: bytes) -> IngestResult:
        """Run one wire package through the full pipeline."""
        try:
            opened = open_envelope(raw, self.registry)
        except UnknownDeviceError as exc:
            return self._reject(404, "unknown-device", str(exc))
        except VerificationError as exc:
            return self._reject(401, "verification-failed", str(exc))
        except (InvalidMeasurementError, ValueError) as exc:
            return self._reject(400, "malformed", str(exc))

        pid = opened.envelope.package_id.hex()
        m = opened.measurement
        with self._lock:
            if pid in self._seen_packages:
                log.info("package %s replayed; acknowledging without reprocessing", pid)
                return IngestResult(status="replay", http_status=200, package_id=pid)

            last = self._device_last_ts.get(m.device_id)
            if last is not None and m.timestamp <= last:
                return self._reject(
                    409, "stale-timestamp",
                    f"device {m.device_id}: {m.timestamp.isoformat()} not after "
                    f"{last.isoformat()}", device_id=m.device_id)

            state = self._area(m.area_id)
            try:
                assessment = self.controller.assess(state, m)
            except StaleTimestampError as exc:
                return self._reject(409, "stale-timestamp", str(exc), device_id=m.device_id)
            except InvalidMeasurementError as exc:
                return self._reject(400, "malformed", str(exc), device_id=m.device_id)

            self._device_last_ts[m.device_id] = m.timestamp
            self._seen_packages[pid] = str(state.local_date(m.timestamp))
            self._prune_ledger(state, m.timestamp)
            self._remember_assessment(assessment)

            self.accepted_count += 1
            self._append("measurement", {**m.to_dict(), "package_id": pid})
            self._append("assessment", assessment.to_dict())
            alert = self._transition_alert(assessment, pid)
        return IngestResult(
            status="accepted", http_status=200,
            assessment=assessment, alert=alert, package_id=pid,
        )

    def _reject(self, http_status: int, code: str, reason: str, device_id: str = "") -> IngestResult:
        entry = {"code": code, "reason": reason, "device_id": device_id}
        with self._lock:
            self.rejections.append(entry)
        log.warning("package rejected (%s): %s", code, reason)
        return IngestResult(status="rejected", http_status=http_status,
                            reason=reason, code=code)

    # ------------------------------------------------------------------
    # operator actions

    def declare_risk(self, area_id: str, level: RiskLevel, ttl_s: int,
                     now: datetime | None = None) -> dict:
        """Record an external risk declaration for an area."""
        now = now or datetime.now(timezone.utc)
        with self._lock:
            state = self._area(area_id)
            decl = self.controller.apply_declaration(
                state, level, timedelta(seconds=ttl_s), now)
            payload = {
                "area_id": area_id,
                "level": decl.level.name,
                "declared_at": int(decl.declared_at.timestamp()),
                "expires_at": int(decl.expires_at.timestamp()),
            }
            self._append("declaration", payload)
        return payload

    def set_frequency(self, device_id: str, period_s: int) -> FrequencySetting:
        """Stage a sampling-period change; the node picks it up at its
        next uplink contact."""
        if device_id not in self.registry:
            raise UnknownDeviceError(f"device {device_id!r} is not registered")
        if not MIN_PERIOD_S <= period_s <= MAX_PERIOD_S:
            raise ValueError(
                f"period must be {MIN_PERIOD_S}..{MAX_PERIOD_S} s, got {period_s}")
        setting = FrequencySetting(device_id=device_id, period_s=period_s)
        with self._lock:
            self.frequencies[device_id] = setting
            self._append("frequency-change", setting.to_dict())
        return setting

    def poll_frequency(self, device_id: str) -> Optional[int]:
        """Node-side poll; acknowledges a pending setting if present."""
        with self._lock:
            setting = self.frequencies.get(device_id)
            if setting is None:
                return None
            if setting.status == "pending":
                setting = FrequencySetting(device_id=device_id,
                                           period_s=setting.period_s, status="applied")
                self.frequencies[device_id] = setting
                self._append("frequency-change", setting.to_dict())
            return setting.period_s

    # ------------------------------------------------------------------
    # alert bookkeeping

    def _transition_alert(self, assessment: RiskAssessment,
                          package_id: str) -> Optional[AlertRecord]:
        area = assessment.area_id
        active_id = self.active_alerts.get(area)
        active = self.alerts.get(active_id) if active_id else None

        if assessment.level == RiskLevel.NFR:
            if active is not None:
                cleared = AlertRecord(
                    alert_id=active.alert_id, area_id=area, level=active.level,
                    percentage=active.percentage, created_at=active.created_at,
                    triggered_by=active.triggered_by, state="cleared")
                self.alerts[active.alert_id] = cleared
                del self.active_alerts[area]
                self._append("alert", cleared.to_dict())
            return None

        if active is not None and active.level == assessment.level:
            return active

        new = AlertRecord(
            alert_id=f"al-{area}-{int(assessment.timestamp.timestamp())}",
            area_id=area,
            level=assessment.level,
            percentage=assessment.percentage,
            created_at=assessment.timestamp,
            triggered_by=package_id,
        )
        if active is not None:
            superseded = AlertRecord(
                alert_id=active.alert_id, area_id=area, level=active.level,
                percentage=active.percentage, created_at=active.created_at,
                triggered_by=active.triggered_by,
                state="superseded", superseded_by=new.alert_id)
            self.alerts[active.alert_id] = superseded
            self._append("alert", superseded.to_dict())
        self.alerts[new.alert_id] = new
        self.active_alerts[area] = new.alert_id
        self._append("alert", new.to_dict())
        return new

    # ------------------------------------------------------------------
    # queries

    def area_summaries(self) -> list[dict]:
        with self._lock:
            out = []
            for area_id in sorted(self.areas):
                out.append(self.area_detail(area_id))
            return out

    def area_detail(self, area_id: str) -> dict:
        state = self._area(area_id, create=False)
        last = state.last_assessment
        active_id = self.active_alerts.get(area_id)
        decl = state.declaration
        return {
            "area_id": area_id,
            "level": state.current_level.name,
            "percentage": last.percentage if last else None,
            "last_assessment": last.to_dict() if last else None,
            "samples_today": len(state.history),
            "expected_period_s": self.controller.recommended_cycle_period(state.current_level),
            "active_alert": self.alerts[active_id].to_dict() if active_id else None,
            "declaration": None if decl is None else {
                "level": decl.level.name,
                "declared_at": int(decl.declared_at.timestamp()),
                "expires_at": int(decl.expires_at.timestamp()),
            },
            "recent": [a.to_dict() for a in self.assessment_tail.get(area_id, [])],
        }

    def measurements(self, area_id: str, since: datetime | None = None,
                     until: datetime | None = None, limit: int = 1000) -> list[dict]:
        state = self._area(area_id, create=False)
        out = []
        for m in state.history:
            if since is not None and m.timestamp < since:
                continue
            if until is not None and m.timestamp > until:
                continue
            out.append(m.to_dict())
            if len(out) >= limit:
                break
        return out

    def list_alerts(self, state_filter: str | None = None,
                    area_id: str | None = None) -> list[dict]:
        with self._lock:
            records = sorted(self.alerts.values(), key=lambda a: (a.created_at, a.alert_id))
        if state_filter:
            records = [a for a in records if a.state == state_filter]
        if area_id:
            records = [a for a in records if a.area_id == area_id]
        return [a.to_dict() for a in records]

    def stats(self) -> dict:
        with self._lock:
            return {
                "areas": len(self.areas),
                "accepted": self.accepted_count,
                "rejections": len(self.rejections),
                "rejection_log": list(self.rejections),
                "alerts_active": len(self.active_alerts),
                "log_seq": self.eventlog.last_seq,
            }

    # ------------------------------------------------------------------
    # internals

    def _area(self, area_id: str, create: bool = True) -> AreaState:
        state = self.areas.get(area_id)
        if state is None:
            if not create:
                raise KeyError(f"unknown area {area_id!r}")
            state = self.controller.new_area(area_id, self.area_tz)
            self.areas[area_id] = state
        return state

    def _remember_assessment(self, assessment: RiskAssessment, keep: int = 50) -> None:
        tail = self.assessment_tail.setdefault(assessment.area_id, [])
        tail.append(assessment)
        del tail[:-keep]

    def _prune_ledger(self, state: AreaState, now: datetime) -> None:
        today = str(state.local_date(now))
        stale = [pid for pid, day in self._seen_packages.items() if day < today]
        for pid in stale:
            del self._seen_packages[pid]

    def _append(self, kind: str, payload: dict) -> LogEntry:
        entry = self.eventlog.append(kind, payload)
        if self.publish is not None and kind in self.STREAM_KINDS:
            self.publish(entry)
        return entry

    # ------------------------------------------------------------------
    # startup recovery

    def _rebuild(self) -> None:
        """Replay the event log into fresh in-memory state.

        A trailing measurement with no matching assessment (crash
        between the two appends) is rewound: the sender never saw an
        acknowledgment, so it must be able to resubmit.
        """
        entries = self.eventlog.entries()
        pending: Measurement | None = None
        pending_pid = ""
        for entry in entries:
            kind, payload = entry.kind, entry.payload
            if kind == "measurement":
                pending = Measurement.from_dict(payload)
                pending_pid = payload.get("package_id", "")
            elif kind == "assessment":
                if pending is None:
                    log.warning("log seq %d: assessment without measurement", entry.seq)
                    continue
                state = self._area(pending.area_id)
                if state.history and state.local_date(pending.timestamp) != \
                        state.local_date(state.history[-1].timestamp):
                    self.controller.rollover(state)
                state.history.append(pending)
                state.current_level = RiskLevel.parse(payload["level"])
                assessment = _assessment_from_dict(payload)
                state.last_assessment = assessment
                self.accepted_count += 1
                self._remember_assessment(assessment)
                self._device_last_ts[pending.device_id] = pending.timestamp
                if pending_pid:
                    self._seen_packages[pending_pid] = str(state.local_date(pending.timestamp))
                self._prune_ledger(state, pending.timestamp)
                pending = None
            elif kind == "alert":
                record = _alert_from_dict(payload)
                self.alerts[record.alert_id] = record
                if record.state == "active":
                    self.active_alerts[record.area_id] = record.alert_id
                elif self.active_alerts.get(record.area_id) == record.alert_id:
                    del self.active_alerts[record.area_id]
            elif kind == "declaration":
                state = self._area(payload["area_id"])
                state.declaration = _declaration_from_dict(payload)
            elif kind == "frequency-change":
                setting = FrequencySetting(
                    device_id=payload["device_id"],
                    period_s=int(payload["period_s"]),
                    status=payload.get("status", "pending"))
                self.frequencies[setting.device_id] = setting
        if pending is not None:
            log.warning(
                "log ends with unassessed measurement (package %s); rewinding it",
                pending_pid or "?")
        log.info("rebuilt state from %d log entries: %d areas, %d alerts",
                 len(entries), len(self.areas), len(self.alerts))


def _assessment_from_dict(d: dict) -> RiskAssessment:
    return RiskAssessment(
        area_id=d["area_id"],
        timestamp=datetime.fromtimestamp(int(d["timestamp"]), tz=timezone.utc),
        percentage=float(d["percentage"]),
        level=RiskLevel.parse(d["level"]),
        window_used=d["window_used"],
        values=dict(d["values"]),
        averages=dict(d["averages"]),
        activations={v: dict(a) for v, a in d["activations"].items()},
        clamped=tuple(d.get("clamped", ())),
        declaration_active=bool(d.get("declaration_active", False)),
    )


def _alert_from_dict(d: dict) -> AlertRecord:
    return AlertRecord(
        alert_id=d["alert_id"],
        area_id=d["area_id"],
        level=RiskLevel.parse(d["level"]),
        percentage=float(d["percentage"]),
        created_at=datetime.fromtimestamp(int(d["created_at"]), tz=timezone.utc),
        triggered_by=d.get("triggered_by", ""),
        state=d.get("state", "active"),
        superseded_by=d.get("superseded_by"),
    )


def _declaration_from_dict(d: dict):
    from ..controller import Declaration
    return Declaration(
        level=RiskLevel.parse(d["level"]),
        declared_at=datetime.fromtimestamp(int(d["declared_at"]), tz=timezone.utc),
        expires_at=datetime.fromtimestamp(int(d["expires_at"]), tz=timezone.utc),
    )

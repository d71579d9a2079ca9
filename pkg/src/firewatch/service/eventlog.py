"""Append-only JSONL event log with replay-on-startup recovery.

Every accepted package, assessment, alert transition, declaration and
frequency change is appended as one JSON line with a monotonically
increasing sequence number.  On startup the log is replayed to rebuild
state; a corrupted tail (torn write from a crash) is truncated back to
the last parseable line with a loud warning rather than taken as data
loss of the whole log.
"""
from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

log = logging.getLogger(__name__)

KINDS = ("measurement", "assessment", "alert", "declaration", "frequency-change")


@dataclass(frozen=True)
class LogEntry:
    seq: int
    kind: str
    ts: float  # wall-clock append time, epoch seconds
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "ts": self.ts, "payload": self.payload},
            sort_keys=True, separators=(",", ":"),
        )

    @classmethod
    def parse(cls, line: str) -> "LogEntry":
        d = json.loads(line)
        if not isinstance(d, dict):
            raise ValueError("log line is not an object")
        entry = cls(seq=int(d["seq"]), kind=str(d["kind"]), ts=float(d["ts"]),
                    payload=d["payload"])
        if entry.kind not in KINDS:
            raise ValueError(f"unknown log kind {entry.kind!r}")
        if not isinstance(entry.payload, dict):
            raise ValueError("log payload is not an object")
        return entry


class EventLog:
    """Durable, sequence-numbered event journal.

    With ``path=None`` the log is memory-only (used by the offline
    simulator sink, where durability is meaningless).
    """

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._entries: list[LogEntry] = []
        self._fh = None
        if self.path is not None:
            self._entries = self._recover(self.path)
            self._fh = open(self.path, "a", encoding="utf-8")
        self._next_seq = (self._entries[-1].seq + 1) if self._entries else 1

    @staticmethod
    def _recover(path: Path) -> list[LogEntry]:
        if not path.exists():
            return []
        entries: list[LogEntry] = []
        good_bytes = 0
        with open(path, "rb") as fh:
            for lineno, raw_line in enumerate(fh, start=1):
                try:
                    entry = LogEntry.parse(raw_line.decode("utf-8"))
                except (ValueError, UnicodeDecodeError, KeyError) as exc:
                    log.warning(
                        "event log %s: corrupted tail at line %d (%s); "
                        "truncating to last valid entry", path, lineno, exc)
                    break
                if entries and entry.seq != entries[-1].seq + 1:
                    log.warning(
                        "event log %s: sequence break at line %d; truncating", path, lineno)
                    break
                entries.append(entry)
                good_bytes += len(raw_line)
            else:
                return entries
        with open(path, "rb+") as fh:
            fh.truncate(good_bytes)
        return entries

    def append(self, kind: str, payload: dict, ts: float | None = None) -> LogEntry:
        """Durably append one entry and return it (with its sequence)."""
        if kind not in KINDS:
            raise ValueError(f"unknown log kind {kind!r}")
        with self._lock:
            entry = LogEntry(
                seq=self._next_seq,
                kind=kind,
                ts=time.time() if ts is None else ts,
                payload=payload,
            )
            self._next_seq += 1
            self._entries.append(entry)
            if self._fh is not None:
                self._fh.write(entry.to_json() + "\n")
                self._fh.flush()
                os.fsync(self._fh.fileno())
        return entry

    def entries(self, since: int = 0, kinds: tuple[str, ...] | None = None) -> list[LogEntry]:
        """Entries with seq > ``since``, optionally filtered by kind."""
        with self._lock:
            snapshot = list(self._entries)
        out = [e for e in snapshot if e.seq > since]
        if kinds is not None:
            out = [e for e in out if e.kind in kinds]
        return out

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._entries[-1].seq if self._entries else 0

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __iter__(self) -> Iterator[LogEntry]:
        return iter(self.entries())

"""Append-only event-log persistence and the line format shared with analytics.

One event per line: ``{"at": ..., "kind": ..., "payload": {...}, "seq": ...}``
serialized with sorted keys and compact separators, so identical event
streams produce identical bytes. Sequence numbers are assigned here, under
the store's write lock, never by clients.
"""

from __future__ import annotations

import json
import os
import threading
from collections import defaultdict
from pathlib import Path
from typing import Iterable

from .core import Event, EventKind, QuotaPolicy, SessionState, StateAccumulator, now_ms
from .errors import ParseError, StorageError


def event_to_line(event: Event) -> str:
    return json.dumps(
        {"seq": event.seq, "at": event.at, "kind": event.kind.value, "payload": dict(event.payload)},
        sort_keys=True,
        separators=(",", ":"),
    )


def event_from_line(line: str, line_number: int | None = None) -> Event:
    try:
        doc = json.loads(line)
        return Event(
            seq=int(doc["seq"]),
            at=int(doc["at"]),
            kind=EventKind(doc["kind"]),
            payload=doc["payload"],
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        where = f" at line {line_number}" if line_number is not None else ""
        raise ParseError(f"bad event record{where}: {exc}", line_number) from exc


def read_event_log(path: str | Path) -> list[Event]:
    """Parse a JSONL event log; raises ParseError naming the offending line."""
    events = []
    with open(path) as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            events.append(event_from_line(line, number))
    return events


def write_event_log(path: str | Path, events: Iterable[Event]) -> None:
    with open(path, "w") as fh:
        for event in events:
            fh.write(event_to_line(event) + "\n")


class EventLogStore:
    """Durable, replayable telemetry store with atomic validated appends.

    Every append first folds the candidate event into the in-memory state
    (which enforces quota, consent, and ordering) and only then writes the
    line, all under one write lock: an event that would violate an invariant
    never reaches disk, and a delivery racing another one loses cleanly.
    """

    def __init__(self, path: str | Path, quota: QuotaPolicy = QuotaPolicy()):
        self._path = Path(path)
        self._quota = quota
        self._lock = threading.RLock()
        self._session_locks: dict[tuple[str, str], threading.Lock] = defaultdict(threading.Lock)
        self._accumulator = StateAccumulator(quota)
        self._events: list[Event] = []
        if self._path.exists():
            for event in read_event_log(self._path):
                self._accumulator.apply(event)
                self._events.append(event)
        else:
            self._path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self._path, "a")

    @property
    def quota(self) -> QuotaPolicy:
        return self._quota

    def append(self, kind: EventKind, payload: dict) -> Event:
        """Validate, persist, and apply one event; returns it with seq and at set."""
        with self._lock:
            event = Event(
                seq=self._accumulator.last_seq + 1,
                at=max(now_ms(), self._accumulator.last_at),  # monotone per log
                kind=kind,
                payload=payload,
            )
            self._accumulator.apply(event)  # raises before anything is written
            try:
                self._fh.write(event_to_line(event) + "\n")
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except OSError as exc:
                raise StorageError(f"cannot append to {self._path}: {exc}") from exc
            self._events.append(event)
            return event

    def state(self, student_id: str, question_id: str) -> SessionState:
        with self._lock:
            return self._accumulator.state(student_id, question_id)

    def sessions(self) -> dict[tuple[str, str], SessionState]:
        with self._lock:
            return dict(self._accumulator.sessions)

    def consented(self, student_id: str) -> bool:
        with self._lock:
            return student_id in self._accumulator.consented

    def find_hint(self, hint_id: str) -> tuple[str, str] | None:
        with self._lock:
            return self._accumulator.hint_index.get(hint_id)

    def events(self) -> list[Event]:
        with self._lock:
            return list(self._events)

    def session_lock(self, student_id: str, question_id: str) -> threading.Lock:
        """Keyed mutex serializing the quota-check-then-append flow per session."""
        with self._lock:
            return self._session_locks[(student_id, question_id)]

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

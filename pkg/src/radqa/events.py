"""Append-only JSON-lines event log with deterministic replay.

One JSON object per line: ``{"seq", "kind", "recorded_at", "payload"}``.
``seq`` is gapless from 1 and the file is never rewritten; superseding facts
(amended reports, amended adjudications) append new events. Replay validates
the chain and reports the offending ``seq`` on any gap or kind/payload
mismatch. A torn final line (crash mid-append) is tolerated and dropped: an
event only counts once durably appended.
"""
from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Union

from .domain import (
    Adjudication,
    AIFinding,
    ArmAssignment,
    NLPLabel,
    ReportDocument,
    StudyRecord,
    TriageItem,
    format_utc,
    parse_utc,
)
from .errors import CorruptLog


class EventKind(str, Enum):
    STUDY_ADDED = "STUDY_ADDED"
    AI_FINDING_ADDED = "AI_FINDING_ADDED"
    REPORT_ADDED = "REPORT_ADDED"
    ARM_ASSIGNED = "ARM_ASSIGNED"
    NLP_LABELED = "NLP_LABELED"
    TRIAGE_ENQUEUED = "TRIAGE_ENQUEUED"
    ADJUDICATED = "ADJUDICATED"


Payload = Union[StudyRecord, AIFinding, ReportDocument, ArmAssignment,
                NLPLabel, TriageItem, Adjudication]

PAYLOAD_TYPES: dict[EventKind, type] = {
    EventKind.STUDY_ADDED: StudyRecord,
    EventKind.AI_FINDING_ADDED: AIFinding,
    EventKind.REPORT_ADDED: ReportDocument,
    EventKind.ARM_ASSIGNED: ArmAssignment,
    EventKind.NLP_LABELED: NLPLabel,
    EventKind.TRIAGE_ENQUEUED: TriageItem,
    EventKind.ADJUDICATED: Adjudication,
}


@dataclass(frozen=True)
class Event:
    seq: int
    kind: EventKind
    payload: Payload
    recorded_at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "kind": self.kind.value,
            "recorded_at": format_utc(self.recorded_at),
            "payload": self.payload.to_dict(),
        }


def idempotency_key(kind: EventKind, payload: Payload) -> str:
    """Stable key for exactly-once state effects under at-least-once ingestion."""
    canonical = json.dumps(payload.to_dict(), sort_keys=True,
                           separators=(",", ":"), ensure_ascii=False)
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    return f"{kind.value}:{digest}"


def _event_from_line(seq_expected: int, line: str) -> Event:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLog(seq_expected, f"unparseable event line at seq {seq_expected}: {exc}")
    if not isinstance(raw, dict):
        raise CorruptLog(seq_expected, f"event at seq {seq_expected} is not an object")

    seq = raw.get("seq")
    if seq != seq_expected:
        raise CorruptLog(seq_expected,
                         f"seq gap: expected {seq_expected}, found {seq!r}")
    try:
        kind = EventKind(raw["kind"])
    except (KeyError, ValueError):
        raise CorruptLog(seq, f"unknown event kind at seq {seq}: {raw.get('kind')!r}")
    try:
        payload = PAYLOAD_TYPES[kind].from_dict(raw["payload"])
        recorded_at = parse_utc(raw["recorded_at"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptLog(seq, f"payload does not match kind {kind.value} at seq {seq}: {exc}")
    return Event(seq=seq, kind=kind, payload=payload, recorded_at=recorded_at)


def read_events(path: str | Path, *, tolerate_torn_tail: bool = True) -> list[Event]:
    """Read and validate a whole log; raises CorruptLog with the offending seq."""
    path = Path(path)
    if not path.exists():
        return []
    events: list[Event] = []
    with path.open("r", encoding="utf-8") as handle:
        lines = handle.read().split("\n")
    # A well-formed log ends with a newline; anything after the last newline
    # is an in-flight append that never completed.
    tail = lines.pop() if lines else ""
    stripped = [line for line in lines if line.strip()]
    for index, line in enumerate(stripped):
        events.append(_event_from_line(index + 1, line))
    if tail.strip():
        if not tolerate_torn_tail:
            raise CorruptLog(len(stripped) + 1, "torn final line")
    return events


class EventLog:
    """Single-writer appender. Events become visible to state only after the
    line is flushed (and fsynced, unless a deferred-sync batch is open)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("a", encoding="utf-8")
        self._defer_sync = False

    def append(self, event: Event) -> None:
        line = json.dumps(event.to_dict(), ensure_ascii=False)
        self._handle.write(line + "\n")
        self._handle.flush()
        if not self._defer_sync:
            os.fsync(self._handle.fileno())

    @contextmanager
    def deferred_sync(self) -> Iterator[None]:
        """Batch appends with a single fsync at the end (bulk file ingestion)."""
        self._defer_sync = True
        try:
            yield
        finally:
            self._defer_sync = False
            self._handle.flush()
            os.fsync(self._handle.fileno())

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.flush()
            os.fsync(self._handle.fileno())
            self._handle.close()

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()


def now_utc() -> datetime:
    return datetime.now(timezone.utc)

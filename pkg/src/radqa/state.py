"""Cohort state projection and the single-writer pipeline engine.

``CohortState`` is a pure fold over the event log: applying the same events
in the same order always reconstructs the same state, and applying an event
whose payload was already applied is a no-op (exactly-once effects under
at-least-once delivery).

``CohortEngine`` owns the log and all mutation. Ingesting a study, finding,
or report appends the raw event and then runs the derivation pipeline for
that study: arm assignment as soon as an AI-positive finding exists, NLP
labeling as soon as a report exists, and triage enqueueing once both machine
judgments are present and discordant within the configured review scope.
Derived timestamps come from the inputs (never the wall clock), so any
ingestion path or ordering produces a deep-equal state.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .classifier import classify_report
from .domain import (
    Adjudication,
    AIFinding,
    ArmAssignment,
    NLPLabel,
    ReportDocument,
    StudyRecord,
    TriageItem,
    TriageStatus,
)
from .errors import CorruptLog, QAError, RecordConflict
from .events import (
    Event,
    EventKind,
    EventLog,
    Payload,
    idempotency_key,
    now_utc,
    read_events,
)
from .lexicon import LexiconConfig, default_lexicon
from .randomizer import TrialConfig, assign_arm
from .triage import check_adjudication, concordance, enqueue_if_discordant


@dataclass
class CohortState:
    studies: dict[str, StudyRecord] = field(default_factory=dict)
    findings: dict[str, AIFinding] = field(default_factory=dict)
    reports: dict[str, ReportDocument] = field(default_factory=dict)
    labels: dict[str, NLPLabel] = field(default_factory=dict)
    assignments: dict[str, ArmAssignment] = field(default_factory=dict)
    triage: dict[str, TriageItem] = field(default_factory=dict)
    adjudications: dict[str, Adjudication] = field(default_factory=dict)
    applied: set[str] = field(default_factory=set)
    last_seq: int = 0

    def apply(self, event: Event) -> bool:
        """Fold one event into the state; False when its effect already happened."""
        key = idempotency_key(event.kind, event.payload)
        self.last_seq = max(self.last_seq, event.seq)
        if key in self.applied:
            return False
        payload = event.payload
        if event.kind is EventKind.STUDY_ADDED:
            self.studies[payload.study_id] = payload
        elif event.kind is EventKind.AI_FINDING_ADDED:
            self.findings[payload.study_id] = payload
        elif event.kind is EventKind.REPORT_ADDED:
            self.reports[payload.study_id] = payload
        elif event.kind is EventKind.ARM_ASSIGNED:
            self.assignments[payload.study_id] = payload
        elif event.kind is EventKind.NLP_LABELED:
            self.labels[payload.study_id] = payload
        elif event.kind is EventKind.TRIAGE_ENQUEUED:
            if payload.study_id not in self.triage:
                self.triage[payload.study_id] = payload
        elif event.kind is EventKind.ADJUDICATED:
            item = self.triage.get(payload.study_id)
            if item is None:
                raise QAError(
                    f"adjudication for {payload.study_id!r} without a triage item")
            self.adjudications[payload.study_id] = payload
            self.triage[payload.study_id] = dataclasses.replace(
                item, status=TriageStatus.ADJUDICATED)
        else:  # pragma: no cover - enum is closed
            raise QAError(f"unhandled event kind {event.kind}")
        self.applied.add(key)
        return True

    def snapshot(self) -> "CohortState":
        """Shallow copy for readers; payloads themselves are immutable."""
        return CohortState(
            studies=dict(self.studies),
            findings=dict(self.findings),
            reports=dict(self.reports),
            labels=dict(self.labels),
            assignments=dict(self.assignments),
            triage=dict(self.triage),
            adjudications=dict(self.adjudications),
            applied=set(self.applied),
            last_seq=self.last_seq,
        )


def replay(log_path: str | Path) -> CohortState:
    """Reconstruct state from a log; CorruptLog (with seq) on any defect."""
    state = CohortState()
    for event in read_events(log_path):
        try:
            state.apply(event)
        except QAError as exc:
            raise CorruptLog(event.seq, f"event {event.seq} cannot apply: {exc}")
    return state


class CohortEngine:
    """Owns the event log and every state mutation (one writer, many readers)."""

    def __init__(self, log: EventLog, state: CohortState, trial: TrialConfig,
                 lexicon: Optional[LexiconConfig] = None):
        self.log = log
        self.state = state
        self.trial = trial
        self.lexicon = lexicon or default_lexicon()

    @classmethod
    def open(cls, log_path: str | Path, trial: TrialConfig,
             lexicon: Optional[LexiconConfig] = None) -> "CohortEngine":
        state = replay(log_path)
        return cls(EventLog(log_path), state, trial, lexicon)

    def close(self) -> None:
        self.log.close()

    # -- event plumbing ----------------------------------------------------

    def _record(self, kind: EventKind, payload: Payload) -> None:
        event = Event(seq=self.state.last_seq + 1, kind=kind,
                      payload=payload, recorded_at=now_utc())
        self.log.append(event)
        self.state.apply(event)

    def _record_if_new(self, kind: EventKind, payload: Payload) -> bool:
        if idempotency_key(kind, payload) in self.state.applied:
            return False
        self._record(kind, payload)
        return True

    # -- ingestion ---------------------------------------------------------

    def ingest_study(self, record: StudyRecord) -> str:
        if idempotency_key(EventKind.STUDY_ADDED, record) in self.state.applied:
            return "duplicate"
        existing = self.state.studies.get(record.study_id)
        if existing is not None:
            raise RecordConflict(
                f"study {record.study_id!r} already ingested with a different payload")
        self._record(EventKind.STUDY_ADDED, record)
        return "accepted"

    def ingest_finding(self, finding: AIFinding) -> str:
        if idempotency_key(EventKind.AI_FINDING_ADDED, finding) in self.state.applied:
            return "duplicate"
        existing = self.state.findings.get(finding.study_id)
        if existing is not None:
            raise RecordConflict(
                f"finding for {finding.study_id!r} already ingested with a different payload")
        self._record(EventKind.AI_FINDING_ADDED, finding)
        self._derive(finding.study_id)
        return "accepted"

    def ingest_report(self, report: ReportDocument) -> str:
        if idempotency_key(EventKind.REPORT_ADDED, report) in self.state.applied:
            return "duplicate"
        existing = self.state.reports.get(report.study_id)
        if existing is not None and report.finalized_at <= existing.finalized_at:
            raise RecordConflict(
                f"report for {report.study_id!r} conflicts with an existing report "
                "and does not supersede it (finalized_at not later)")
        self._record(EventKind.REPORT_ADDED, report)
        self._derive(report.study_id)
        return "accepted"

    def adjudicate(self, adjudication: Adjudication, amend: bool = False) -> TriageItem:
        item = self.state.triage.get(adjudication.study_id)
        updated = check_adjudication(item, adjudication, amend)
        self._record(EventKind.ADJUDICATED, adjudication)
        return updated

    # -- derivation pipeline -------------------------------------------------

    def _derive(self, study_id: str) -> None:
        finding = self.state.findings.get(study_id)
        report = self.state.reports.get(study_id)

        if (finding is not None and finding.ai_positive
                and study_id not in self.state.assignments):
            assignment = assign_arm(study_id, self.trial, finding=finding)
            self._record(EventKind.ARM_ASSIGNED, assignment)

        if report is not None:
            label = classify_report(report, self.lexicon)
            self._record_if_new(EventKind.NLP_LABELED, label)

        label = self.state.labels.get(study_id)
        if finding is not None and label is not None:
            cls = concordance(finding.ai_positive, label.label)
            existing_item = self.state.triage.get(study_id)
            enqueued_at = max(finding.received_at, report.finalized_at) \
                if report is not None else finding.received_at
            item = enqueue_if_discordant(
                study_id, cls, self.trial.review_scope, existing_item, enqueued_at)
            if item is not None and existing_item is None:
                self._record(EventKind.TRIAGE_ENQUEUED, item)

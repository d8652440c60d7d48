"""Shared domain types: studies, machine judgments, triage records, and metrics.

Every value here is an immutable dataclass that round-trips losslessly through
``to_dict`` / ``from_dict`` (the JSON shapes used by the ingestion files, the
event log, and the HTTP API). Validation happens at construction time so that
a value, once built, satisfies its invariants everywhere it is shared.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable, Optional


# --------------------------------------------------------------------------
# Timestamps
# --------------------------------------------------------------------------

def parse_utc(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime.

    Naive timestamps are rejected: an offset (or ``Z``) is mandatory.
    """
    if not isinstance(value, str) or not value:
        raise ValueError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"invalid RFC 3339 timestamp {value!r}: {exc}") from None
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return stamp.astimezone(timezone.utc)


def format_utc(stamp: datetime) -> str:
    """Render an aware datetime as a canonical RFC 3339 string (``Z`` suffix)."""
    if stamp.tzinfo is None:
        raise ValueError("naive datetime cannot be serialized")
    return stamp.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


# --------------------------------------------------------------------------
# Enumerations
# --------------------------------------------------------------------------

class Polarity(str, Enum):
    AFFIRMED = "AFFIRMED"
    NEGATED = "NEGATED"
    UNCERTAIN = "UNCERTAIN"


class NLPLabelValue(str, Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


class ConcordanceClass(str, Enum):
    AI_POS_NLP_POS = "AI_POS_NLP_POS"
    AI_POS_NLP_NEG = "AI_POS_NLP_NEG"
    AI_NEG_NLP_POS = "AI_NEG_NLP_POS"
    AI_NEG_NLP_NEG = "AI_NEG_NLP_NEG"


DISCORDANT_CLASSES = frozenset(
    {ConcordanceClass.AI_POS_NLP_NEG, ConcordanceClass.AI_NEG_NLP_POS}
)


class TriageStatus(str, Enum):
    PENDING = "PENDING"
    ADJUDICATED = "ADJUDICATED"


class AdjudicationOutcome(str, Enum):
    TRUE_POSITIVE_MISSED = "TRUE_POSITIVE_MISSED"
    REPORTED_NLP_ERROR = "REPORTED_NLP_ERROR"
    AI_FALSE_POSITIVE = "AI_FALSE_POSITIVE"
    OTHER = "OTHER"


class RateBasis(str, Enum):
    AI_POSITIVE = "AI_POSITIVE"
    CONFIRMED_POSITIVE = "CONFIRMED_POSITIVE"


class ReviewScope(str, Enum):
    AI_POS_NLP_NEG_ONLY = "AI_POS_NLP_NEG_ONLY"
    ALL_DISCORDANT = "ALL_DISCORDANT"


# --------------------------------------------------------------------------
# Records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StudyRecord:
    """One imaging study, the unit of QA."""

    study_id: str
    acquired_at: datetime
    scanner_id: str
    exam_type: str

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be non-empty")
        _require(self.acquired_at.tzinfo is not None, "acquired_at must be UTC-aware")

    def to_dict(self) -> dict[str, Any]:
        return {
            "study_id": self.study_id,
            "acquired_at": format_utc(self.acquired_at),
            "scanner_id": self.scanner_id,
            "exam_type": self.exam_type,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StudyRecord":
        return cls(
            study_id=_str_field(data, "study_id"),
            acquired_at=parse_utc(_str_field(data, "acquired_at")),
            scanner_id=_str_field(data, "scanner_id"),
            exam_type=_str_field(data, "exam_type"),
        )


@dataclass(frozen=True)
class AIFinding:
    """Binary image-analysis verdict for one study.

    ``ai_positive`` is authoritative; ``ai_score`` is optional detail.
    ``flagged_override``, when present, pins the worklist arm regardless of
    the seeded hash (used by cohort files that must reproduce a known split).
    """

    study_id: str
    finding_code: str
    ai_positive: bool
    model_version: str
    received_at: datetime
    ai_score: Optional[float] = None
    flagged_override: Optional[bool] = None

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be non-empty")
        if self.ai_score is not None:
            _require(0.0 <= self.ai_score <= 1.0,
                     f"ai_score {self.ai_score} outside [0,1]")

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "study_id": self.study_id,
            "finding_code": self.finding_code,
            "ai_positive": self.ai_positive,
            "model_version": self.model_version,
            "received_at": format_utc(self.received_at),
        }
        if self.ai_score is not None:
            data["ai_score"] = self.ai_score
        if self.flagged_override is not None:
            data["flagged_override"] = self.flagged_override
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AIFinding":
        score = data.get("ai_score")
        if score is not None and not isinstance(score, (int, float)):
            raise ValueError(f"ai_score must be numeric, got {score!r}")
        override = data.get("flagged_override")
        if override is not None and not isinstance(override, bool):
            raise ValueError(f"flagged_override must be boolean, got {override!r}")
        return cls(
            study_id=_str_field(data, "study_id"),
            finding_code=_str_field(data, "finding_code"),
            ai_positive=_bool_field(data, "ai_positive"),
            model_version=_str_field(data, "model_version"),
            received_at=parse_utc(_str_field(data, "received_at")),
            ai_score=float(score) if score is not None else None,
            flagged_override=override,
        )


@dataclass(frozen=True)
class ReportDocument:
    """Final radiology report text for one study."""

    study_id: str
    text: str
    finalized_at: datetime

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be non-empty")
        _require(len(self.text) >= 1, "report text must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "study_id": self.study_id,
            "text": self.text,
            "finalized_at": format_utc(self.finalized_at),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ReportDocument":
        return cls(
            study_id=_str_field(data, "study_id"),
            text=_str_field(data, "text"),
            finalized_at=parse_utc(_str_field(data, "finalized_at")),
        )


@dataclass(frozen=True)
class EvidenceSpan:
    """One finding-term occurrence inside a report, with its polarity.

    ``start``/``end`` are UTF-8 byte offsets into the report text; the slice
    they address equals ``matched_term`` case-insensitively.
    """

    sentence_index: int
    start: int
    end: int
    matched_term: str
    polarity: Polarity

    def __post_init__(self) -> None:
        _require(self.sentence_index >= 0, "sentence_index must be >= 0")
        _require(0 <= self.start < self.end, "span must satisfy 0 <= start < end")

    def to_dict(self) -> dict[str, Any]:
        return {
            "sentence_index": self.sentence_index,
            "start": self.start,
            "end": self.end,
            "matched_term": self.matched_term,
            "polarity": self.polarity.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvidenceSpan":
        return cls(
            sentence_index=int(data["sentence_index"]),
            start=int(data["start"]),
            end=int(data["end"]),
            matched_term=_str_field(data, "matched_term"),
            polarity=Polarity(data["polarity"]),
        )


@dataclass(frozen=True)
class NLPLabel:
    """Report-classifier verdict plus its full evidence trail."""

    study_id: str
    label: NLPLabelValue
    evidence: tuple[EvidenceSpan, ...]
    classifier_version: str

    def __post_init__(self) -> None:
        positive = any(
            span.polarity in (Polarity.AFFIRMED, Polarity.UNCERTAIN)
            for span in self.evidence
        )
        expected = NLPLabelValue.POSITIVE if positive else NLPLabelValue.NEGATIVE
        _require(self.label is expected,
                 f"label {self.label.value} inconsistent with evidence polarities")

    @classmethod
    def from_evidence(cls, study_id: str, evidence: Iterable[EvidenceSpan],
                      classifier_version: str) -> "NLPLabel":
        spans = tuple(evidence)
        positive = any(
            span.polarity in (Polarity.AFFIRMED, Polarity.UNCERTAIN) for span in spans
        )
        return cls(
            study_id=study_id,
            label=NLPLabelValue.POSITIVE if positive else NLPLabelValue.NEGATIVE,
            evidence=spans,
            classifier_version=classifier_version,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "study_id": self.study_id,
            "label": self.label.value,
            "evidence": [span.to_dict() for span in self.evidence],
            "classifier_version": self.classifier_version,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NLPLabel":
        return cls(
            study_id=_str_field(data, "study_id"),
            label=NLPLabelValue(data["label"]),
            evidence=tuple(EvidenceSpan.from_dict(s) for s in data.get("evidence", [])),
            classifier_version=_str_field(data, "classifier_version"),
        )


@dataclass(frozen=True)
class ArmAssignment:
    """Flagged / non-flagged worklist arm for an AI-positive study.

    ``source`` records whether the bit came from the seeded hash or from an
    explicit ``flagged_override`` on the finding; only hash assignments are
    re-derivable from (trial_seed, study_id).
    """

    study_id: str
    flagged: bool
    trial_seed: str
    assigned_at: datetime
    source: str = "hash"

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be non-empty")
        _require(self.source in ("hash", "override"),
                 f"unknown assignment source {self.source!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "study_id": self.study_id,
            "flagged": self.flagged,
            "trial_seed": self.trial_seed,
            "assigned_at": format_utc(self.assigned_at),
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ArmAssignment":
        return cls(
            study_id=_str_field(data, "study_id"),
            flagged=_bool_field(data, "flagged"),
            trial_seed=str(data.get("trial_seed", "")),
            assigned_at=parse_utc(_str_field(data, "assigned_at")),
            source=str(data.get("source", "hash")),
        )


@dataclass(frozen=True)
class TriageItem:
    """A discordant case waiting for (or holding) an expert verdict."""

    study_id: str
    concordance: ConcordanceClass
    status: TriageStatus
    enqueued_at: datetime

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be non-empty")
        if self.concordance not in DISCORDANT_CLASSES:
            raise ValueError(
                f"triage item requires a discordant class, got {self.concordance.value}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "study_id": self.study_id,
            "concordance": self.concordance.value,
            "status": self.status.value,
            "enqueued_at": format_utc(self.enqueued_at),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TriageItem":
        return cls(
            study_id=_str_field(data, "study_id"),
            concordance=ConcordanceClass(data["concordance"]),
            status=TriageStatus(data["status"]),
            enqueued_at=parse_utc(_str_field(data, "enqueued_at")),
        )


@dataclass(frozen=True)
class Adjudication:
    """Expert verdict on a triaged case."""

    study_id: str
    reviewer_id: str
    outcome: AdjudicationOutcome
    decided_at: datetime
    note: Optional[str] = None

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be non-empty")
        _require(bool(self.reviewer_id), "reviewer_id must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "study_id": self.study_id,
            "reviewer_id": self.reviewer_id,
            "outcome": self.outcome.value,
            "decided_at": format_utc(self.decided_at),
        }
        if self.note is not None:
            data["note"] = self.note
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Adjudication":
        note = data.get("note")
        if note is not None and not isinstance(note, str):
            raise ValueError(f"note must be a string, got {note!r}")
        return cls(
            study_id=_str_field(data, "study_id"),
            reviewer_id=_str_field(data, "reviewer_id"),
            outcome=AdjudicationOutcome(data["outcome"]),
            decided_at=parse_utc(_str_field(data, "decided_at")),
            note=note,
        )


@dataclass(frozen=True)
class QAMetrics:
    """Arm-stratified QA summary for a fully adjudicated cohort."""

    cohort_size: int
    ai_positive_total: int
    flagged_count: int
    nonflagged_count: int
    queue_size: int
    missed_flagged: int
    missed_nonflagged: int
    missed_rate_flagged: float
    missed_rate_nonflagged: float
    rate_basis: RateBasis
    effort_reduction: float
    ci_flagged: tuple[float, float]
    ci_nonflagged: tuple[float, float]
    p_value: float

    def to_dict(self, ndigits: int | None = 6) -> dict[str, Any]:
        """JSON shape of the metrics; reals rounded to ``ndigits`` places.

        Rounding applies only at this serialization boundary; the object
        itself keeps full precision.
        """
        def real(x: float) -> float:
            return round(x, ndigits) if ndigits is not None else x

        return {
            "cohort_size": self.cohort_size,
            "ai_positive_total": self.ai_positive_total,
            "flagged_count": self.flagged_count,
            "nonflagged_count": self.nonflagged_count,
            "queue_size": self.queue_size,
            "missed_flagged": self.missed_flagged,
            "missed_nonflagged": self.missed_nonflagged,
            "missed_rate_flagged": real(self.missed_rate_flagged),
            "missed_rate_nonflagged": real(self.missed_rate_nonflagged),
            "rate_basis": self.rate_basis.value,
            "effort_reduction": real(self.effort_reduction),
            "ci_flagged": [real(self.ci_flagged[0]), real(self.ci_flagged[1])],
            "ci_nonflagged": [real(self.ci_nonflagged[0]), real(self.ci_nonflagged[1])],
            "p_value": real(self.p_value),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QAMetrics":
        return cls(
            cohort_size=int(data["cohort_size"]),
            ai_positive_total=int(data["ai_positive_total"]),
            flagged_count=int(data["flagged_count"]),
            nonflagged_count=int(data["nonflagged_count"]),
            queue_size=int(data["queue_size"]),
            missed_flagged=int(data["missed_flagged"]),
            missed_nonflagged=int(data["missed_nonflagged"]),
            missed_rate_flagged=float(data["missed_rate_flagged"]),
            missed_rate_nonflagged=float(data["missed_rate_nonflagged"]),
            rate_basis=RateBasis(data["rate_basis"]),
            effort_reduction=float(data["effort_reduction"]),
            ci_flagged=(float(data["ci_flagged"][0]), float(data["ci_flagged"][1])),
            ci_nonflagged=(float(data["ci_nonflagged"][0]), float(data["ci_nonflagged"][1])),
            p_value=float(data["p_value"]),
        )


# --------------------------------------------------------------------------
# Cohort validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    kind: str      # "study" | "finding" | "report"
    study_id: str
    message: str


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, kind: str, study_id: str, message: str) -> None:
        self.errors.append(ValidationIssue("error", kind, study_id, message))

    def warn(self, kind: str, study_id: str, message: str) -> None:
        self.warnings.append(ValidationIssue("warning", kind, study_id, message))


def validate_cohort(studies: Iterable[StudyRecord],
                    findings: Iterable[AIFinding],
                    reports: Iterable[ReportDocument]) -> ValidationReport:
    """Cross-check three parsed collections without mutating anything.

    Problems are reported, never thrown: duplicate study ids with conflicting
    payloads, findings/reports referencing unknown studies, and conflicting
    duplicate findings all land in the returned report.
    """
    out = ValidationReport()

    seen: dict[str, StudyRecord] = {}
    for study in studies:
        prior = seen.get(study.study_id)
        if prior is None:
            seen[study.study_id] = study
        elif prior == study:
            out.warn("study", study.study_id, "duplicate study record (identical payload)")
        else:
            out.error("study", study.study_id,
                      f"conflicting duplicate study record for {study.study_id!r}")

    seen_findings: dict[str, AIFinding] = {}
    for finding in findings:
        if finding.study_id not in seen:
            out.error("finding", finding.study_id,
                      f"finding references unknown study_id {finding.study_id!r}")
        prior_f = seen_findings.get(finding.study_id)
        if prior_f is None:
            seen_findings[finding.study_id] = finding
        elif prior_f == finding:
            out.warn("finding", finding.study_id, "duplicate finding (identical payload)")
        else:
            out.error("finding", finding.study_id,
                      f"conflicting duplicate finding for {finding.study_id!r}")

    seen_reports: dict[str, ReportDocument] = {}
    for report in reports:
        if report.study_id not in seen:
            out.error("report", report.study_id,
                      f"report references unknown study_id {report.study_id!r}")
        prior_r = seen_reports.get(report.study_id)
        if prior_r is None:
            seen_reports[report.study_id] = report
        elif prior_r == report:
            out.warn("report", report.study_id, "duplicate report (identical payload)")
        elif report.finalized_at > prior_r.finalized_at:
            seen_reports[report.study_id] = report
            out.warn("report", report.study_id,
                     "superseding report (later finalized_at)")
        else:
            out.error("report", report.study_id,
                      f"conflicting report for {report.study_id!r} without later finalized_at")

    return out


# --------------------------------------------------------------------------
# Field helpers
# --------------------------------------------------------------------------

def _str_field(data: dict[str, Any], key: str) -> str:
    if key not in data:
        raise ValueError(f"missing required field {key!r}")
    value = data[key]
    if not isinstance(value, str):
        raise ValueError(f"field {key!r} must be a string, got {value!r}")
    return value


def _bool_field(data: dict[str, Any], key: str) -> bool:
    if key not in data:
        raise ValueError(f"missing required field {key!r}")
    value = data[key]
    if not isinstance(value, bool):
        raise ValueError(f"field {key!r} must be a boolean, got {value!r}")
    return value

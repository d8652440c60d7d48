"""Exception hierarchy shared across the package."""
from __future__ import annotations


class QAError(Exception):
    """Base class for all domain errors."""


class RecordConflict(QAError):
    """Same identifier ingested twice with a different payload."""


class NotAIPositive(QAError):
    """Arm assignment requested for a study without an AI-positive finding."""


class EmptyLexicon(QAError):
    """Classification attempted with no finding terms configured."""


class UnknownItem(QAError):
    """Adjudication references a study with no triage item."""


class AlreadyAdjudicated(QAError):
    """Adjudication repeated without the amendment flag."""


class IncompleteAdjudication(QAError):
    """Metrics requested while triage items are still pending."""

    def __init__(self, pending: int, message: str | None = None):
        self.pending = pending
        super().__init__(message or f"{pending} triage items pending adjudication")


class ZeroDenominator(QAError):
    """Missed-rate denominator is zero for the requested arm/basis."""


class ZeroCohort(QAError):
    """Effort reduction requested for an empty cohort."""


class InvalidCounts(QAError):
    """Counts violate the preconditions of a statistical routine."""


class CorruptLog(QAError):
    """Event log failed replay validation (gap, kind or payload mismatch)."""

    def __init__(self, seq: int, message: str):
        self.seq = seq
        super().__init__(message)

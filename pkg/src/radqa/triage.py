"""Concordance classes and the discordant-case review queue.

Once a study has both machine judgments, its concordance class is fixed by a
2x2 mapping. Discordant classes inside the configured review scope become
PENDING triage items, exactly one per study; an expert adjudication flips the
item to ADJUDICATED. Amendments append a superseding verdict without ever
rewriting history (the event log keeps every version).
"""
from __future__ import annotations

from datetime import datetime
from typing import Iterable, Optional

from .domain import (
    DISCORDANT_CLASSES,
    Adjudication,
    ArmAssignment,
    ConcordanceClass,
    NLPLabelValue,
    ReviewScope,
    TriageItem,
    TriageStatus,
)
from .errors import AlreadyAdjudicated, UnknownItem


def concordance(ai_positive: bool, nlp_label: NLPLabelValue) -> ConcordanceClass:
    """The 2x2 mapping from (AI verdict, NLP verdict) to a concordance class."""
    if ai_positive:
        return (ConcordanceClass.AI_POS_NLP_POS
                if nlp_label is NLPLabelValue.POSITIVE
                else ConcordanceClass.AI_POS_NLP_NEG)
    return (ConcordanceClass.AI_NEG_NLP_POS
            if nlp_label is NLPLabelValue.POSITIVE
            else ConcordanceClass.AI_NEG_NLP_NEG)


def in_review_scope(cls: ConcordanceClass, scope: ReviewScope) -> bool:
    if cls not in DISCORDANT_CLASSES:
        return False
    if scope is ReviewScope.AI_POS_NLP_NEG_ONLY:
        return cls is ConcordanceClass.AI_POS_NLP_NEG
    return True


def enqueue_if_discordant(study_id: str, cls: ConcordanceClass, scope: ReviewScope,
                          existing: Optional[TriageItem],
                          enqueued_at: datetime) -> Optional[TriageItem]:
    """PENDING item for a discordant in-scope case; idempotent.

    Returns the existing item unchanged when the study is already queued,
    a new PENDING item when it should be, and None when out of scope.
    """
    if existing is not None:
        return existing
    if not in_review_scope(cls, scope):
        return None
    return TriageItem(
        study_id=study_id,
        concordance=cls,
        status=TriageStatus.PENDING,
        enqueued_at=enqueued_at,
    )


def check_adjudication(item: Optional[TriageItem], adjudication: Adjudication,
                       amend: bool = False) -> TriageItem:
    """Validate a verdict against the queue and return the adjudicated item.

    Raises UnknownItem when the study has no triage item and
    AlreadyAdjudicated when the item is closed and ``amend`` is not set.
    """
    if item is None:
        raise UnknownItem(f"no triage item for study {adjudication.study_id!r}")
    if item.status is TriageStatus.ADJUDICATED and not amend:
        raise AlreadyAdjudicated(f"study {adjudication.study_id!r} already adjudicated")
    return TriageItem(
        study_id=item.study_id,
        concordance=item.concordance,
        status=TriageStatus.ADJUDICATED,
        enqueued_at=item.enqueued_at,
    )


def pending_queue(triage: dict[str, TriageItem],
                  assignments: dict[str, ArmAssignment],
                  arm: Optional[str] = None,
                  concordance_class: Optional[ConcordanceClass] = None
                  ) -> list[TriageItem]:
    """PENDING items ordered by (enqueued_at, study_id), optionally filtered.

    ``arm`` is "flagged" or "nonflagged"; filtering by arm drops items whose
    study has no assignment (AI-negative discordant cases have none).
    """
    if arm not in (None, "flagged", "nonflagged"):
        raise ValueError(f"unknown arm filter {arm!r}")
    items = [item for item in triage.values() if item.status is TriageStatus.PENDING]
    if concordance_class is not None:
        items = [item for item in items if item.concordance is concordance_class]
    if arm is not None:
        want_flagged = arm == "flagged"
        items = [
            item for item in items
            if (a := assignments.get(item.study_id)) is not None
            and a.flagged == want_flagged
        ]
    items.sort(key=lambda item: (item.enqueued_at, item.study_id))
    return items


def outcome_tally(adjudications: Iterable[Adjudication]) -> dict[str, int]:
    """Count of adjudications per outcome value."""
    tally: dict[str, int] = {}
    for adj in adjudications:
        tally[adj.outcome.value] = tally.get(adj.outcome.value, 0) + 1
    return tally

"""Independent reference implementations used only to check the real ones.

Nothing here imports from the package's stats or classifier internals beyond
domain enums; each oracle takes the slow-but-obvious route (exact rational
enumeration, naive recounting) so a bug in the production path cannot hide in
a shared helper.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

from radqa.domain import AdjudicationOutcome, NLPLabelValue
from radqa.events import Event, EventKind


def fisher_oracle(a: int, b: int, c: int, d: int) -> float:
    """Two-sided Fisher exact p by direct hypergeometric enumeration.

    Probabilities are exact rationals; the mass rule uses exact comparison.
    """
    row1, row2 = a + b, c + d
    col1 = a + c
    n = row1 + row2
    denominator = comb(n, col1)
    lo = max(0, col1 - row2)
    hi = min(row1, col1)
    probabilities = {
        x: Fraction(comb(row1, x) * comb(row2, col1 - x), denominator)
        for x in range(lo, hi + 1)
    }
    observed = probabilities[a]
    return float(sum(p for p in probabilities.values() if p <= observed))


def hypergeom_mean_var(population: int, successes: int, draws: int) -> tuple[float, float]:
    """Mean and variance of detected successes when sampling without replacement."""
    p = Fraction(successes, population)
    mean = draws * p
    if population == 1:
        return float(mean), 0.0
    var = draws * p * (1 - p) * Fraction(population - draws, population - 1)
    return float(mean), float(var)


def recount_metrics_from_events(events: list[Event]) -> dict:
    """Brute-force recount of every QA count straight from the raw event list."""
    studies: set[str] = set()
    ai_positive: set[str] = set()
    flagged: set[str] = set()
    assigned: set[str] = set()
    labels: dict[str, str] = {}
    queued: set[str] = set()
    outcomes: dict[str, str] = {}

    for event in events:
        payload = event.payload
        if event.kind is EventKind.STUDY_ADDED:
            studies.add(payload.study_id)
        elif event.kind is EventKind.AI_FINDING_ADDED:
            if payload.ai_positive:
                ai_positive.add(payload.study_id)
        elif event.kind is EventKind.ARM_ASSIGNED:
            assigned.add(payload.study_id)
            if payload.flagged:
                flagged.add(payload.study_id)
        elif event.kind is EventKind.NLP_LABELED:
            labels[payload.study_id] = payload.label.value
        elif event.kind is EventKind.TRIAGE_ENQUEUED:
            queued.add(payload.study_id)
        elif event.kind is EventKind.ADJUDICATED:
            outcomes[payload.study_id] = payload.outcome.value

    arm_flagged = ai_positive & flagged
    arm_nonflagged = ai_positive & (assigned - flagged)
    missed = {sid for sid, out in outcomes.items()
              if out == AdjudicationOutcome.TRUE_POSITIVE_MISSED.value}

    def confirmed(arm: set[str]) -> int:
        count = 0
        for sid in arm:
            if labels.get(sid) == NLPLabelValue.POSITIVE.value:
                count += 1
            elif outcomes.get(sid) in (
                AdjudicationOutcome.TRUE_POSITIVE_MISSED.value,
                AdjudicationOutcome.REPORTED_NLP_ERROR.value,
            ):
                count += 1
        return count

    return {
        "cohort_size": len(studies),
        "ai_positive_total": len(ai_positive),
        "flagged_count": len(arm_flagged),
        "nonflagged_count": len(arm_nonflagged),
        "queue_size": len(queued),
        "missed_flagged": len(missed & arm_flagged),
        "missed_nonflagged": len(missed & arm_nonflagged),
        "confirmed_flagged": confirmed(arm_flagged),
        "confirmed_nonflagged": confirmed(arm_nonflagged),
        "effort_reduction": float(1 - Fraction(len(queued), len(studies))),
    }

"""Arm-stratified QA metrics: missed rates, effort reduction, Wilson CIs,
and a two-sided Fisher exact test.

All routines are pure computations over an immutable cohort snapshot. The
Fisher test uses the probability-mass rule (sum of all tables, under fixed
margins, whose probability does not exceed the observed table's within a
1e-12 relative tolerance) with log-factorial arithmetic, not tail doubling.
"""
from __future__ import annotations

import math
from typing import TYPE_CHECKING

from .domain import (
    AdjudicationOutcome,
    NLPLabelValue,
    QAMetrics,
    RateBasis,
    TriageStatus,
)
from .errors import (
    IncompleteAdjudication,
    InvalidCounts,
    ZeroCohort,
    ZeroDenominator,
)

if TYPE_CHECKING:
    from .randomizer import TrialConfig
    from .state import CohortState

_ARMS = ("flagged", "nonflagged")


def _arm_study_ids(state: "CohortState", arm: str) -> list[str]:
    if arm not in _ARMS:
        raise ValueError(f"unknown arm {arm!r}")
    want_flagged = arm == "flagged"
    return [
        study_id
        for study_id, finding in state.findings.items()
        if finding.ai_positive
        and (a := state.assignments.get(study_id)) is not None
        and a.flagged == want_flagged
    ]


def _pending_in(state: "CohortState", study_ids: list[str]) -> int:
    ids = set(study_ids)
    return sum(
        1 for item in state.triage.values()
        if item.status is TriageStatus.PENDING and item.study_id in ids
    )


def _missed_in(state: "CohortState", study_ids: list[str]) -> int:
    ids = set(study_ids)
    return sum(
        1 for adj in state.adjudications.values()
        if adj.outcome is AdjudicationOutcome.TRUE_POSITIVE_MISSED
        and adj.study_id in ids
    )


def _denominator(state: "CohortState", study_ids: list[str], basis: RateBasis) -> int:
    if basis is RateBasis.AI_POSITIVE:
        return len(study_ids)
    # CONFIRMED_POSITIVE: reported NLP-positive cases plus adjudicated true
    # misses plus cases the report did mention but the classifier missed.
    confirmed = 0
    for study_id in study_ids:
        label = state.labels.get(study_id)
        if label is not None and label.label is NLPLabelValue.POSITIVE:
            confirmed += 1
            continue
        adj = state.adjudications.get(study_id)
        if adj is not None and adj.outcome in (
            AdjudicationOutcome.TRUE_POSITIVE_MISSED,
            AdjudicationOutcome.REPORTED_NLP_ERROR,
        ):
            confirmed += 1
    return confirmed


def missed_rate(arm: str, state: "CohortState",
                basis: RateBasis = RateBasis.AI_POSITIVE) -> float:
    """Missed true-positive rate for one arm under the chosen denominator.

    Requires every triage item in the arm to be adjudicated
    (IncompleteAdjudication otherwise); raises ZeroDenominator when the arm
    has no qualifying cases.
    """
    study_ids = _arm_study_ids(state, arm)
    pending = _pending_in(state, study_ids)
    if pending:
        raise IncompleteAdjudication(pending)
    denominator = _denominator(state, study_ids, basis)
    if denominator == 0:
        raise ZeroDenominator(f"arm {arm!r} has denominator 0 under basis {basis.value}")
    return _missed_in(state, study_ids) / denominator


def effort_reduction(queue_size: int, cohort_size: int) -> float:
    """Fraction of the cohort excluded from human review: 1 - queue/cohort."""
    if cohort_size <= 0:
        raise ZeroCohort("cohort_size must be > 0")
    if queue_size < 0:
        raise InvalidCounts("queue_size must be >= 0")
    return 1.0 - queue_size / cohort_size


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if not (0 <= successes <= n) or n <= 0 or z <= 0:
        raise InvalidCounts(
            f"wilson_interval requires 0 <= successes <= n, n > 0, z > 0; "
            f"got successes={successes}, n={n}, z={z}")
    p_hat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2 * n)) / denom
    halfwidth = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4 * n * n)) / denom
    return (max(0.0, center - halfwidth), min(1.0, center + halfwidth))


def fisher_exact_2x2(a: int, b: int, c: int, d: int) -> float:
    """Two-sided Fisher exact p for the table [[a, b], [c, d]].

    Sums hypergeometric probabilities, over all tables with the observed
    margins, of every table at most as probable as the observed one (within
    1e-12 relative tolerance). Probabilities use log-factorials.
    """
    for value in (a, b, c, d):
        if not isinstance(value, int) or value < 0:
            raise InvalidCounts(f"counts must be non-negative integers, got {(a, b, c, d)}")
    n = a + b + c + d
    if n == 0:
        raise InvalidCounts("at least one margin must be positive")

    row1 = a + b
    col1 = a + c
    row2 = n - row1

    def log_choose(total: int, k: int) -> float:
        return (math.lgamma(total + 1) - math.lgamma(k + 1)
                - math.lgamma(total - k + 1))

    log_total = log_choose(n, col1)

    def log_prob(x: int) -> float:
        return log_choose(row1, x) + log_choose(row2, col1 - x) - log_total

    lo = max(0, col1 - row2)
    hi = min(row1, col1)
    log_observed = log_prob(a)
    threshold = log_observed + math.log1p(1e-12)
    p = 0.0
    for x in range(lo, hi + 1):
        lp = log_prob(x)
        if lp <= threshold:
            p += math.exp(lp)
    return min(p, 1.0)


def compute_metrics(state: "CohortState", config: "TrialConfig",
                    z: float = 1.96) -> QAMetrics:
    """Assemble the full QA summary for a fully adjudicated cohort.

    The p-value comes from the 2x2 table (missed, not-missed) x (flagged,
    non-flagged) with denominators under the configured rate basis. Arms with
    a zero denominator report rate 0.0 and the vacuous interval (0, 1) rather
    than erroring, so degenerate cohorts (no AI-positive cases) still produce
    a summary.
    """
    pending_total = sum(
        1 for item in state.triage.values() if item.status is TriageStatus.PENDING
    )
    if pending_total:
        raise IncompleteAdjudication(pending_total)

    cohort_size = len(state.studies)
    if cohort_size == 0:
        raise ZeroCohort("cohort has no studies")

    basis = config.rate_basis
    counts: dict[str, dict[str, int]] = {}
    rates: dict[str, float] = {}
    intervals: dict[str, tuple[float, float]] = {}
    for arm in _ARMS:
        study_ids = _arm_study_ids(state, arm)
        missed = _missed_in(state, study_ids)
        denominator = _denominator(state, study_ids, basis)
        counts[arm] = {
            "ai_positive": len(study_ids),
            "missed": missed,
            "denominator": denominator,
        }
        if denominator > 0:
            rates[arm] = missed / denominator
            intervals[arm] = wilson_interval(missed, denominator, z)
        else:
            rates[arm] = 0.0
            intervals[arm] = (0.0, 1.0)

    table = (
        counts["flagged"]["missed"],
        counts["flagged"]["denominator"] - counts["flagged"]["missed"],
        counts["nonflagged"]["missed"],
        counts["nonflagged"]["denominator"] - counts["nonflagged"]["missed"],
    )
    p_value = 1.0 if sum(table) == 0 else fisher_exact_2x2(*table)

    queue_size = len(state.triage)
    return QAMetrics(
        cohort_size=cohort_size,
        ai_positive_total=sum(1 for f in state.findings.values() if f.ai_positive),
        flagged_count=counts["flagged"]["ai_positive"],
        nonflagged_count=counts["nonflagged"]["ai_positive"],
        queue_size=queue_size,
        missed_flagged=counts["flagged"]["missed"],
        missed_nonflagged=counts["nonflagged"]["missed"],
        missed_rate_flagged=rates["flagged"],
        missed_rate_nonflagged=rates["nonflagged"],
        rate_basis=basis,
        effort_reduction=effort_reduction(queue_size, cohort_size),
        ci_flagged=intervals["flagged"],
        ci_nonflagged=intervals["nonflagged"],
        p_value=p_value,
    )


def render_metrics_table(metrics: QAMetrics) -> str:
    """Aligned plain-text rendering; rates as percentages with 4 decimals."""
    def pct(x: float) -> str:
        return f"{100.0 * x:.4f}%"

    rows = [
        ("cohort_size", str(metrics.cohort_size)),
        ("ai_positive_total", str(metrics.ai_positive_total)),
        ("flagged_count", str(metrics.flagged_count)),
        ("nonflagged_count", str(metrics.nonflagged_count)),
        ("queue_size", str(metrics.queue_size)),
        ("rate_basis", metrics.rate_basis.value),
        ("missed_flagged", str(metrics.missed_flagged)),
        ("missed_nonflagged", str(metrics.missed_nonflagged)),
        ("missed_rate_flagged", pct(metrics.missed_rate_flagged)),
        ("missed_rate_nonflagged", pct(metrics.missed_rate_nonflagged)),
        ("ci95_flagged", f"[{pct(metrics.ci_flagged[0])}, {pct(metrics.ci_flagged[1])}]"),
        ("ci95_nonflagged",
         f"[{pct(metrics.ci_nonflagged[0])}, {pct(metrics.ci_nonflagged[1])}]"),
        ("effort_reduction", pct(metrics.effort_reduction)),
        ("p_value", f"{metrics.p_value:.4f}"),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)

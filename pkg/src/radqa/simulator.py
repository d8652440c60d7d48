"""Synthetic cohort generation and the random-review baseline.

Two generators share one template bank:

- ``generate_cohort`` draws a parameterized random cohort (seeded, so the
  output files are byte-identical run to run). Report texts are synthesized
  from template sentences consistent with the intended label, using phrases
  from the default lexicon, so the real classifier reproduces the sidecar's
  intended labels by construction.
- ``write_fixture_cohort`` emits the bundled demonstration cohort with fixed
  counts (1936 studies, 381 AI-positive of which 190 flagged, 29 discordant
  queue cases, 6 true missed findings split 1 flagged / 5 non-flagged). It is
  fully deterministic: roles are laid out by index, no RNG involved.

``random_review_baseline`` Monte-Carlos the conventional QA alternative:
review a uniform random sample of the cohort and count how many of the truly
missed findings the sample happens to contain.
"""
from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Iterable, Optional

from .domain import AdjudicationOutcome, NLPLabelValue

STUDIES_FILE = "studies.jsonl"
FINDINGS_FILE = "findings.jsonl"
REPORTS_FILE = "reports.jsonl"
SIDECAR_FILE = "sidecar.jsonl"
ADJUDICATIONS_FILE = "adjudications.jsonl"

FIXTURE_COHORT = 1936
FIXTURE_AI_POSITIVE = 381
FIXTURE_FLAGGED = 190
FIXTURE_QUEUE = 29
FIXTURE_MISSED_FLAGGED = 1
FIXTURE_MISSED_NONFLAGGED = 5
FIXTURE_NLP_ERRORS = 6

_EXAM_TYPE = "HEAD_CT_NONCONTRAST"
_MODEL_VERSION = "img-ai-1.2"
_REVIEWER = "neurorad-01"

_LOCATIONS = (
    "left frontal lobe",
    "right parietal lobe",
    "left convexity",
    "right temporal lobe",
    "posterior fossa",
)

_AFFIRMED_TERMS = (
    "subdural hematoma",
    "subarachnoid hemorrhage",
    "intraparenchymal hemorrhage",
    "epidural hematoma",
    "intraventricular hemorrhage",
)

_AFFIRMED_TEMPLATES = (
    "FINDINGS: Acute {term} in the {loc}. IMPRESSION: Acute {term}.",
    "FINDINGS: There is an acute {term} along the {loc}. "
    "IMPRESSION: Acute {term}, new from prior.",
    "FINDINGS: Interval increase in the {term} overlying the {loc}. "
    "IMPRESSION: Enlarging {term}.",
)

_NEGATED_TEMPLATES = (
    "FINDINGS: No acute intracranial hemorrhage. "
    "IMPRESSION: No acute intracranial abnormality.",
    "FINDINGS: No evidence of {term}. IMPRESSION: No acute hemorrhage.",
    "FINDINGS: Stable exam without {term}. "
    "IMPRESSION: No acute intracranial process.",
)

# Reports that affirm the finding in words the lexicon does not cover; the
# classifier reads these NEGATIVE, which is the point (NLP false negatives).
_NLP_MISS_TEMPLATES = (
    "FINDINGS: Focal area of acute intracranial bleeding in the {loc}. "
    "IMPRESSION: Acute intracranial bleeding.",
    "FINDINGS: Hyperdense extra-axial collection along the {loc} consistent "
    "with acute blood products. IMPRESSION: Extra-axial blood products.",
)


@dataclass(frozen=True)
class SimParams:
    """Frequencies steering the random generator.

    ``nlp_error_rate`` is carved out of AI-positive cases first (report
    affirms the finding but in out-of-lexicon words); of the remainder,
    ``nlp_neg_given_ai_pos`` end with a negative report, and those split into
    true misses (per-arm miss probability) versus AI false positives.
    """

    n_studies: int
    ai_positive_rate: float
    nlp_neg_given_ai_pos: float
    miss_prob_flagged: float
    miss_prob_nonflagged: float
    nlp_error_rate: float
    seed: str

    def __post_init__(self) -> None:
        if self.n_studies < 1:
            raise ValueError("n_studies must be >= 1")
        for name in ("ai_positive_rate", "nlp_neg_given_ai_pos", "miss_prob_flagged",
                     "miss_prob_nonflagged", "nlp_error_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0,1]")
        if not self.seed:
            raise ValueError("seed must be non-empty")


@dataclass(frozen=True)
class CohortFiles:
    directory: Path

    @property
    def studies(self) -> Path:
        return self.directory / STUDIES_FILE

    @property
    def findings(self) -> Path:
        return self.directory / FINDINGS_FILE

    @property
    def reports(self) -> Path:
        return self.directory / REPORTS_FILE

    @property
    def sidecar(self) -> Path:
        return self.directory / SIDECAR_FILE

    @property
    def adjudications(self) -> Path:
        return self.directory / ADJUDICATIONS_FILE


def _stamp(base: datetime, offset_seconds: int) -> str:
    return (base + timedelta(seconds=offset_seconds)).isoformat().replace("+00:00", "Z")


def _write_jsonl(path: Path, records: Iterable[dict[str, Any]]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


@dataclass
class _Case:
    index: int
    study_id: str
    ai_positive: bool
    flagged: Optional[bool]
    intended_nlp_label: NLPLabelValue
    truly_positive: bool
    intended_outcome: Optional[AdjudicationOutcome]
    text: str
    ai_score: float


def _emit(directory: str | Path, cases: list[_Case], base: datetime,
          spacing_seconds: int) -> CohortFiles:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = CohortFiles(directory)

    _write_jsonl(files.studies, (
        {
            "study_id": case.study_id,
            "acquired_at": _stamp(base, case.index * spacing_seconds),
            "scanner_id": "CT-A" if case.index % 2 == 0 else "CT-B",
            "exam_type": _EXAM_TYPE,
        }
        for case in cases
    ))

    def finding(case: _Case) -> dict[str, Any]:
        record: dict[str, Any] = {
            "study_id": case.study_id,
            "finding_code": "ICH",
            "ai_positive": case.ai_positive,
            "ai_score": case.ai_score,
            "model_version": _MODEL_VERSION,
            "received_at": _stamp(base, case.index * spacing_seconds + 300),
        }
        if case.flagged is not None:
            record["flagged_override"] = case.flagged
        return record

    _write_jsonl(files.findings, (finding(case) for case in cases))

    _write_jsonl(files.reports, (
        {
            "study_id": case.study_id,
            "text": case.text,
            "finalized_at": _stamp(base, case.index * spacing_seconds + 7200),
        }
        for case in cases
    ))

    _write_jsonl(files.sidecar, (
        {
            "study_id": case.study_id,
            "ai_positive": case.ai_positive,
            "flagged": case.flagged,
            "intended_nlp_label": case.intended_nlp_label.value,
            "truly_positive": case.truly_positive,
            "intended_outcome":
                case.intended_outcome.value if case.intended_outcome else None,
        }
        for case in cases
    ))

    decided = _stamp(base, len(cases) * spacing_seconds + 14 * 86400)
    _write_jsonl(files.adjudications, (
        {
            "study_id": case.study_id,
            "reviewer_id": _REVIEWER,
            "outcome": case.intended_outcome.value,
            "decided_at": decided,
        }
        for case in cases if case.intended_outcome is not None
    ))

    return files


# --------------------------------------------------------------------------
# Random cohorts
# --------------------------------------------------------------------------

def generate_cohort(params: SimParams, out_dir: str | Path) -> CohortFiles:
    """Write a seeded random cohort; identical params give identical bytes."""
    rng = random.Random(f"{params.seed}:cohort")
    base = datetime(2024, 1, 1, tzinfo=timezone.utc)
    cases: list[_Case] = []

    for index in range(params.n_studies):
        study_id = f"SIM-{index + 1:06d}"
        ai_positive = rng.random() < params.ai_positive_rate
        flagged: Optional[bool] = None
        outcome: Optional[AdjudicationOutcome] = None
        truly_positive = False

        if ai_positive:
            flagged = rng.random() < 0.5
            miss_prob = (params.miss_prob_flagged if flagged
                         else params.miss_prob_nonflagged)
            if rng.random() < params.nlp_error_rate:
                label = NLPLabelValue.NEGATIVE
                truly_positive = True
                outcome = AdjudicationOutcome.REPORTED_NLP_ERROR
                text = _fill(rng, _NLP_MISS_TEMPLATES)
            elif rng.random() < params.nlp_neg_given_ai_pos:
                label = NLPLabelValue.NEGATIVE
                if rng.random() < miss_prob:
                    truly_positive = True
                    outcome = AdjudicationOutcome.TRUE_POSITIVE_MISSED
                else:
                    outcome = AdjudicationOutcome.AI_FALSE_POSITIVE
                text = _fill(rng, _NEGATED_TEMPLATES)
            else:
                label = NLPLabelValue.POSITIVE
                truly_positive = True
                text = _fill(rng, _AFFIRMED_TEMPLATES)
            score = round(0.55 + 0.44 * rng.random(), 3)
        else:
            label = NLPLabelValue.NEGATIVE
            text = _fill(rng, _NEGATED_TEMPLATES)
            score = round(0.44 * rng.random(), 3)

        cases.append(_Case(
            index=index,
            study_id=study_id,
            ai_positive=ai_positive,
            flagged=flagged,
            intended_nlp_label=label,
            truly_positive=truly_positive,
            intended_outcome=outcome,
            text=text,
            ai_score=score,
        ))

    return _emit(out_dir, cases, base, spacing_seconds=120)


def _fill(rng: random.Random, templates: tuple[str, ...]) -> str:
    template = rng.choice(templates)
    return template.format(term=rng.choice(_AFFIRMED_TERMS), loc=rng.choice(_LOCATIONS))


# --------------------------------------------------------------------------
# Fixture cohort (fixed counts)
# --------------------------------------------------------------------------

def write_fixture_cohort(out_dir: str | Path) -> CohortFiles:
    """Deterministic demonstration cohort with the fixed counts above.

    Layout by 1-based position: studies 1-190 are AI-positive flagged
    (override), 191-381 AI-positive non-flagged, the rest AI-negative.
    Within the flagged arm: 1-3 report the finding in out-of-lexicon words
    (REPORTED_NLP_ERROR), 4 is a true missed finding, 5-13 are AI false
    positives; within the non-flagged arm: 191-193 NLP errors, 194-198 true
    missed findings, 199-206 AI false positives. Everything else is
    concordant.
    """
    base = datetime(2024, 3, 1, 6, 0, tzinfo=timezone.utc)
    cases: list[_Case] = []

    for position in range(1, FIXTURE_COHORT + 1):
        index = position - 1
        study_id = f"QA-{position:05d}"
        ai_positive = position <= FIXTURE_AI_POSITIVE
        flagged: Optional[bool] = None
        outcome: Optional[AdjudicationOutcome] = None
        truly_positive = False

        if ai_positive:
            flagged = position <= FIXTURE_FLAGGED
            if position in (1, 2, 3, 191, 192, 193):
                label = NLPLabelValue.NEGATIVE
                truly_positive = True
                outcome = AdjudicationOutcome.REPORTED_NLP_ERROR
                text = _cycle(index, _NLP_MISS_TEMPLATES)
            elif position == 4 or 194 <= position <= 198:
                label = NLPLabelValue.NEGATIVE
                truly_positive = True
                outcome = AdjudicationOutcome.TRUE_POSITIVE_MISSED
                text = _cycle(index, _NEGATED_TEMPLATES)
            elif 5 <= position <= 13 or 199 <= position <= 206:
                label = NLPLabelValue.NEGATIVE
                outcome = AdjudicationOutcome.AI_FALSE_POSITIVE
                text = _cycle(index, _NEGATED_TEMPLATES)
            else:
                label = NLPLabelValue.POSITIVE
                truly_positive = True
                text = _cycle(index, _AFFIRMED_TEMPLATES)
            score = round(0.60 + 0.39 * ((position * 37) % 100) / 100.0, 3)
        else:
            label = NLPLabelValue.NEGATIVE
            text = _cycle(index, _NEGATED_TEMPLATES)
            score = round(0.40 * ((position * 37) % 100) / 100.0, 3)

        cases.append(_Case(
            index=index,
            study_id=study_id,
            ai_positive=ai_positive,
            flagged=flagged,
            intended_nlp_label=label,
            truly_positive=truly_positive,
            intended_outcome=outcome,
            text=text,
            ai_score=score,
        ))

    return _emit(out_dir, cases, base, spacing_seconds=2097)


def _cycle(index: int, templates: tuple[str, ...]) -> str:
    template = templates[index % len(templates)]
    return template.format(
        term=_AFFIRMED_TERMS[index % len(_AFFIRMED_TERMS)],
        loc=_LOCATIONS[index % len(_LOCATIONS)],
    )


# --------------------------------------------------------------------------
# Random-review baseline
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BaselineReport:
    cohort_size: int
    review_fraction: float
    sample_size: int
    trials: int
    total_missed: int
    detected_mean: float
    detected_std: float
    expected_detected: float
    engine_queue_size: int
    engine_detected: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "cohort_size": self.cohort_size,
            "review_fraction": self.review_fraction,
            "sample_size": self.sample_size,
            "trials": self.trials,
            "total_missed": self.total_missed,
            "detected_mean": self.detected_mean,
            "detected_std": self.detected_std,
            "expected_detected": self.expected_detected,
            "engine_queue_size": self.engine_queue_size,
            "engine_detected": self.engine_detected,
        }


def read_sidecar(path: str | Path) -> list[dict[str, Any]]:
    records = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def random_review_baseline(sidecar: list[dict[str, Any]], review_fraction: float,
                           seed: str, trials: int) -> BaselineReport:
    """Monte Carlo yield of uniform random review at a given effort level.

    Each trial samples ``round(fraction * N)`` studies without replacement
    (per-trial RNG seeded ``seed + ":" + trial_index``) and counts sampled
    true missed findings. For comparison, the report carries the discordance
    engine's yield: every missed finding sits in its queue by construction,
    at queue-size effort.
    """
    if not 0.0 < review_fraction <= 1.0:
        raise ValueError("review_fraction must be in (0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    cohort_size = len(sidecar)
    missed_indexes = {
        i for i, record in enumerate(sidecar)
        if record.get("intended_outcome") == AdjudicationOutcome.TRUE_POSITIVE_MISSED.value
    }
    queue_size = sum(1 for r in sidecar if r.get("intended_outcome") is not None)
    sample_size = min(cohort_size, round(review_fraction * cohort_size))

    detected_counts = []
    population = range(cohort_size)
    for trial in range(trials):
        rng = random.Random(f"{seed}:{trial}")
        sample = rng.sample(population, sample_size)
        detected_counts.append(sum(1 for i in sample if i in missed_indexes))

    mean = statistics.fmean(detected_counts)
    std = statistics.stdev(detected_counts) if trials > 1 else 0.0
    return BaselineReport(
        cohort_size=cohort_size,
        review_fraction=review_fraction,
        sample_size=sample_size,
        trials=trials,
        total_missed=len(missed_indexes),
        detected_mean=mean,
        detected_std=std,
        expected_detected=len(missed_indexes) * sample_size / cohort_size,
        engine_queue_size=queue_size,
        engine_detected=len(missed_indexes),
    )

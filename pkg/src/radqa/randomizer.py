"""Deterministic worklist-arm assignment for AI-positive studies.

Each study's arm is a pure function of (trial_seed, study_id): the FNV-1a
64-bit hash of ``seed + ":" + id`` is mapped to [0,1) and compared against the
flag probability. No RNG stream, no state: replays and out-of-order ingestion
reproduce the same assignment, and one study's arm never depends on any other
study. Cohort files may pin an arm explicitly via ``flagged_override``, which
takes precedence over the hash.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .domain import AIFinding, ArmAssignment, RateBasis, ReviewScope
from .errors import NotAIPositive

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class TrialConfig:
    trial_seed: str
    flag_probability: float = 0.5
    review_scope: ReviewScope = ReviewScope.AI_POS_NLP_NEG_ONLY
    rate_basis: RateBasis = RateBasis.AI_POSITIVE

    def __post_init__(self) -> None:
        if not self.trial_seed:
            raise ValueError("trial_seed must be non-empty")
        if not 0.0 <= self.flag_probability <= 1.0:
            raise ValueError(f"flag_probability {self.flag_probability} outside [0,1]")

    def to_dict(self) -> dict:
        return {
            "trial_seed": self.trial_seed,
            "flag_probability": self.flag_probability,
            "review_scope": self.review_scope.value,
            "rate_basis": self.rate_basis.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrialConfig":
        return cls(
            trial_seed=str(data["trial_seed"]),
            flag_probability=float(data.get("flag_probability", 0.5)),
            review_scope=ReviewScope(data.get("review_scope", "AI_POS_NLP_NEG_ONLY")),
            rate_basis=RateBasis(data.get("rate_basis", "AI_POSITIVE")),
        )


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    value = _FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * _FNV_PRIME) & _MASK64
    return value


def hash_unit(trial_seed: str, study_id: str) -> float:
    """Map (seed, id) to a deterministic point in [0, 1)."""
    return fnv1a_64(f"{trial_seed}:{study_id}".encode("utf-8")) / 2.0 ** 64


def assign_arm(study_id: str, config: TrialConfig, *,
               finding: AIFinding | None = None,
               assigned_at: datetime | None = None) -> ArmAssignment:
    """Assign an AI-positive study to the flagged or non-flagged arm.

    When ``finding`` is given it must be AI-positive (else NotAIPositive) and
    its ``flagged_override``, if set, wins over the hash. ``assigned_at``
    defaults to the finding's ``received_at`` so assignments are reproducible
    from inputs alone.
    """
    if finding is not None and not finding.ai_positive:
        raise NotAIPositive(f"study {study_id!r} has no AI-positive finding")
    if assigned_at is None:
        if finding is None:
            raise ValueError("assigned_at is required when no finding is given")
        assigned_at = finding.received_at

    override = finding.flagged_override if finding is not None else None
    if override is not None:
        return ArmAssignment(
            study_id=study_id,
            flagged=override,
            trial_seed=config.trial_seed,
            assigned_at=assigned_at,
            source="override",
        )
    return ArmAssignment(
        study_id=study_id,
        flagged=hash_unit(config.trial_seed, study_id) < config.flag_probability,
        trial_seed=config.trial_seed,
        assigned_at=assigned_at,
        source="hash",
    )


def worklist_view(studies: dict, findings: dict, assignments: dict
                  ) -> list[tuple[str, bool]]:
    """(study_id, flag_shown) for every study, ordered by study_id.

    The flag is shown exactly for AI-positive studies whose assignment is
    flagged; everything else reads unflagged.
    """
    view = []
    for study_id in sorted(studies):
        finding = findings.get(study_id)
        assignment = assignments.get(study_id)
        shown = bool(finding and finding.ai_positive and assignment and assignment.flagged)
        view.append((study_id, shown))
    return view

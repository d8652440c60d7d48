"""JSON-lines file ingestion: one record per line, UTF-8, LF.

Three record kinds are accepted (auto-detected from the file name or forced
by the caller): studies, findings, reports. Each valid line becomes an event;
exact duplicates are skipped and counted; invalid or conflicting lines are
rejected with a per-line message. A file-level I/O failure aborts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from .domain import AIFinding, ReportDocument, StudyRecord
from .errors import RecordConflict
from .state import CohortEngine

KINDS = ("studies", "findings", "reports")

_PARSERS: dict[str, Callable[[dict[str, Any]], Any]] = {
    "studies": StudyRecord.from_dict,
    "findings": AIFinding.from_dict,
    "reports": ReportDocument.from_dict,
}


@dataclass
class IngestSummary:
    path: str
    kind: str
    accepted: int = 0
    duplicates: int = 0
    rejected: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "path": self.path,
            "kind": self.kind,
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "rejected": self.rejected,
            "errors": list(self.errors),
        }


def detect_kind(path: str | Path) -> Optional[str]:
    """Infer the record kind from the file name, e.g. ``findings.jsonl``."""
    name = Path(path).name.lower()
    for kind in KINDS:
        if kind in name:
            return kind
    return None


def ingest_file(engine: CohortEngine, path: str | Path,
                kind: Optional[str] = None) -> IngestSummary:
    """Load one JSON-lines file into the engine's log.

    Raises ValueError when the kind is missing/unknown, OSError on I/O
    failure; per-line problems never abort the file.
    """
    path = Path(path)
    kind = kind or detect_kind(path)
    if kind not in KINDS:
        raise ValueError(
            f"cannot determine record kind for {path.name!r}; expected one of {KINDS}")
    parse = _PARSERS[kind]
    ingest = {
        "studies": engine.ingest_study,
        "findings": engine.ingest_finding,
        "reports": engine.ingest_report,
    }[kind]

    summary = IngestSummary(path=str(path), kind=kind)
    # Bulk ingestion batches fsyncs to the file boundary.
    with path.open("r", encoding="utf-8") as handle, engine.log.deferred_sync():
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                record = parse(json.loads(text))
            except (json.JSONDecodeError, ValueError) as exc:
                summary.rejected += 1
                summary.errors.append(f"{path.name}:{line_no}: {exc}")
                continue
            try:
                status = ingest(record)
            except RecordConflict as exc:
                summary.rejected += 1
                summary.errors.append(f"{path.name}:{line_no}: {exc}")
                continue
            if status == "duplicate":
                summary.duplicates += 1
            else:
                summary.accepted += 1
    return summary

"""Shared pipeline-building helpers for the test suite."""
from __future__ import annotations

import json
from pathlib import Path

from radqa.domain import Adjudication
from radqa.ingest import ingest_file
from radqa.randomizer import TrialConfig
from radqa.simulator import CohortFiles
from radqa.state import CohortEngine


def build_engine(log_path: Path, seed: str = "test-seed", **trial_kwargs) -> CohortEngine:
    return CohortEngine.open(log_path, TrialConfig(trial_seed=seed, **trial_kwargs))


def ingest_cohort(engine: CohortEngine, files: CohortFiles) -> None:
    for path in (files.studies, files.findings, files.reports):
        summary = ingest_file(engine, path)
        assert summary.rejected == 0, summary.errors


def apply_script(engine: CohortEngine, script_path: Path) -> int:
    applied = 0
    with engine.log.deferred_sync():
        with script_path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                engine.adjudicate(Adjudication.from_dict(json.loads(line)))
                applied += 1
    return applied


def run_cohort(log_path: Path, files: CohortFiles, *, adjudicate: bool = True,
               seed: str = "test-seed", **trial_kwargs) -> CohortEngine:
    engine = build_engine(log_path, seed=seed, **trial_kwargs)
    ingest_cohort(engine, files)
    if adjudicate:
        apply_script(engine, files.adjudications)
    return engine

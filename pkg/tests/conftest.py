from __future__ import annotations

import pytest

from radqa.lexicon import default_lexicon
from radqa.simulator import write_fixture_cohort

from helpers import run_cohort


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def fixture_files(tmp_path_factory):
    return write_fixture_cohort(tmp_path_factory.mktemp("fixture") / "cohort")


@pytest.fixture(scope="session")
def pending_engine(fixture_files, tmp_path_factory):
    """Fixture cohort ingested but not yet adjudicated."""
    log = tmp_path_factory.mktemp("pending") / "events.jsonl"
    engine = run_cohort(log, fixture_files, adjudicate=False)
    yield engine
    engine.close()


@pytest.fixture(scope="session")
def adjudicated_engine(fixture_files, tmp_path_factory):
    """Fixture cohort fully run: ingested and adjudicated."""
    log = tmp_path_factory.mktemp("adjudicated") / "events.jsonl"
    engine = run_cohort(log, fixture_files)
    yield engine
    engine.close()

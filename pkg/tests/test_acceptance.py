"""Acceptance suite: every release criterion, at its stated tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -s``); tolerances
are pinned here, not configurable. The end-to-end criterion builds its own
pipeline from scratch so the wall-clock budget covers the whole run.
"""
from __future__ import annotations

import json
import math
import random
import time
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from radqa.classifier import classify_report, classify_sentence
from radqa.domain import Polarity, RateBasis, ReportDocument
from radqa.lexicon import default_lexicon
from radqa.randomizer import TrialConfig, assign_arm, hash_unit
from radqa.simulator import (
    FIXTURE_COHORT,
    FIXTURE_QUEUE,
    random_review_baseline,
    read_sidecar,
    write_fixture_cohort,
)
from radqa.state import replay
from radqa.stats import compute_metrics, fisher_exact_2x2

from helpers import run_cohort
from oracles import fisher_oracle, hypergeom_mean_var
from test_classifier_properties import filler_words, scope_sentence, terms
from test_corpus import T0, load_corpus

LEXICON = default_lexicon()


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name}")


@pytest.fixture(scope="module")
def timed_run(tmp_path_factory):
    """Fixture cohort: generate, ingest, derive, adjudicate, measure."""
    root = tmp_path_factory.mktemp("acceptance")
    started = time.monotonic()
    files = write_fixture_cohort(root / "cohort")
    engine = run_cohort(root / "events.jsonl", files)
    metrics = compute_metrics(engine.state, engine.trial)
    elapsed = time.monotonic() - started
    yield engine, files, metrics, elapsed
    engine.close()


def test_criterion_fixture_end_to_end(timed_run):
    with criterion("fixture end-to-end counts (exact) and runtime < 10 s"):
        engine, _, metrics, elapsed = timed_run
        assert metrics.cohort_size == 1936
        assert metrics.ai_positive_total == 381
        assert metrics.flagged_count == 190
        assert metrics.queue_size == 29
        assert metrics.missed_flagged == 1
        assert metrics.missed_nonflagged == 5
        assert elapsed < 10.0, f"pipeline took {elapsed:.2f}s"


def test_criterion_effort_reduction(timed_run):
    with criterion("effort reduction 1 - 29/1936 = 0.985021 within 1e-6"):
        _, _, metrics, _ = timed_run
        assert abs(metrics.effort_reduction - (1 - 29 / 1936)) < 1e-12
        assert abs(metrics.effort_reduction - 0.985021) < 1e-6


def test_criterion_missed_rates(timed_run):
    with criterion("missed rates exactly 1/190 and 5/191 within 1e-9"):
        _, _, metrics, _ = timed_run
        assert metrics.rate_basis is RateBasis.AI_POSITIVE
        assert abs(metrics.missed_rate_flagged - 1 / 190) < 1e-9
        assert abs(metrics.missed_rate_nonflagged - 5 / 191) < 1e-9


def test_criterion_fisher_reference_table():
    with criterion("Fisher exact (1,189,5,186): p > 0.05, oracle match 1e-10"):
        p = fisher_exact_2x2(1, 189, 5, 186)
        assert p > 0.05
        assert math.isclose(p, fisher_oracle(1, 189, 5, 186), rel_tol=1e-10)


def test_criterion_corpus_agreement():
    with criterion("classifier corpus 40/40 agreement"):
        corpus = load_corpus()
        assert len(corpus) == 40
        for case in corpus:
            label = classify_report(
                ReportDocument(study_id=case["id"], text=case["text"],
                               finalized_at=T0), LEXICON)
            assert label.label.value == case["label"], case["id"]


@settings(max_examples=1000, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(fillers=st.lists(filler_words, min_size=0,
                        max_size=2 * LEXICON.scope_window), term=terms)
def test_criterion_property_scope_window(fillers, term):
    spans = classify_sentence(scope_sentence(fillers, term), LEXICON)
    assert spans
    expected = (Polarity.NEGATED if len(fillers) < LEXICON.scope_window
                else Polarity.AFFIRMED)
    assert spans[-1].polarity is expected


_snippets = st.lists(st.sampled_from([
    "No acute intracranial hemorrhage.",
    "Acute subdural hematoma along the convexity.",
    "Subarachnoid hemorrhage cannot be excluded.",
    "Stable exam without hematoma.",
    "Possible epidural hematoma.",
    "No change in the chronic subdural hematoma.",
    "Hemorrhage not identified.",
    "Normal brain parenchyma.",
]), min_size=1, max_size=6).map(" ".join)


@settings(max_examples=1000, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(text=_snippets, runs=st.integers(min_value=2, max_value=4))
def test_criterion_property_case_whitespace(text, runs):
    base = classify_report(
        ReportDocument(study_id="A", text=text, finalized_at=T0), LEXICON)
    mangled = text.upper().replace(" ", " " * runs)
    other = classify_report(
        ReportDocument(study_id="A", text=mangled, finalized_at=T0), LEXICON)
    assert other.label is base.label


@settings(max_examples=1000, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(text=_snippets)
def test_criterion_property_determinism(text):
    report = ReportDocument(study_id="A", text=text, finalized_at=T0)
    first = json.dumps(classify_report(report, LEXICON).to_dict(), sort_keys=True)
    second = json.dumps(classify_report(report, LEXICON).to_dict(), sort_keys=True)
    assert first == second


def test_criterion_property_suites_banner():
    with criterion("property suites (scope window, case/whitespace, determinism) "
                   "x 1000 instances"):
        pass  # the three 1000-instance suites above must all have passed


def test_criterion_randomizer(timed_run):
    with criterion("randomizer balance over 100k ids, determinism, replay equality"):
        rng = random.Random(7)
        ids = [f"ACC{rng.getrandbits(40):010x}" for _ in range(100_000)]
        config = TrialConfig(trial_seed="acceptance-seed")
        flagged = sum(hash_unit(config.trial_seed, sid) < 0.5 for sid in ids)
        fraction = flagged / len(ids)
        assert abs(fraction - 0.5) < 0.005, f"flagged fraction {fraction}"

        from datetime import datetime, timezone
        t0 = datetime(2024, 5, 1, tzinfo=timezone.utc)
        sample = ids[:500]
        first = [assign_arm(s, config, assigned_at=t0).flagged for s in sample]
        second = [assign_arm(s, config, assigned_at=t0).flagged for s in sample]
        assert first == second  # determinism and stability: id-local, stateless

        engine, _, _, _ = timed_run
        assert replay(engine.log.path) == engine.state  # deep-equal replay


def test_criterion_baseline_comparison(timed_run):
    with criterion("random-review baseline mean within 3 sigma of 6*29/1936 "
                   "over 10,000 trials"):
        _, files, _, _ = timed_run
        sidecar = read_sidecar(files.sidecar)
        trials = 10_000
        report = random_review_baseline(
            sidecar, FIXTURE_QUEUE / FIXTURE_COHORT, seed="baseline-acceptance",
            trials=trials)
        mean, var = hypergeom_mean_var(FIXTURE_COHORT, 6, FIXTURE_QUEUE)
        assert report.sample_size == FIXTURE_QUEUE
        assert abs(mean - 6 * 29 / 1936) < 1e-12
        sigma = math.sqrt(var / trials)
        assert abs(report.detected_mean - mean) < 3 * sigma, (
            f"mean {report.detected_mean} vs exact {mean} (3 sigma {3 * sigma:.4f})")
        # At equal effort the engine's queue contains every missed finding.
        assert report.engine_detected == report.total_missed == 6

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from radqa.service import ServiceConfig, create_app
from radqa.state import CohortEngine, replay

from helpers import run_cohort

STUDY = {"study_id": "S1", "acquired_at": "2024-05-01T10:00:00Z",
         "scanner_id": "CT-A", "exam_type": "HEAD_CT_NONCONTRAST"}
FINDING = {"study_id": "S1", "finding_code": "ICH", "ai_positive": True,
           "ai_score": 0.91, "model_version": "m1",
           "received_at": "2024-05-01T10:05:00Z"}
REPORT = {"study_id": "S1", "text": "IMPRESSION: No acute intracranial hemorrhage.",
          "finalized_at": "2024-05-01T12:00:00Z"}


@pytest.fixture()
def client(tmp_path):
    engine = CohortEngine.open(tmp_path / "events.jsonl", ServiceConfig().trial)
    with TestClient(create_app(engine)) as c:
        yield c
    engine.close()


@pytest.fixture(scope="module")
def fixture_client(fixture_files, tmp_path_factory):
    log = tmp_path_factory.mktemp("svc") / "events.jsonl"
    engine = run_cohort(log, fixture_files, adjudicate=False,
                        seed=ServiceConfig().trial.trial_seed)
    with TestClient(create_app(engine)) as c:
        yield c, fixture_files
    engine.close()


def test_single_record_pipeline(client):
    assert client.post("/v1/studies", json=STUDY).json()["status"] == "accepted"
    assert client.post("/v1/ai-results", json=FINDING).json()["status"] == "accepted"
    assert client.post("/v1/reports", json=REPORT).json()["status"] == "accepted"

    queue = client.get("/v1/triage/queue").json()
    assert [item["study_id"] for item in queue] == ["S1"]
    assert queue[0]["concordance"] == "AI_POS_NLP_NEG"

    worklist = client.get("/v1/worklist").json()
    assert len(worklist) == 1 and isinstance(worklist[0]["flag_shown"], bool)


def test_duplicate_and_conflict_statuses(client):
    client.post("/v1/studies", json=STUDY)
    assert client.post("/v1/studies", json=STUDY).json()["status"] == "duplicate"
    conflicting = {**STUDY, "scanner_id": "CT-B"}
    response = client.post("/v1/studies", json=conflicting)
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "conflict"


def test_invalid_record_is_422(client):
    bad = {**FINDING, "ai_score": 1.7}
    response = client.post("/v1/ai-results", json=bad)
    assert response.status_code == 422
    assert "1.7" in response.json()["error"]["message"]


def test_adjudication_flow_and_errors(client):
    client.post("/v1/studies", json=STUDY)
    client.post("/v1/ai-results", json=FINDING)
    client.post("/v1/reports", json=REPORT)

    missing = client.post("/v1/triage/GHOST/adjudication",
                          json={"reviewer_id": "r1", "outcome": "OTHER"})
    assert missing.status_code == 404
    assert missing.json()["error"]["code"] == "unknown_item"

    ok = client.post("/v1/triage/S1/adjudication",
                     json={"reviewer_id": "r1", "outcome": "AI_FALSE_POSITIVE",
                           "note": "artifact"})
    assert ok.status_code == 200
    assert ok.json()["status"] == "ADJUDICATED"

    again = client.post("/v1/triage/S1/adjudication",
                        json={"reviewer_id": "r1", "outcome": "OTHER"})
    assert again.status_code == 409
    assert again.json()["error"]["code"] == "already_adjudicated"

    amended = client.post("/v1/triage/S1/adjudication",
                          json={"reviewer_id": "r2", "outcome": "OTHER",
                                "amend": True})
    assert amended.status_code == 200

    assert client.get("/v1/triage/queue").json() == []
    detail = client.get("/v1/triage/S1").json()
    assert detail["adjudication"]["outcome"] == "OTHER"
    assert detail["ai"]["ai_positive"] is True


def test_report_endpoint_serves_evidence(client):
    client.post("/v1/studies", json=STUDY)
    client.post("/v1/ai-results", json=FINDING)
    client.post("/v1/reports", json=REPORT)
    body = client.get("/v1/reports/S1").json()
    assert body["label"] == "NEGATIVE"
    assert body["evidence"][0]["polarity"] == "NEGATED"
    raw = body["text"].encode("utf-8")
    span = body["evidence"][0]
    assert raw[span["start"]:span["end"]].decode().lower() == span["matched_term"].lower()
    assert client.get("/v1/reports/GHOST").status_code == 404


def test_metrics_conflict_while_pending(fixture_client):
    client, _ = fixture_client
    response = client.get("/v1/metrics")
    assert response.status_code == 409
    body = response.json()["error"]
    assert body["code"] == "incomplete_adjudication"
    assert body["pending"] == 29


def test_queue_filters_on_fixture(fixture_client):
    client, _ = fixture_client
    full = client.get("/v1/triage/queue").json()
    assert len(full) == 29
    flagged = client.get("/v1/triage/queue", params={"arm": "flagged"}).json()
    nonflagged = client.get("/v1/triage/queue", params={"arm": "nonflagged"}).json()
    assert len(flagged) + len(nonflagged) == 29
    assert all(item["arm"] == "flagged" for item in flagged)
    classed = client.get("/v1/triage/queue",
                         params={"class": "AI_POS_NLP_NEG"}).json()
    assert len(classed) == 29
    bad = client.get("/v1/triage/queue", params={"arm": "sideways"})
    assert bad.status_code == 422


def test_fixture_drain_and_metrics_body(fixture_client):
    client, files = fixture_client
    with files.adjudications.open("r", encoding="utf-8") as handle:
        for line in handle:
            record = json.loads(line)
            sid = record.pop("study_id")
            response = client.post(f"/v1/triage/{sid}/adjudication", json=record)
            assert response.status_code == 200, response.text
    assert client.get("/v1/triage/queue").json() == []

    response = client.get("/v1/metrics")
    assert response.status_code == 200
    assert '"effort_reduction": 0.985021' in response.text
    metrics = response.json()
    assert metrics["queue_size"] == 29
    assert metrics["missed_flagged"] == 1
    assert metrics["missed_nonflagged"] == 5

    confirmed = client.get("/v1/metrics", params={"basis": "CONFIRMED_POSITIVE"})
    assert confirmed.json()["rate_basis"] == "CONFIRMED_POSITIVE"
    assert client.get("/v1/metrics", params={"basis": "nope"}).status_code == 422


def test_bearer_token_required_when_configured(tmp_path):
    engine = CohortEngine.open(tmp_path / "events.jsonl", ServiceConfig().trial)
    with TestClient(create_app(engine, auth_token="sesame")) as client:
        denied = client.get("/v1/worklist")
        assert denied.status_code == 401
        allowed = client.get("/v1/worklist",
                             headers={"Authorization": "Bearer sesame"})
        assert allowed.status_code == 200
    engine.close()


def test_http_ingestion_equals_cli_ingestion(tmp_path, fixture_files):
    """Same records through HTTP posts and through file ingestion must yield
    deep-equal replayed states (the API and the CLI are interchangeable)."""
    from radqa.simulator import SimParams, generate_cohort
    params = SimParams(n_studies=80, ai_positive_rate=0.3, nlp_neg_given_ai_pos=0.3,
                       miss_prob_flagged=0.2, miss_prob_nonflagged=0.4,
                       nlp_error_rate=0.1, seed="http-vs-cli")
    files = generate_cohort(params, tmp_path / "cohort")

    cli_log = tmp_path / "cli.jsonl"
    cli_engine = run_cohort(cli_log, files, seed=ServiceConfig().trial.trial_seed)
    cli_engine.close()

    http_log = tmp_path / "http.jsonl"
    engine = CohortEngine.open(http_log, ServiceConfig().trial)
    with TestClient(create_app(engine)) as client:
        for endpoint, path in (("/v1/studies", files.studies),
                               ("/v1/ai-results", files.findings),
                               ("/v1/reports", files.reports)):
            with path.open("r", encoding="utf-8") as handle:
                for line in handle:
                    response = client.post(endpoint, json=json.loads(line))
                    assert response.status_code == 200, response.text
        with files.adjudications.open("r", encoding="utf-8") as handle:
            for line in handle:
                record = json.loads(line)
                sid = record.pop("study_id")
                assert client.post(f"/v1/triage/{sid}/adjudication",
                                   json=record).status_code == 200
    engine.close()

    assert replay(http_log) == replay(cli_log)


def test_service_config_precedence(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({
        "port": 9100,
        "log_path": "from-file.jsonl",
        "trial": {"trial_seed": "seed-from-file", "flag_probability": 0.25},
    }))
    loaded = ServiceConfig.load(config_file)
    assert loaded.port == 9100
    assert loaded.trial.trial_seed == "seed-from-file"
    assert loaded.trial.flag_probability == 0.25

    overridden = ServiceConfig.load(config_file, {"port": 9200, "log_path": None})
    assert overridden.port == 9200            # explicit override wins
    assert overridden.log_path == "from-file.jsonl"  # None override ignored

    defaults = ServiceConfig.load()
    assert defaults.port == 8000
    assert defaults.trial.flag_probability == 0.5

"""HTTP ingestion and review API.

One writer task (the engine, guarded by a lock) owns the event log and all
state mutation; read handlers work on immutable snapshots and never block on
each other. Every request is logged as one JSON line to standard error.

Endpoints (JSON bodies, ``/v1`` prefix):

- POST /v1/studies | /v1/ai-results | /v1/reports: ingest one record
- GET  /v1/worklist: per-study flag view
- GET  /v1/triage/queue?arm=&class=: pending items, filterable
- GET  /v1/triage/{study_id}: one item with arm, finding, and verdict
- POST /v1/triage/{study_id}/adjudication: record an expert verdict
- GET  /v1/metrics?basis=: QA summary (409 while items are pending)
- GET  /v1/reports/{study_id}: report text plus evidence spans
"""
from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .domain import (
    Adjudication,
    AdjudicationOutcome,
    AIFinding,
    ConcordanceClass,
    RateBasis,
    ReportDocument,
    StudyRecord,
    parse_utc,
)
from .errors import (
    AlreadyAdjudicated,
    IncompleteAdjudication,
    QAError,
    RecordConflict,
    UnknownItem,
    ZeroCohort,
)
from .events import now_utc
from .lexicon import load_lexicon
from .randomizer import TrialConfig, worklist_view
from .state import CohortEngine
from .stats import compute_metrics
from .triage import pending_queue

log = logging.getLogger("radqa.http")

DEFAULT_TRIAL_SEED = "worklist-trial-1"


@dataclass
class ServiceConfig:
    log_path: str = "events.jsonl"
    host: str = "127.0.0.1"
    port: int = 8000
    lexicon_path: Optional[str] = None
    auth_token: Optional[str] = None
    trial: TrialConfig = field(
        default_factory=lambda: TrialConfig(trial_seed=DEFAULT_TRIAL_SEED))

    @classmethod
    def load(cls, path: str | Path | None = None,
             overrides: dict[str, Any] | None = None) -> "ServiceConfig":
        """Config file values, then explicit overrides (CLI flags / env)."""
        data: dict[str, Any] = {}
        if path is not None:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        merged = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}
        trial_data = merged.get("trial")
        trial = (TrialConfig.from_dict(trial_data) if trial_data
                 else TrialConfig(trial_seed=DEFAULT_TRIAL_SEED))
        return cls(
            log_path=str(merged.get("log_path", "events.jsonl")),
            host=str(merged.get("host", "127.0.0.1")),
            port=int(merged.get("port", 8000)),
            lexicon_path=merged.get("lexicon_path"),
            auth_token=merged.get("auth_token"),
            trial=trial,
        )


def _error(status: int, code: str, message: str, **extra: Any) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message, **extra}})


def _item_payload(snapshot: Any, item: Any) -> dict[str, Any]:
    assignment = snapshot.assignments.get(item.study_id)
    payload = item.to_dict()
    payload["arm"] = (
        None if assignment is None
        else ("flagged" if assignment.flagged else "nonflagged"))
    return payload


def create_app(engine: CohortEngine, auth_token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="radqa", version="0.1.0", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    lock = threading.RLock()

    def snapshot():
        with lock:
            return engine.state.snapshot()

    @app.middleware("http")
    async def request_logging(request: Request, call_next):
        if auth_token is not None:
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {auth_token}":
                return _error(401, "unauthorized", "missing or invalid bearer token")
        started = time.monotonic()
        response = await call_next(request)
        log.info(json.dumps({
            "method": request.method,
            "path": request.url.path,
            "status": response.status_code,
            "ms": round(1000 * (time.monotonic() - started), 1),
        }))
        return response

    def ingest_one(parse, ingest, body: dict[str, Any]) -> Response:
        try:
            record = parse(body)
        except (ValueError, TypeError, KeyError) as exc:
            return _error(422, "invalid_record", str(exc))
        try:
            with lock:
                status = ingest(record)
        except RecordConflict as exc:
            return _error(409, "conflict", str(exc))
        return JSONResponse({"status": status, "study_id": record.study_id})

    @app.post("/v1/studies")
    async def post_study(request: Request) -> Response:
        return ingest_one(StudyRecord.from_dict, engine.ingest_study,
                          await request.json())

    @app.post("/v1/ai-results")
    async def post_finding(request: Request) -> Response:
        return ingest_one(AIFinding.from_dict, engine.ingest_finding,
                          await request.json())

    @app.post("/v1/reports")
    async def post_report(request: Request) -> Response:
        return ingest_one(ReportDocument.from_dict, engine.ingest_report,
                          await request.json())

    @app.get("/v1/worklist")
    def get_worklist() -> Response:
        snap = snapshot()
        view = worklist_view(snap.studies, snap.findings, snap.assignments)
        return JSONResponse(
            [{"study_id": sid, "flag_shown": shown} for sid, shown in view])

    @app.get("/v1/triage/queue")
    def get_queue(arm: Optional[str] = Query(None),
                  concordance_class: Optional[str] = Query(None, alias="class")
                  ) -> Response:
        snap = snapshot()
        cls = None
        if concordance_class is not None:
            try:
                cls = ConcordanceClass(concordance_class)
            except ValueError:
                return _error(422, "invalid_filter",
                              f"unknown concordance class {concordance_class!r}")
        try:
            items = pending_queue(snap.triage, snap.assignments, arm, cls)
        except ValueError as exc:
            return _error(422, "invalid_filter", str(exc))
        return JSONResponse([_item_payload(snap, item) for item in items])

    @app.get("/v1/triage/{study_id}")
    def get_triage_item(study_id: str) -> Response:
        snap = snapshot()
        item = snap.triage.get(study_id)
        if item is None:
            return _error(404, "unknown_item", f"no triage item for {study_id!r}")
        payload = _item_payload(snap, item)
        finding = snap.findings.get(study_id)
        payload["ai"] = finding.to_dict() if finding else None
        adjudication = snap.adjudications.get(study_id)
        payload["adjudication"] = adjudication.to_dict() if adjudication else None
        return JSONResponse(payload)

    @app.post("/v1/triage/{study_id}/adjudication")
    async def post_adjudication(study_id: str, request: Request) -> Response:
        body = await request.json()
        try:
            adjudication = Adjudication(
                study_id=study_id,
                reviewer_id=str(body["reviewer_id"]),
                outcome=AdjudicationOutcome(body["outcome"]),
                decided_at=(parse_utc(body["decided_at"])
                            if body.get("decided_at") else now_utc()),
                note=body.get("note"),
            )
        except (KeyError, ValueError, TypeError) as exc:
            return _error(422, "invalid_adjudication", str(exc))
        try:
            with lock:
                item = engine.adjudicate(adjudication, amend=bool(body.get("amend")))
        except UnknownItem as exc:
            return _error(404, "unknown_item", str(exc))
        except AlreadyAdjudicated as exc:
            return _error(409, "already_adjudicated", str(exc))
        return JSONResponse(_item_payload(engine.state.snapshot(), item))

    @app.get("/v1/metrics")
    def get_metrics(basis: Optional[str] = Query(None)) -> Response:
        snap = snapshot()
        trial = engine.trial
        if basis is not None:
            try:
                trial = TrialConfig(
                    trial_seed=trial.trial_seed,
                    flag_probability=trial.flag_probability,
                    review_scope=trial.review_scope,
                    rate_basis=RateBasis(basis),
                )
            except ValueError:
                return _error(422, "invalid_basis", f"unknown rate basis {basis!r}")
        try:
            metrics = compute_metrics(snap, trial)
        except IncompleteAdjudication as exc:
            return _error(409, "incomplete_adjudication", str(exc), pending=exc.pending)
        except (ZeroCohort, QAError) as exc:
            return _error(409, "metrics_unavailable", str(exc))
        return Response(content=json.dumps(metrics.to_dict(), indent=2),
                        media_type="application/json")

    @app.get("/v1/reports/{study_id}")
    def get_report(study_id: str) -> Response:
        snap = snapshot()
        report = snap.reports.get(study_id)
        if report is None:
            return _error(404, "unknown_report", f"no report for {study_id!r}")
        label = snap.labels.get(study_id)
        payload = report.to_dict()
        payload["label"] = label.label.value if label else None
        payload["classifier_version"] = label.classifier_version if label else None
        payload["evidence"] = [s.to_dict() for s in label.evidence] if label else []
        return JSONResponse(payload)

    return app


def serve(config: ServiceConfig) -> None:
    """Open the log, replay, and run the API until interrupted.

    Startup failures (unwritable log, busy port) abort with a diagnostic.
    """
    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(name)s %(message)s")
    lexicon = load_lexicon(config.lexicon_path) if config.lexicon_path else None
    engine = CohortEngine.open(config.log_path, config.trial, lexicon)
    app = create_app(engine, auth_token=config.auth_token)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        engine.close()

"""Operator command line: ingestion, simulation, queue review, metrics, service.

Exit codes: 0 success, 1 validation/domain errors, 2 usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .domain import Adjudication, AdjudicationOutcome, ConcordanceClass, RateBasis
from .errors import IncompleteAdjudication, QAError
from .events import now_utc
from .ingest import detect_kind, ingest_file
from .lexicon import load_lexicon
from .randomizer import TrialConfig
from .service import ServiceConfig, serve
from .simulator import (
    SimParams,
    generate_cohort,
    random_review_baseline,
    read_sidecar,
    write_fixture_cohort,
)
from .state import CohortEngine, replay
from .stats import compute_metrics, render_metrics_table
from .triage import pending_queue


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radqa",
        description="Discordance-driven radiology QA: ingest, triage, adjudicate, measure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, log: bool = True) -> None:
        if log:
            p.add_argument("--log", required=True, help="event log path (JSON lines)")
        p.add_argument("--config", help="service config file (JSON)")

    p = sub.add_parser("ingest", help="load JSON-lines cohort files into an event log")
    p.add_argument("files", nargs="+", help="studies/findings/reports .jsonl files")
    p.add_argument("--kind", choices=["studies", "findings", "reports"],
                   help="force the record kind instead of detecting from file names")
    p.add_argument("--format", choices=["table", "json"], default="table")
    add_common(p)

    p = sub.add_parser("simulate", help="generate a random cohort, or run the "
                                        "random-review baseline with --baseline")
    p.add_argument("--out", help="output directory (generation) or report file (baseline)")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--ai-positive-rate", type=float, default=0.2)
    p.add_argument("--nlp-neg-rate", type=float, default=0.07,
                   help="P(report reads negative | AI-positive)")
    p.add_argument("--miss-flagged", type=float, default=0.05)
    p.add_argument("--miss-nonflagged", type=float, default=0.25)
    p.add_argument("--nlp-error-rate", type=float, default=0.015)
    p.add_argument("--seed", default="sim-1")
    p.add_argument("--baseline", metavar="SIDECAR",
                   help="sidecar.jsonl of an existing cohort; runs the baseline instead")
    p.add_argument("--review-fraction", type=float, default=0.015)
    p.add_argument("--trials", type=int, default=10000)

    p = sub.add_parser("fixture", help="write the bundled fixed-count demo cohort")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("queue", help="print pending triage items")
    p.add_argument("--arm", choices=["flagged", "nonflagged"])
    p.add_argument("--class", dest="concordance_class",
                   choices=[c.value for c in ConcordanceClass])
    p.add_argument("--format", choices=["table", "json"], default="table")
    add_common(p)

    p = sub.add_parser("adjudicate", help="apply expert verdicts to the queue")
    p.add_argument("--script", help="JSON-lines adjudication script")
    p.add_argument("--study", help="single study id")
    p.add_argument("--outcome", choices=[o.value for o in AdjudicationOutcome])
    p.add_argument("--reviewer", default="cli")
    p.add_argument("--note")
    p.add_argument("--amend", action="store_true")
    add_common(p)

    p = sub.add_parser("metrics", help="compute and print QA metrics")
    p.add_argument("--basis", choices=[b.value for b in RateBasis])
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--out", help="also write the JSON metrics report here")
    add_common(p)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--log", help="event log path")
    p.add_argument("--config", help="service config file (JSON)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--lexicon", help="lexicon config file")
    p.add_argument("--token", help="require this bearer token on every request")

    p = sub.add_parser("replay", help="validate an event log and summarize its state")
    add_common(p)

    return parser


def _trial_from_config(config_path: Optional[str]) -> TrialConfig:
    return ServiceConfig.load(config_path).trial


def _open_engine(args: argparse.Namespace) -> CohortEngine:
    config = ServiceConfig.load(args.config) if args.config else ServiceConfig()
    lexicon = load_lexicon(config.lexicon_path) if config.lexicon_path else None
    return CohortEngine.open(args.log, config.trial, lexicon)


def _cmd_ingest(args: argparse.Namespace) -> int:
    engine = _open_engine(args)
    summaries = []
    exit_code = 0
    try:
        for raw in args.files:
            path = Path(raw)
            kind = args.kind or detect_kind(path)
            if kind is None:
                print(f"skipping {path.name}: not a studies/findings/reports file",
                      file=sys.stderr)
                continue
            summary = ingest_file(engine, path, kind)
            summaries.append(summary)
            if summary.rejected:
                exit_code = 1
    finally:
        engine.close()

    if args.format == "json":
        print(json.dumps([s.to_dict() for s in summaries], indent=2))
    else:
        for s in summaries:
            print(f"{Path(s.path).name}: kind={s.kind} accepted={s.accepted} "
                  f"duplicates={s.duplicates} rejected={s.rejected}")
            for error in s.errors:
                print(f"  {error}", file=sys.stderr)
    return exit_code


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.baseline:
        report = random_review_baseline(
            read_sidecar(args.baseline), args.review_fraction, args.seed, args.trials)
        text = json.dumps(report.to_dict(), indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(text)
        return 0
    if not args.out:
        print("simulate: --out DIR is required for cohort generation", file=sys.stderr)
        return 2
    params = SimParams(
        n_studies=args.n,
        ai_positive_rate=args.ai_positive_rate,
        nlp_neg_given_ai_pos=args.nlp_neg_rate,
        miss_prob_flagged=args.miss_flagged,
        miss_prob_nonflagged=args.miss_nonflagged,
        nlp_error_rate=args.nlp_error_rate,
        seed=args.seed,
    )
    files = generate_cohort(params, args.out)
    for path in (files.studies, files.findings, files.reports,
                 files.sidecar, files.adjudications):
        print(path)
    return 0


def _cmd_fixture(args: argparse.Namespace) -> int:
    files = write_fixture_cohort(args.out)
    for path in (files.studies, files.findings, files.reports,
                 files.sidecar, files.adjudications):
        print(path)
    return 0


def _cmd_queue(args: argparse.Namespace) -> int:
    state = replay(args.log)
    cls = ConcordanceClass(args.concordance_class) if args.concordance_class else None
    items = pending_queue(state.triage, state.assignments, args.arm, cls)
    if args.format == "json":
        payload = []
        for item in items:
            entry = item.to_dict()
            assignment = state.assignments.get(item.study_id)
            entry["arm"] = (None if assignment is None
                            else ("flagged" if assignment.flagged else "nonflagged"))
            payload.append(entry)
        print(json.dumps(payload, indent=2))
    else:
        print(f"pending items: {len(items)}")
        for item in items:
            assignment = state.assignments.get(item.study_id)
            arm = ("-" if assignment is None
                   else ("flagged" if assignment.flagged else "nonflagged"))
            print(f"{item.study_id}  {item.concordance.value}  {arm:<10}  "
                  f"{item.to_dict()['enqueued_at']}")
    return 0


def _cmd_adjudicate(args: argparse.Namespace) -> int:
    if not args.script and not (args.study and args.outcome):
        print("adjudicate: provide --script FILE or --study ID --outcome OUTCOME",
              file=sys.stderr)
        return 2
    engine = _open_engine(args)
    applied = 0
    try:
        with engine.log.deferred_sync():
            if args.script:
                with open(args.script, "r", encoding="utf-8") as handle:
                    for line_no, line in enumerate(handle, start=1):
                        line = line.strip()
                        if not line:
                            continue
                        record = json.loads(line)
                        amend = bool(record.pop("amend", False))
                        if "decided_at" not in record:
                            record["decided_at"] = now_utc().isoformat()
                        engine.adjudicate(Adjudication.from_dict(record), amend=amend)
                        applied += 1
            else:
                engine.adjudicate(Adjudication(
                    study_id=args.study,
                    reviewer_id=args.reviewer,
                    outcome=AdjudicationOutcome(args.outcome),
                    decided_at=now_utc(),
                    note=args.note,
                ), amend=args.amend)
                applied += 1
    except (QAError, ValueError, json.JSONDecodeError) as exc:
        print(f"adjudicate: {exc}", file=sys.stderr)
        return 1
    finally:
        engine.close()
    print(f"adjudicated: {applied}")
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    state = replay(args.log)
    trial = _trial_from_config(args.config)
    if args.basis:
        trial = TrialConfig(
            trial_seed=trial.trial_seed,
            flag_probability=trial.flag_probability,
            review_scope=trial.review_scope,
            rate_basis=RateBasis(args.basis),
        )
    try:
        metrics = compute_metrics(state, trial)
    except IncompleteAdjudication as exc:
        print(f"metrics: {exc.pending} triage items pending adjudication; "
              "adjudicate the queue first", file=sys.stderr)
        return 1
    except QAError as exc:
        print(f"metrics: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(
            json.dumps(metrics.to_dict(), indent=2) + "\n", encoding="utf-8")
    if args.format == "json":
        print(json.dumps(metrics.to_dict(), indent=2))
    else:
        print(render_metrics_table(metrics))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    # Precedence: flags > environment > config file > defaults.
    env = os.environ
    overrides = {
        "log_path": args.log or env.get("RADQA_LOG"),
        "host": args.host or env.get("RADQA_HOST"),
        "port": args.port or (int(env["RADQA_PORT"]) if env.get("RADQA_PORT") else None),
        "lexicon_path": args.lexicon or env.get("RADQA_LEXICON"),
        "auth_token": args.token or env.get("RADQA_TOKEN"),
    }
    config = ServiceConfig.load(args.config or env.get("RADQA_CONFIG"), overrides)
    serve(config)
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        state = replay(args.log)
    except QAError as exc:
        print(f"replay: {exc}", file=sys.stderr)
        return 1
    pending = sum(1 for i in state.triage.values() if i.status.value == "PENDING")
    print(f"events: {state.last_seq}")
    print(f"studies: {len(state.studies)}")
    print(f"ai_positive: {sum(1 for f in state.findings.values() if f.ai_positive)}")
    print(f"queue: {len(state.triage)} ({pending} pending)")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "simulate": _cmd_simulate,
    "fixture": _cmd_fixture,
    "queue": _cmd_queue,
    "adjudicate": _cmd_adjudicate,
    "metrics": _cmd_metrics,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except QAError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

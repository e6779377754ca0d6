"""Operator entry point: serve the API, analyze logs, build synthetic cohorts.

Exit codes: 0 success, 2 configuration problems, 3 data problems (bad log
or insufficient observations). All commands are non-interactive.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from dataclasses import asdict
from pathlib import Path

from .analytics import (
    AnalyticsConfig,
    default_assignment_map,
    engagement_report,
    estimate_competency,
    estimate_difficulty,
    isolated_type_fraction,
    log_questions,
    per_question_type_counts,
    performance_breakdown,
    sequence_flow_export,
    sequence_stats,
)
from .core import HintType
from .errors import ConfigError, HintkitError, InsufficientData, ParseError
from .sandbox import load_questions
from .simulate import load_simulation_spec, paper_fixture_events, simulate_log
from .store import read_event_log, write_event_log

BASE_REPORTS = (
    "sequence-stats",
    "flows",
    "question-types",
    "engagement",
    "isolated",
    "performance",
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hintkit", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    serve = commands.add_parser("serve", help="run the hint service")
    serve.add_argument("--config", required=True, help="service config JSON")

    analyze = commands.add_parser("analyze", help="compute reports from an event log")
    analyze.add_argument("--log", required=True, help="event log (JSONL)")
    analyze.add_argument(
        "--report",
        action="append",
        choices=BASE_REPORTS + ("all",),
        help="report to produce (repeatable; default all)",
    )
    analyze.add_argument("--out", default=".", help="output directory")
    analyze.add_argument(
        "--difficulty",
        metavar="PAST_SCORES",
        help="past-scores JSON enabling per-difficulty breakdowns",
    )
    analyze.add_argument(
        "--competency",
        action="store_true",
        help="enable per-competency breakdowns (proxy: first assignment)",
    )
    analyze.add_argument(
        "--questions", help="questions directory, for question-to-assignment mapping"
    )
    analyze.add_argument(
        "--cutoff", type=float, default=3600.0, help="contemplation cutoff in seconds"
    )

    simulate = commands.add_parser("simulate", help="generate a synthetic event log")
    simulate.add_argument("--spec", required=True, help="simulation spec JSON")
    simulate.add_argument("--out", required=True, help="output log path")

    fixture = commands.add_parser(
        "fixture-paper", help="emit the published-aggregates fixture log"
    )
    fixture.add_argument("--out", required=True, help="output log path")

    return parser


def cmd_serve(args) -> int:
    import uvicorn

    from .service import HintService, create_app, load_api_config

    config = load_api_config(args.config)
    service = HintService.from_config(config)  # ConfigError before any bind
    app = create_app(service, static_dir=config.static_dir)
    host, port = config.host_port()
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise ConfigError(f"cannot bind {host}:{port}: {exc}") from exc
    finally:
        probe.close()
    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


def _assignment_map(args, events) -> dict[str, str]:
    if args.questions:
        return {
            qid: spec.assignment_id
            for qid, spec in load_questions(args.questions).items()
        }
    return default_assignment_map(log_questions(events))


def _difficulty_reports(events, past_scores_path: str) -> dict[str, dict]:
    doc = json.loads(Path(past_scores_path).read_text())
    assignments = doc.get("assignments")
    if not isinstance(assignments, dict):
        raise ConfigError(
            f"{past_scores_path} must carry an 'assignments' mapping of "
            "assignment -> question -> past mean score"
        )
    scores = {q: s for questions in assignments.values() for q, s in questions.items()}
    labels = estimate_difficulty(scores, {a: sorted(qs) for a, qs in assignments.items()})
    questions = log_questions(events)
    reports = {
        "difficulty-labels": {
            "labels": labels.labels,
            "tie_assignments": list(labels.tie_assignments),
        }
    }
    for label in ("easier", "harder"):
        members = labels.questions_with(label)
        pairs = {(s, q) for s in _students(events) for q in questions if q in members}
        reports[f"performance-{label}"] = performance_breakdown(
            events, label=label, pairs=pairs
        )
    return reports


def _competency_reports(events, cfg: AnalyticsConfig, assignment_map) -> dict[str, dict]:
    labels = estimate_competency(events, cfg, assignment_map)
    non_proxy = {
        q
        for q in log_questions(events)
        if assignment_map.get(q) != cfg.competency_excluded_assignment
    }
    reports = {
        "competency-labels": {
            "labels": labels.labels,
            "attempts": labels.attempts,
            "boundary_tie": labels.boundary_tie,
            "excluded_assignment": cfg.competency_excluded_assignment,
        }
    }
    for label in ("higher", "lower"):
        members = {s for s, l in labels.labels.items() if l == label}
        pairs = {(s, q) for s in members for q in non_proxy}
        reports[f"performance-{label}-competency"] = performance_breakdown(
            events, label=label, pairs=pairs
        )
    return reports


def _students(events):
    from .analytics import log_students

    return log_students(events)


def cmd_analyze(args) -> int:
    events = read_event_log(args.log)
    if not events:
        print("warning: event log is empty; reports will be empty", file=sys.stderr)
    cfg = AnalyticsConfig(contemplation_cutoff_s=args.cutoff)
    requested = args.report or ["all"]
    names = list(BASE_REPORTS) if "all" in requested else list(dict.fromkeys(requested))

    documents: dict[str, dict] = {}
    stats = sequence_stats(events)
    if "sequence-stats" in names:
        documents["sequence-stats"] = {
            "n_pairs": stats.n_pairs,
            "total_hints": stats.total_hints,
            "type_totals": stats.type_totals,
            "present_counts": stats.present_counts,
            "first_counts": stats.first_counts,
            "majority_counts": stats.majority_counts,
            "sequences": [
                {"sequence": list(seq), "count": count}
                for seq, count in stats.sequence_frequency
            ],
        }
    if "flows" in names:
        documents["flows"] = sequence_flow_export(stats)
    if "question-types" in names:
        documents["question-types"] = {"questions": per_question_type_counts(events)}
    if "engagement" in names:
        documents["engagement"] = engagement_report(events, cfg)
    if "isolated" in names:
        documents["isolated"] = {
            t.value: asdict(isolated_type_fraction(events, t)) for t in HintType
        }
    if "performance" in names:
        documents["performance"] = performance_breakdown(events)

    if args.difficulty:
        documents.update(_difficulty_reports(events, args.difficulty))
    if args.competency:
        documents.update(_competency_reports(events, cfg, _assignment_map(args, events)))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, document in documents.items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_simulation_spec(args.spec)
    events = simulate_log(spec)
    write_event_log(args.out, events)
    print(f"wrote {args.out}: {len(events)} events")
    return EXIT_OK


def cmd_fixture_paper(args) -> int:
    events = paper_fixture_events()
    write_event_log(args.out, events)
    print(f"wrote {args.out}: {len(events)} events")
    return EXIT_OK


_COMMANDS = {
    "serve": cmd_serve,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "fixture-paper": cmd_fixture_paper,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HintkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Simulator determinism and CLI exit-code/report contracts."""

import json

import pytest

from hintkit.cli import main
from hintkit.core import QuotaPolicy, check_quota, replay_events
from hintkit.simulate import (
    SimulationSpec,
    paper_fixture_events,
    question_ids,
    simulate_log,
)
from hintkit.store import write_event_log


def test_simulated_logs_are_byte_identical(tmp_path):
    spec = SimulationSpec(n_students=10, n_questions=4, n_assignments=2, seed=11)
    first, second = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    write_event_log(first, simulate_log(spec))
    write_event_log(second, simulate_log(spec))
    assert first.read_bytes() == second.read_bytes()


def test_simulated_sessions_replay_within_quota():
    spec = SimulationSpec(
        n_students=10,
        n_questions=2,
        n_assignments=1,
        propensities={"planning": 0.6, "debugging": 0.6, "optimization": 0.2},
        seed=5,
    )
    sessions = replay_events(simulate_log(spec))
    assert sessions
    for state in sessions.values():
        assert check_quota(state, QuotaPolicy()) >= 0
        assert len(state.hints) <= 5


def test_zero_propensity_means_no_such_hints():
    spec = SimulationSpec(seed=2, propensities={"planning": 0.4, "debugging": 0.4, "optimization": 0.0})
    events = simulate_log(spec)
    assert all(e.payload.get("hint_type") != "optimization" for e in events)


def test_question_ids_split_assignments():
    assert question_ids(5, 2) == ["a1q1", "a1q2", "a1q3", "a2q1", "a2q2"]


def test_spec_validates_probabilities():
    with pytest.raises(ValueError):
        SimulationSpec(propensities={"planning": 1.5})


def test_fixture_replays_cleanly():
    events = paper_fixture_events()
    sessions = replay_events(events)
    assert all(len(s.hints) <= 5 for s in sessions.values())


# --- CLI ------------------------------------------------------------------------


def test_cli_simulate_and_analyze(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"n_students": 6, "n_questions": 4, "seed": 3}))
    log_path = tmp_path / "events.jsonl"
    assert main(["simulate", "--spec", str(spec_path), "--out", str(log_path)]) == 0
    assert log_path.exists()

    out_dir = tmp_path / "reports"
    code = main(
        ["analyze", "--log", str(log_path), "--out", str(out_dir), "--competency"]
    )
    assert code == 0
    produced = {p.name for p in out_dir.glob("*.json")}
    assert {
        "sequence-stats.json",
        "flows.json",
        "question-types.json",
        "engagement.json",
        "isolated.json",
        "performance.json",
        "competency-labels.json",
    } <= produced


def test_cli_fixture_paper_reproduces_aggregates(tmp_path):
    log_path = tmp_path / "fixture.jsonl"
    assert main(["fixture-paper", "--out", str(log_path)]) == 0
    out_dir = tmp_path / "reports"
    assert main(
        ["analyze", "--log", str(log_path), "--report", "sequence-stats", "--report", "isolated", "--out", str(out_dir)]
    ) == 0
    stats = json.loads((out_dir / "sequence-stats.json").read_text())
    assert stats["n_pairs"] == 366
    assert stats["total_hints"] == 725
    assert stats["type_totals"] == {"planning": 258, "debugging": 411, "optimization": 56}
    isolated = json.loads((out_dir / "isolated.json").read_text())
    assert isolated["optimization"]["isolated"] == 24
    assert isolated["optimization"]["total"] == 56


def test_cli_analyze_rejects_corrupt_log(tmp_path, capsys):
    log_path = tmp_path / "bad.jsonl"
    log_path.write_text('{"seq": 1, "at": 1, "kind": "consent_given", "payload": {"student_id": "s"}}\nnot json\n')
    assert main(["analyze", "--log", str(log_path), "--out", str(tmp_path)]) == 3
    assert "line 2" in capsys.readouterr().err


def test_cli_analyze_missing_log_is_config_error(tmp_path):
    assert main(["analyze", "--log", str(tmp_path / "none.jsonl"), "--out", str(tmp_path)]) == 2


def test_cli_analyze_empty_log_warns(tmp_path, capsys):
    log_path = tmp_path / "empty.jsonl"
    log_path.write_text("")
    assert main(["analyze", "--log", str(log_path), "--out", str(tmp_path / "r")]) == 0
    assert "empty" in capsys.readouterr().err


def test_cli_analyze_difficulty_reports(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"n_students": 8, "n_questions": 4, "n_assignments": 2, "seed": 9}))
    log_path = tmp_path / "events.jsonl"
    main(["simulate", "--spec", str(spec_path), "--out", str(log_path)])

    past = tmp_path / "past.json"
    past.write_text(
        json.dumps(
            {
                "assignments": {
                    "a1": {"a1q1": 0.9, "a1q2": 0.6},
                    "a2": {"a2q1": 0.8, "a2q2": 0.7},
                }
            }
        )
    )
    out_dir = tmp_path / "reports"
    code = main(
        [
            "analyze",
            "--log", str(log_path),
            "--report", "performance",
            "--difficulty", str(past),
            "--out", str(out_dir),
        ]
    )
    assert code == 0
    labels = json.loads((out_dir / "difficulty-labels.json").read_text())
    assert labels["labels"]["a1q1"] == "easier"
    assert labels["labels"]["a1q2"] == "harder"
    easier = json.loads((out_dir / "performance-easier.json").read_text())
    harder = json.loads((out_dir / "performance-harder.json").read_text())
    full = json.loads((out_dir / "performance.json").read_text())
    assert easier["n_pairs"] + harder["n_pairs"] == full["n_pairs"]


def test_cli_serve_bad_config_is_exit_2(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"questions_dir": str(tmp_path / "missing"), "event_log_path": str(tmp_path / "e.jsonl")}))
    assert main(["serve", "--config", str(config)]) == 2


def test_cli_serve_port_in_use_is_exit_2(tmp_path, add_question):
    import socket

    questions_dir = tmp_path / "questions"
    questions_dir.mkdir()
    (questions_dir / "a1q1.json").write_text(
        json.dumps(
            {
                "question_id": "a1q1",
                "assignment_id": "a1",
                "prompt_text": "p",
                "test_cases": [{"call": "f()", "expected": 1}],
            }
        )
    )
    script = tmp_path / "script.json"
    script.write_text(json.dumps({"default": "EXPLANATION: e\nHINT: h"}))

    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]

    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "listen_address": f"127.0.0.1:{port}",
                "questions_dir": str(questions_dir),
                "event_log_path": str(tmp_path / "events.jsonl"),
                "provider": {"provider_kind": "deterministic-mock", "script_path": str(script)},
            }
        )
    )
    try:
        assert main(["serve", "--config", str(config)]) == 2
    finally:
        blocker.close()

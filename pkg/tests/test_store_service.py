"""Event log store and HTTP service: atomicity, redaction, crash recovery."""

import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from hintkit.core import EventKind, HintRequest, HintType, Rating
from hintkit.errors import (
    ConsentRequired,
    GenerationFailed,
    ParseError,
    QuotaExhausted,
    UnknownHint,
    UnknownQuestion,
)
from hintkit.providers import MockProvider
from hintkit.service import HintService, create_app, session_projection
from hintkit.store import EventLogStore, read_event_log, write_event_log

from conftest import ADD_BUGGY, ADD_SOLUTION

SCRIPT = {
    "hint:planning": "EXPLANATION: plan\nHINT: What steps are needed?",
    "hint:debugging": "EXPLANATION: bug\nHINT: Check the operator.",
    "hint:optimization": "EXPLANATION: opt\nHINT: Try a builtin.",
    "repair": f"```python\n{ADD_SOLUTION}```",
    "optimize": f"```python\n{ADD_SOLUTION}```",
}


@pytest.fixture
def service(tmp_path, add_question):
    store = EventLogStore(tmp_path / "events.jsonl")
    return HintService(store, {add_question.question_id: add_question}, MockProvider(SCRIPT))


def planning_request(question_id="a1q1", student="s1"):
    return HintRequest(
        student_id=student,
        question_id=question_id,
        hint_type=HintType.PLANNING,
        reflection="stuck on the loop",
        code_snapshot=ADD_BUGGY,
    )


# --- store ---------------------------------------------------------------------


def test_store_assigns_monotone_seq_and_at(tmp_path):
    store = EventLogStore(tmp_path / "log.jsonl")
    first = store.append(EventKind.CONSENT_GIVEN, {"student_id": "s1"})
    second = store.append(
        EventKind.SUBMISSION_MADE, {"student_id": "s1", "question_id": "q1", "score": 0.5}
    )
    assert (first.seq, second.seq) == (1, 2)
    assert second.at >= first.at
    store.close()


def test_store_restart_reconstructs_state(tmp_path, add_question):
    path = tmp_path / "log.jsonl"
    store = EventLogStore(path)
    svc = HintService(store, {add_question.question_id: add_question}, MockProvider(SCRIPT))
    svc.give_consent("s1")
    svc.request_hint(planning_request())
    svc.submit("s1", "a1q1", ADD_SOLUTION)
    before = {
        f"{s}/{q}": session_projection(state, store.quota)
        for (s, q), state in store.sessions().items()
    }
    store.close()

    reopened = EventLogStore(path)
    after = {
        f"{s}/{q}": session_projection(state, reopened.quota)
        for (s, q), state in reopened.sessions().items()
    }
    assert json.dumps(before, sort_keys=True) == json.dumps(after, sort_keys=True)
    reopened.close()


def test_read_event_log_reports_bad_line(tmp_path):
    path = tmp_path / "log.jsonl"
    store = EventLogStore(path)
    store.append(EventKind.CONSENT_GIVEN, {"student_id": "s1"})
    store.close()
    with open(path, "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(ParseError) as excinfo:
        read_event_log(path)
    assert excinfo.value.line_number == 2


def test_write_read_round_trip(tmp_path):
    path = tmp_path / "log.jsonl"
    store = EventLogStore(path)
    store.append(EventKind.CONSENT_GIVEN, {"student_id": "s1"})
    store.append(
        EventKind.SUBMISSION_MADE, {"student_id": "s1", "question_id": "q1", "score": 1.0}
    )
    events = store.events()
    store.close()
    copy = tmp_path / "copy.jsonl"
    write_event_log(copy, events)
    assert read_event_log(copy) == events


# --- service flows ---------------------------------------------------------------


def test_hint_requires_consent(service):
    with pytest.raises(ConsentRequired):
        service.request_hint(planning_request())


def test_unknown_question_rejected(service):
    service.give_consent("s1")
    with pytest.raises(UnknownQuestion):
        service.request_hint(planning_request(question_id="nope"))


def test_consent_is_idempotent(service):
    service.give_consent("s1")
    service.give_consent("s1")
    consents = [e for e in service.store.events() if e.kind is EventKind.CONSENT_GIVEN]
    assert len(consents) == 1


def test_quota_runs_out_after_five(service):
    service.give_consent("s1")
    remaining_seen = []
    for _ in range(5):
        hint, remaining = service.request_hint(planning_request())
        remaining_seen.append(remaining)
        assert hint["hint_text"] == "What steps are needed?"
        assert "explanation" not in hint
    assert remaining_seen == [4, 3, 2, 1, 0]
    with pytest.raises(QuotaExhausted):
        service.request_hint(planning_request())


def test_failed_generation_does_not_consume_quota(service, add_question):
    class Offline:
        name = "offline"

        def complete(self, system_text, user_text, *, tag, attempt=0):
            from hintkit.errors import ProviderError

            raise ProviderError("down")

    service.give_consent("s1")
    service.provider = Offline()
    with pytest.raises(GenerationFailed):
        service.request_hint(planning_request())
    assert service.session("s1", "a1q1")["remaining_quota"] == 5
    assert len(service.store.state("s1", "a1q1").hints) == 0


def test_concurrent_requests_respect_last_slot(service):
    service.give_consent("s1")
    for _ in range(4):
        service.request_hint(planning_request())

    results = []

    def fire():
        try:
            results.append(service.request_hint(planning_request())[1])
        except QuotaExhausted:
            results.append("exhausted")

    with ThreadPoolExecutor(max_workers=2) as pool:
        list(pool.map(lambda _: fire(), range(2)))

    assert sorted(results, key=str) == [0, "exhausted"]
    assert len(service.store.state("s1", "a1q1").hints) == 5


def test_rating_last_wins(service):
    service.give_consent("s1")
    hint, _ = service.request_hint(planning_request())
    service.rate_hint(hint["hint_id"], Rating.UP)
    service.rate_hint(hint["hint_id"], Rating.DOWN)
    session = service.session("s1", "a1q1")
    assert session["hints"][0]["rating"] == "down"


def test_rating_unknown_hint(service):
    with pytest.raises(UnknownHint):
        service.rate_hint("missing", Rating.UP)


def test_revisits_count_each_expansion(service):
    service.give_consent("s1")
    hint, _ = service.request_hint(planning_request())
    assert service.revisit_hint(hint["hint_id"])["revisit_count"] == 1
    assert service.revisit_hint(hint["hint_id"])["revisit_count"] == 2


def test_submission_scores_prefix_of_passing_tests(service):
    # The harness short-circuits at the first failing case, so the score is
    # the passed prefix over the total.
    result = service.submit("s1", "a1q1", "def add(a, b):\n    return a + b if b < 30 else 0\n")
    assert result["score"] == pytest.approx(2 / 3)
    assert result["solved"] is False


def test_submission_highest_score_counts(service):
    service.submit("s1", "a1q1", ADD_BUGGY)
    result = service.submit("s1", "a1q1", ADD_SOLUTION)
    assert result["score"] == 1.0
    assert result["solved"] is True
    # A later worse submission does not unsolve the session.
    result = service.submit("s1", "a1q1", ADD_BUGGY)
    assert result["solved"] is True


def test_empty_session_projection(service):
    session = service.session("nobody", "a1q1")
    assert session["remaining_quota"] == 5
    assert session["hints"] == []
    assert session["consent_given"] is False


def test_session_projection_redacts_and_collapses(service):
    service.give_consent("s1")
    service.request_hint(planning_request())
    service.request_hint(planning_request())
    session = service.session("s1", "a1q1")
    assert len(session["hints"]) == 2
    assert all(h["collapsed"] is True for h in session["hints"])
    dumped = json.dumps(session)
    assert "explanation" not in dumped
    assert "code_snapshot" not in dumped


# --- HTTP surface ---------------------------------------------------------------


@pytest.fixture
def client(service):
    return TestClient(create_app(service))


def test_http_end_to_end(client):
    assert client.get("/api/health").json() == {"status": "ok"}

    body = {
        "student_id": "s9",
        "question_id": "a1q1",
        "hint_type": "planning",
        "reflection": "",
        "code": ADD_BUGGY,
    }
    assert client.post("/api/hints", json=body).status_code == 403  # consent first

    assert client.post("/api/consent", json={"student_id": "s9"}).json()["consented"] is True
    response = client.post("/api/hints", json=body)
    assert response.status_code == 200
    payload = response.json()
    assert payload["remaining_quota"] == 4
    hint_id = payload["hint"]["hint_id"]
    assert "explanation" not in payload["hint"]

    assert client.post(f"/api/hints/{hint_id}/rating", json={"rating": "up"}).status_code == 200
    assert client.post(f"/api/hints/{hint_id}/revisit").json()["revisit_count"] == 1
    assert client.post("/api/hints/zzz/revisit").status_code == 404

    submission = client.post(
        "/api/submissions",
        json={"student_id": "s9", "question_id": "a1q1", "code": ADD_SOLUTION},
    ).json()
    assert submission == {"score": 1.0, "solved": True, "status": "passed"}

    session = client.get("/api/sessions/s9/a1q1").json()
    assert session["solved"] is True
    assert session["hints"][0]["rating"] == "up"

    questions = client.get("/api/questions").json()
    assert questions[0]["question_id"] == "a1q1"
    assert "test_cases" not in questions[0]

    descriptions = client.get("/api/hint-type-descriptions").json()
    assert set(descriptions) == {"planning", "debugging", "optimization"}
    assert "steps" in descriptions["planning"]


def test_http_unknown_question_is_404(client):
    client.post("/api/consent", json={"student_id": "s1"})
    body = {"student_id": "s1", "question_id": "ghost", "hint_type": "debugging", "code": ""}
    assert client.post("/api/hints", json=body).status_code == 404


def test_static_client_served_when_configured(service, tmp_path):
    static_dir = tmp_path / "client"
    static_dir.mkdir()
    (static_dir / "index.html").write_text("<html><body>hintkit client</body></html>")
    client = TestClient(create_app(service, static_dir=str(static_dir)))
    assert client.get("/api/health").json() == {"status": "ok"}  # API keeps precedence
    page = client.get("/")
    assert page.status_code == 200
    assert "hintkit client" in page.text

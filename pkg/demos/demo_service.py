"""Drive the hint service in-process: consent gate, quota, event log replay.

Run with: python3 demos/demo_service.py
"""

import tempfile
from pathlib import Path

from hintkit import (
    EventLogStore,
    HintRequest,
    HintService,
    HintType,
    MockProvider,
    QuestionSpec,
    Rating,
    TestCase,
)
from hintkit.errors import ConsentRequired, QuotaExhausted

QUESTION = QuestionSpec(
    question_id="a1q1",
    assignment_id="a1",
    prompt_text="Write double(n) returning n * 2.",
    test_cases=(TestCase(call="double(4)", expected=8), TestCase(call="double(0)", expected=0)),
    time_limit=5.0,
)

SCRIPT = {
    "hint:planning": "EXPLANATION: one step\nHINT: What single expression doubles a number?",
    "default": "EXPLANATION: generic\nHINT: Where would you start?",
}


def request(student="s1"):
    return HintRequest(
        student_id=student,
        question_id=QUESTION.question_id,
        hint_type=HintType.PLANNING,
        reflection="not sure where to begin",
        code_snapshot="def double(n):\n    return n\n",
    )


def main():
    workdir = Path(tempfile.mkdtemp(prefix="hintkit-demo-"))
    log_path = workdir / "events.jsonl"
    store = EventLogStore(log_path)
    service = HintService(store, {QUESTION.question_id: QUESTION}, MockProvider(SCRIPT))

    print("1. A hint request before consent is rejected:")
    try:
        service.request_hint(request())
    except ConsentRequired:
        print("   ConsentRequired raised, as expected\n")

    print("2. After consent, hints flow until the quota runs out:")
    service.give_consent("s1")
    for _ in range(5):
        hint, remaining = service.request_hint(request())
        print(f"   got {hint['hint_id'][:8]}... remaining quota {remaining}")
    try:
        service.request_hint(request())
    except QuotaExhausted:
        print("   sixth request -> QuotaExhausted\n")

    print("3. Ratings are last-wins; revisits count every expansion:")
    hint_id = service.session("s1", "a1q1")["hints"][0]["hint_id"]
    service.rate_hint(hint_id, Rating.UP)
    service.rate_hint(hint_id, Rating.DOWN)
    service.revisit_hint(hint_id)
    service.revisit_hint(hint_id)
    first = service.session("s1", "a1q1")["hints"][0]
    print(f"   rating={first['rating']} revisit_count={first['revisit_count']}\n")

    print("4. Submissions score against the sandboxed harness:")
    partial = service.submit("s1", "a1q1", "def double(n):\n    return 8\n")
    print(f"   constant program: score {partial['score']:.2f} solved={partial['solved']}")
    solved = service.submit("s1", "a1q1", "def double(n):\n    return n * 2\n")
    print(f"   correct program:  score {solved['score']:.2f} solved={solved['solved']}\n")

    print("5. The log is plain JSONL; replaying it restores the same state:")
    lines = log_path.read_text().splitlines()
    print(f"   {len(lines)} events, first line:\n   {lines[0]}")
    store.close()
    reopened = EventLogStore(log_path)
    restored = HintService(reopened, {QUESTION.question_id: QUESTION}, MockProvider(SCRIPT))
    session = restored.session("s1", "a1q1")
    print(
        f"   after restart: {len(session['hints'])} hints, "
        f"remaining quota {session['remaining_quota']}, solved={session['solved']}"
    )
    reopened.close()


if __name__ == "__main__":
    main()

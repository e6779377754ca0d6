import pytest

from hintkit.core import Event, EventKind, HintType
from hintkit.sandbox import QuestionSpec, TestCase

ADD_SOLUTION = "def add(a, b):\n    return a + b\n"
ADD_BUGGY = "def add(a, b):\n    return a - b\n"


class LogBuilder:
    """Hand-build event streams with controlled seq and timestamps."""

    def __init__(self, start_at: int = 1_000_000):
        self.events: list[Event] = []
        self._seq = 0
        self._at = start_at
        self._hint_counter = 0

    def _emit(self, kind, payload, at=None):
        self._seq += 1
        self._at = max(self._at + 1, at if at is not None else 0)
        event = Event(seq=self._seq, at=self._at, kind=kind, payload=payload)
        self.events.append(event)
        return event

    def consent(self, student, at=None):
        return self._emit(EventKind.CONSENT_GIVEN, {"student_id": student}, at)

    def request(self, student, question, hint_type=HintType.PLANNING, at=None):
        return self._emit(
            EventKind.HINT_REQUESTED,
            {
                "student_id": student,
                "question_id": question,
                "hint_type": hint_type.value,
                "reflection": "",
            },
            at,
        )

    def deliver(self, student, question, hint_type=HintType.PLANNING, at=None, hint_id=None):
        if hint_id is None:
            self._hint_counter += 1
            hint_id = f"h{self._hint_counter:05d}"
        return self._emit(
            EventKind.HINT_DELIVERED,
            {
                "student_id": student,
                "question_id": question,
                "hint_id": hint_id,
                "hint_type": hint_type.value,
                "hint_text": f"hint for {question}",
                "explanation": "internal",
                "reflection": "",
                "code_snapshot": "",
                "requested_at": self._at,
                "metadata": {"provider": "deterministic-mock", "attempts": 0, "validation": "not-attempted"},
            },
            at,
        )

    def hint(self, student, question, hint_type=HintType.PLANNING, at=None):
        """Request followed by delivery, both at the same logical moment."""
        self.request(student, question, hint_type, at)
        return self.deliver(student, question, hint_type)

    def revisit(self, student, question, hint_id, at=None):
        return self._emit(
            EventKind.HINT_REVISITED,
            {"student_id": student, "question_id": question, "hint_id": hint_id},
            at,
        )

    def rate(self, student, question, hint_id, rating, at=None):
        return self._emit(
            EventKind.HINT_RATED,
            {"student_id": student, "question_id": question, "hint_id": hint_id, "rating": rating},
            at,
        )

    def submit(self, student, question, score, at=None):
        return self._emit(
            EventKind.SUBMISSION_MADE,
            {"student_id": student, "question_id": question, "score": score},
            at,
        )


@pytest.fixture
def add_question():
    return QuestionSpec(
        question_id="a1q1",
        assignment_id="a1",
        prompt_text="Write add(a, b) returning the sum of its arguments.",
        starter_code="def add(a, b):\n    ...\n",
        test_cases=(
            TestCase(call="add(1, 2)", expected=3),
            TestCase(call="add(-1, 1)", expected=0),
            TestCase(call="add(10, 32)", expected=42),
        ),
        time_limit=5.0,
    )


@pytest.fixture
def quick_question():
    # Single-case variant with a tight limit for adversarial programs.
    return QuestionSpec(
        question_id="a1q2",
        assignment_id="a1",
        prompt_text="Return the number seven.",
        test_cases=(TestCase(call="seven()", expected=7),),
        time_limit=1.5,
    )

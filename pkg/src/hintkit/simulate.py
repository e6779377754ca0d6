"""Synthetic cohorts for end-to-end testing, plus the published-aggregates fixture.

The simulator produces a deterministic event log honoring every session
invariant (consent before hints, quota cap, store-style seq/timestamps).
The fixture encodes only the aggregate counts reported for the deployed
system; its per-event timestamps are synthetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from random import Random
from typing import Mapping

from .core import Event, EventKind, HintType, replay_events
from .errors import ConfigError

_BASE_AT = 1_700_000_000_000  # fixed epoch so logs are byte-reproducible
MIN_MS = 60_000

DEFAULT_PROPENSITIES = {"planning": 0.25, "debugging": 0.35, "optimization": 0.05}
DEFAULT_SOLVE_PROBABILITIES = {
    "no_hint": 0.55,
    "planning": 0.85,
    "debugging": 0.70,
    "optimization": 0.60,
}


@dataclass(frozen=True)
class SimulationSpec:
    """Cohort shape and behavioral propensities for a synthetic log."""

    n_students: int = 20
    n_questions: int = 8
    n_assignments: int = 4
    propensities: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_PROPENSITIES)
    )
    solve_probabilities: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_SOLVE_PROBABILITIES)
    )
    seed: int = 0
    quota: int = 5

    def __post_init__(self):
        if self.n_students < 1 or self.n_questions < 1:
            raise ValueError("need at least one student and one question")
        if not 1 <= self.n_assignments <= self.n_questions:
            raise ValueError("n_assignments must be in [1, n_questions]")
        if self.quota < 1:
            raise ValueError("quota must be >= 1")
        for name, table in (
            ("propensities", self.propensities),
            ("solve_probabilities", self.solve_probabilities),
        ):
            for key, value in table.items():
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"{name}[{key}] = {value} outside [0, 1]")


def simulation_spec_from_dict(doc: Mapping) -> SimulationSpec:
    try:
        return SimulationSpec(
            n_students=doc.get("n_students", 20),
            n_questions=doc.get("n_questions", 8),
            n_assignments=doc.get("n_assignments", 4),
            propensities={**DEFAULT_PROPENSITIES, **doc.get("propensities", {})},
            solve_probabilities={
                **DEFAULT_SOLVE_PROBABILITIES,
                **doc.get("solve_probabilities", {}),
            },
            seed=doc.get("seed", 0),
            quota=doc.get("quota", 5),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid simulation spec: {exc}") from exc


def load_simulation_spec(path: str | Path) -> SimulationSpec:
    try:
        return simulation_spec_from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read simulation spec {path}: {exc}") from exc


def question_ids(n_questions: int, n_assignments: int) -> list[str]:
    """Question ids grouped into assignments: a1q1, a1q2, ..., a2q1, ..."""
    base, remainder = divmod(n_questions, n_assignments)
    ids = []
    for a in range(1, n_assignments + 1):
        count = base + (1 if a <= remainder else 0)
        ids.extend(f"a{a}q{i}" for i in range(1, count + 1))
    return ids


class _LogEmitter:
    """Store-style event construction: monotone seq and timestamps."""

    def __init__(self, start_at: int = _BASE_AT):
        self.events: list[Event] = []
        self._seq = 0
        self._at = start_at
        self._hint_counter = 0

    def advance(self, delta_ms: int) -> None:
        self._at += delta_ms

    def emit(self, kind: EventKind, payload: dict) -> Event:
        self._seq += 1
        event = Event(seq=self._seq, at=self._at, kind=kind, payload=payload)
        self.events.append(event)
        return event

    def next_hint_id(self) -> str:
        self._hint_counter += 1
        return f"h{self._hint_counter:06d}"


def _emit_hint(emitter: _LogEmitter, student: str, question: str, hint_type: HintType) -> str:
    emitter.emit(
        EventKind.HINT_REQUESTED,
        {
            "student_id": student,
            "question_id": question,
            "hint_type": hint_type.value,
            "reflection": "",
        },
    )
    hint_id = emitter.next_hint_id()
    emitter.emit(
        EventKind.HINT_DELIVERED,
        {
            "student_id": student,
            "question_id": question,
            "hint_id": hint_id,
            "hint_type": hint_type.value,
            "hint_text": f"synthetic {hint_type.value} hint",
            "explanation": "synthetic",
            "reflection": "",
            "code_snapshot": "",
            "requested_at": emitter.events[-1].at,
            "metadata": {"provider": "simulation", "attempts": 0, "validation": "not-attempted"},
        },
    )
    return hint_id


def simulate_log(spec: SimulationSpec) -> list[Event]:
    """Deterministic synthetic event log for the given cohort spec."""
    rng = Random(spec.seed)
    emitter = _LogEmitter()
    questions = question_ids(spec.n_questions, spec.n_assignments)
    students = [f"s{i:03d}" for i in range(1, spec.n_students + 1)]

    for student in students:
        consented = False
        for question in questions:
            emitter.advance(rng.randint(2, 20) * MIN_MS)
            sequence: list[HintType] = []
            for hint_type in HintType:
                propensity = spec.propensities.get(hint_type.value, 0.0)
                while len(sequence) < spec.quota and rng.random() < propensity:
                    sequence.append(hint_type)
            if sequence and not consented:
                emitter.emit(EventKind.CONSENT_GIVEN, {"student_id": student})
                consented = True
                emitter.advance(rng.randint(5, 60) * 1000)

            hint_ids = []
            for hint_type in sequence:
                hint_ids.append(_emit_hint(emitter, student, question, hint_type))
                emitter.advance(rng.randint(1, 15) * MIN_MS)

            for hint_id in hint_ids:
                for _ in range(rng.choice([0, 0, 0, 1, 1, 2])):
                    emitter.emit(
                        EventKind.HINT_REVISITED,
                        {"student_id": student, "question_id": question, "hint_id": hint_id},
                    )
                    emitter.advance(rng.randint(10, 300) * 1000)
                if rng.random() < 0.5:
                    rating = "up" if rng.random() < 0.7 else "down"
                    emitter.emit(
                        EventKind.HINT_RATED,
                        {
                            "student_id": student,
                            "question_id": question,
                            "hint_id": hint_id,
                            "rating": rating,
                        },
                    )
                    emitter.advance(rng.randint(5, 60) * 1000)

            if sequence:
                present = {t.value for t in sequence}
                probs = [spec.solve_probabilities.get(t, 0.5) for t in sorted(present)]
                solve_p = sum(probs) / len(probs)
            else:
                solve_p = spec.solve_probabilities.get("no_hint", 0.5)
            solved = rng.random() < solve_p

            if rng.random() < 0.1:
                continue  # pair with activity but no submission
            n_submissions = rng.randint(1, 3)
            for index in range(n_submissions):
                emitter.advance(rng.randint(2, 25) * MIN_MS)
                final = index == n_submissions - 1
                if final and solved:
                    score = 1.0
                else:
                    score = round(rng.uniform(0.0, 0.9), 2)
                emitter.emit(
                    EventKind.SUBMISSION_MADE,
                    {"student_id": student, "question_id": question, "score": score},
                )

    replay_events(emitter.events)  # self-check: invariants hold
    return emitter.events


# --- published-aggregates fixture ---------------------------------------------------

# Sequence archetypes chosen so the replayed log reproduces the deployed
# system's published aggregates exactly: 366 pairs, 725 hints split
# 258/411/56 across planning/debugging/optimization, and 24 optimization
# hints occurring in optimization-only sequences.
_P, _D, _O = HintType.PLANNING, HintType.DEBUGGING, HintType.OPTIMIZATION
_FIXTURE_ARCHETYPES: list[tuple[tuple[HintType, ...], int]] = [
    ((_O,), 24),
    ((_P, _O), 16),
    ((_D, _O), 16),
    ((_P, _D), 40),
    ((_P,), 150),
    ((_P, _P), 20),
    ((_P, _P, _P), 4),
    ((_D, _D, _D, _D), 67),
    ((_D, _D, _D), 29),
]

FIXTURE_STUDENTS = 76  # students who requested at least one hint
FIXTURE_QUESTIONS = 14  # four assignments with 4/4/3/3 questions


def fixture_question_ids() -> list[str]:
    ids = []
    for assignment, count in zip(("a1", "a2", "a3", "a4"), (4, 4, 3, 3)):
        ids.extend(f"{assignment}q{i}" for i in range(1, count + 1))
    return ids


def paper_fixture_events() -> list[Event]:
    """Synthetic log whose replay matches the published aggregate counts."""
    sequences: list[tuple[HintType, ...]] = []
    for archetype, count in _FIXTURE_ARCHETYPES:
        sequences.extend([archetype] * count)
    assert len(sequences) == 366

    questions = fixture_question_ids()
    emitter = _LogEmitter()
    consented: set[str] = set()
    solved_cycle = 0
    for index, sequence in enumerate(sequences):
        student = f"s{index % FIXTURE_STUDENTS + 1:03d}"
        question = questions[(index % FIXTURE_STUDENTS + (index // FIXTURE_STUDENTS) * 3) % FIXTURE_QUESTIONS]
        emitter.advance(9 * MIN_MS)
        if student not in consented:
            emitter.emit(EventKind.CONSENT_GIVEN, {"student_id": student})
            consented.add(student)
            emitter.advance(30_000)
        for hint_type in sequence:
            _emit_hint(emitter, student, question, hint_type)
            emitter.advance(7 * MIN_MS)
        emitter.advance(13 * MIN_MS)
        solved_cycle += 1
        score = 1.0 if solved_cycle % 10 < 8 else 0.5
        emitter.emit(
            EventKind.SUBMISSION_MADE,
            {"student_id": student, "question_id": question, "score": score},
        )

    replay_events(emitter.events)  # invariant self-check
    return emitter.events

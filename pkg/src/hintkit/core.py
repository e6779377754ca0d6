"""Domain types and the per-student-per-question session state machine.

Everything observable about a session is derived by folding events, in
sequence order, over an empty state. States are value-semantic: applying an
event returns a new state and never mutates the input, so a rejected event
leaves the caller's state untouched.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .errors import (
    ConsentMissing,
    OutOfOrder,
    QuotaExceeded,
    UnknownHint,
)

DEFAULT_QUOTA = 5


class HintType(str, Enum):
    """The three kinds of hint a student can request."""

    PLANNING = "planning"
    DEBUGGING = "debugging"
    OPTIMIZATION = "optimization"


class Rating(str, Enum):
    UP = "up"
    DOWN = "down"


class EventKind(str, Enum):
    """Stable serialization tags for the telemetry event union."""

    CONSENT_GIVEN = "consent_given"
    HINT_REQUESTED = "hint_requested"
    HINT_DELIVERED = "hint_delivered"
    HINT_REVISITED = "hint_revisited"
    HINT_RATED = "hint_rated"
    SUBMISSION_MADE = "submission_made"


def now_ms() -> int:
    """Current UTC time in epoch milliseconds (the log's timestamp unit)."""
    return int(time.time() * 1000)


@dataclass(frozen=True)
class QuotaPolicy:
    """Cap on delivered hints per (student, question) session."""

    max_hints_per_question: int = DEFAULT_QUOTA

    def __post_init__(self):
        if self.max_hints_per_question < 1:
            raise ValueError("max_hints_per_question must be >= 1")


@dataclass(frozen=True)
class HintRequest:
    """A student's request for one hint, carrying their code and reflection."""

    student_id: str
    question_id: str
    hint_type: HintType
    reflection: str = ""
    code_snapshot: str = ""
    requested_at: int = 0  # epoch ms; the store normalizes this on append

    def __post_init__(self):
        if not self.student_id:
            raise ValueError("student_id must be non-empty")
        if not self.question_id:
            raise ValueError("question_id must be non-empty")


@dataclass(frozen=True)
class GenerationMetadata:
    """How a hint came to be: provider, candidate attempts, validation."""

    provider: str = ""
    attempts: int = 0
    validation: str = "not-attempted"  # "valid" | "failed" | "not-attempted"
    candidate_runtime_s: float | None = None


@dataclass(frozen=True)
class Hint:
    """A delivered hint.

    ``explanation`` is the model's internal reasoning and is never included
    in student-facing payloads; only ``hint_text`` is shown.
    """

    hint_id: str
    request: HintRequest
    explanation: str
    hint_text: str
    delivered_at: int
    generation_metadata: GenerationMetadata = GenerationMetadata()


@dataclass(frozen=True)
class Event:
    """One telemetry record. ``seq`` is assigned by the store at append."""

    seq: int
    at: int
    kind: EventKind
    payload: Mapping


@dataclass(frozen=True)
class SessionState:
    """Replayed state of one (student, question) pair."""

    student_id: str
    question_id: str
    consent_given: bool = False
    hints: tuple[Hint, ...] = ()
    revisit_count_per_hint: Mapping[str, int] = field(default_factory=dict)
    ratings: Mapping[str, Rating] = field(default_factory=dict)
    submissions: tuple[tuple[int, float], ...] = ()
    solved: bool = False
    last_seq: int = 0

    def hint_ids(self) -> set[str]:
        return {h.hint_id for h in self.hints}

    def best_score(self) -> float:
        return max((s for _, s in self.submissions), default=0.0)


def empty_session(student_id: str, question_id: str, consent: bool = False) -> SessionState:
    return SessionState(student_id=student_id, question_id=question_id, consent_given=consent)


def check_quota(state: SessionState, policy: QuotaPolicy) -> int:
    """Remaining hint deliveries for this session, floored at zero."""
    return max(0, policy.max_hints_per_question - len(state.hints))


def hint_from_payload(payload: Mapping, delivered_at: int) -> Hint:
    """Rebuild a Hint value from a hint_delivered event payload."""
    meta = payload.get("metadata", {})
    return Hint(
        hint_id=payload["hint_id"],
        request=HintRequest(
            student_id=payload["student_id"],
            question_id=payload["question_id"],
            hint_type=HintType(payload["hint_type"]),
            reflection=payload.get("reflection", ""),
            code_snapshot=payload.get("code_snapshot", ""),
            requested_at=payload.get("requested_at", delivered_at),
        ),
        explanation=payload.get("explanation", ""),
        hint_text=payload["hint_text"],
        delivered_at=delivered_at,
        generation_metadata=GenerationMetadata(
            provider=meta.get("provider", ""),
            attempts=meta.get("attempts", 0),
            validation=meta.get("validation", "not-attempted"),
            candidate_runtime_s=meta.get("candidate_runtime_s"),
        ),
    )


def apply_event(
    state: SessionState, event: Event, policy: QuotaPolicy = QuotaPolicy()
) -> SessionState:
    """Fold one event into a session state, returning the updated state.

    Raises OutOfOrder when ``event.seq`` does not strictly increase,
    ConsentMissing for hint events before consent, and QuotaExceeded when a
    delivery would push the session past ``policy``. On any error the input
    state is still valid and unchanged.
    """
    if event.seq <= state.last_seq:
        raise OutOfOrder(
            f"event seq {event.seq} not greater than last applied {state.last_seq}"
        )
    p = event.payload
    kind = EventKind(event.kind)

    if kind is EventKind.CONSENT_GIVEN:
        if p.get("student_id") != state.student_id:
            raise ValueError("consent event belongs to a different student")
        return replace(state, consent_given=True, last_seq=event.seq)

    if kind is EventKind.SUBMISSION_MADE:
        _check_session(state, p)
        score = float(p["score"])
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"submission score {score} outside [0, 1]")
        subs = state.submissions + ((event.at, score),)
        return replace(
            state,
            submissions=subs,
            solved=state.solved or score == 1.0,
            last_seq=event.seq,
        )

    # All remaining kinds are hint events and require consent first.
    _check_session(state, p)
    if not state.consent_given:
        raise ConsentMissing(
            f"hint event {kind.value} for {state.student_id}/{state.question_id} "
            "before consent"
        )

    if kind is EventKind.HINT_REQUESTED:
        return replace(state, last_seq=event.seq)

    if kind is EventKind.HINT_DELIVERED:
        if len(state.hints) >= policy.max_hints_per_question:
            raise QuotaExceeded(
                f"session {state.student_id}/{state.question_id} already holds "
                f"{len(state.hints)} hints (max {policy.max_hints_per_question})"
            )
        hint = hint_from_payload(p, delivered_at=event.at)
        return replace(state, hints=state.hints + (hint,), last_seq=event.seq)

    hint_id = p["hint_id"]
    if hint_id not in state.hint_ids():
        raise UnknownHint(f"hint {hint_id} not in session")

    if kind is EventKind.HINT_REVISITED:
        counts = dict(state.revisit_count_per_hint)
        counts[hint_id] = counts.get(hint_id, 0) + 1
        return replace(state, revisit_count_per_hint=counts, last_seq=event.seq)

    if kind is EventKind.HINT_RATED:
        # Latest rating wins.
        ratings = dict(state.ratings)
        ratings[hint_id] = Rating(p["rating"])
        return replace(state, ratings=ratings, last_seq=event.seq)

    raise ValueError(f"unhandled event kind {event.kind}")


def _check_session(state: SessionState, payload: Mapping) -> None:
    if (
        payload.get("student_id") != state.student_id
        or payload.get("question_id") != state.question_id
    ):
        raise ValueError("event belongs to a different session")


def session_key(event: Event) -> tuple[str, str] | None:
    """(student, question) a session-scoped event belongs to, if any."""
    p = event.payload
    if EventKind(event.kind) is EventKind.CONSENT_GIVEN:
        return None
    return (p["student_id"], p["question_id"])


class StateAccumulator:
    """Incremental fold of a seq-ordered event stream into session states.

    Consent is per student: a consent event marks existing sessions of that
    student and seeds consent into sessions first seen afterwards. The store
    and the batch replay share this exact logic, so a restarted service
    reconstructs byte-identical projections.
    """

    def __init__(self, policy: QuotaPolicy = QuotaPolicy()):
        self.policy = policy
        self.sessions: dict[tuple[str, str], SessionState] = {}
        self.consented: set[str] = set()
        self.hint_index: dict[str, tuple[str, str]] = {}
        self.last_seq = 0
        self.last_at = 0

    def apply(self, event: Event) -> None:
        key = session_key(event)
        if key is None:
            student = event.payload["student_id"]
            self.consented.add(student)
            for (s, q), state in self.sessions.items():
                if s == student and not state.consent_given:
                    self.sessions[(s, q)] = apply_event(state, event, self.policy)
        else:
            state = self.sessions.get(key)
            if state is None:
                state = empty_session(key[0], key[1], consent=key[0] in self.consented)
            updated = apply_event(state, event, self.policy)
            self.sessions[key] = updated
            if EventKind(event.kind) is EventKind.HINT_DELIVERED:
                self.hint_index[event.payload["hint_id"]] = key
        self.last_seq = max(self.last_seq, event.seq)
        self.last_at = max(self.last_at, event.at)

    def state(self, student_id: str, question_id: str) -> SessionState:
        return self.sessions.get(
            (student_id, question_id),
            empty_session(student_id, question_id, consent=student_id in self.consented),
        )


def replay_events(
    events: Iterable[Event], policy: QuotaPolicy = QuotaPolicy()
) -> dict[tuple[str, str], SessionState]:
    """Rebuild every session by folding a seq-ordered event stream."""
    accumulator = StateAccumulator(policy)
    for event in events:
        accumulator.apply(event)
    return accumulator.sessions

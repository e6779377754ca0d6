"""HTTP API binding the session store, sandbox, and hint pipelines together.

Consent gates every hint path, quota is enforced atomically per session, and
all mutation flows through the append-only event log, so a restarted service
replays back into exactly the state it crashed from. Student-facing payloads
never include the model's internal explanation or candidate programs.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .core import (
    Event,
    EventKind,
    Hint,
    HintRequest,
    HintType,
    QuotaPolicy,
    Rating,
    SessionState,
    check_quota,
)
from .errors import (
    ConfigError,
    ConsentRequired,
    GenerationFailed,
    HintkitError,
    QuotaExceeded,
    QuotaExhausted,
    SandboxUnavailable,
    UnknownHint,
    UnknownQuestion,
)
from .generation import PipelineConfig, generate_hint
from .providers import CompletionProvider, ProviderConfig, provider_config_from_dict, provider_from_config
from .sandbox import QuestionSpec, load_questions, run_against_harness
from .store import EventLogStore

HINT_TYPE_DESCRIPTIONS = {
    HintType.PLANNING.value: (
        "A hint that helps you identify the steps needed to solve the question."
    ),
    HintType.DEBUGGING.value: (
        "A hint that helps you find and fix a bug in your current program."
    ),
    HintType.OPTIMIZATION.value: (
        "A hint that helps you improve your current program for better "
        "performance and readability."
    ),
}


@dataclass(frozen=True)
class ApiConfig:
    listen_address: str = "127.0.0.1:8765"
    questions_dir: str = "questions"
    event_log_path: str = "events.jsonl"
    quota: QuotaPolicy = QuotaPolicy()
    provider: ProviderConfig = ProviderConfig(script_path="mock_script.json")
    pipeline: PipelineConfig = PipelineConfig()
    static_dir: str | None = None  # serve a built web client from "/"

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"bad listen_address {self.listen_address!r}")
        return host, int(port)


def load_api_config(path: str | Path) -> ApiConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        quota = QuotaPolicy(doc.get("quota", {}).get("max_hints_per_question", 5))
        pipeline_doc = doc.get("pipeline", {})
        return ApiConfig(
            listen_address=doc.get("listen_address", "127.0.0.1:8765"),
            questions_dir=doc["questions_dir"],
            event_log_path=doc["event_log_path"],
            quota=quota,
            provider=provider_config_from_dict(doc.get("provider", {})),
            pipeline=PipelineConfig(
                max_candidate_attempts=pipeline_doc.get("max_candidate_attempts", 3),
                runtime_check_repeats=pipeline_doc.get("runtime_check_repeats", 1),
            ),
            static_dir=doc.get("static_dir"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def hint_payload(hint: Hint, *, collapsed: bool) -> dict:
    """Student-facing rendering of a hint: no explanation, no candidate code."""
    return {
        "hint_id": hint.hint_id,
        "hint_type": hint.request.hint_type.value,
        "hint_text": hint.hint_text,
        "reflection": hint.request.reflection,
        "requested_at": hint.request.requested_at,
        "delivered_at": hint.delivered_at,
        "collapsed": collapsed,
    }


def session_projection(state: SessionState, quota: QuotaPolicy) -> dict:
    """Client view of a session; widgets are collapsed by default on load."""
    hints = []
    for hint in state.hints:
        payload = hint_payload(hint, collapsed=True)
        rating = state.ratings.get(hint.hint_id)
        payload["rating"] = rating.value if rating is not None else "unrated"
        payload["revisit_count"] = state.revisit_count_per_hint.get(hint.hint_id, 0)
        hints.append(payload)
    return {
        "student_id": state.student_id,
        "question_id": state.question_id,
        "consent_given": state.consent_given,
        "remaining_quota": check_quota(state, quota),
        "solved": state.solved,
        "best_score": state.best_score(),
        "hints": hints,
        "submissions": [{"at": at, "score": score} for at, score in state.submissions],
    }


class HintService:
    """Application core behind the HTTP handlers (and directly usable in tests)."""

    def __init__(
        self,
        store: EventLogStore,
        questions: dict[str, QuestionSpec],
        provider: CompletionProvider,
        pipeline: PipelineConfig = PipelineConfig(),
    ):
        self.store = store
        self.questions = questions
        self.provider = provider
        self.pipeline = pipeline
        self._consent_lock = threading.Lock()

    @classmethod
    def from_config(cls, config: ApiConfig) -> "HintService":
        questions = load_questions(config.questions_dir)
        store = EventLogStore(config.event_log_path, config.quota)
        provider = provider_from_config(config.provider)
        return cls(store, questions, provider, config.pipeline)

    def give_consent(self, student_id: str) -> dict:
        if not student_id:
            raise ValueError("student_id must be non-empty")
        with self._consent_lock:
            if not self.store.consented(student_id):
                self.store.append(EventKind.CONSENT_GIVEN, {"student_id": student_id})
        return {"student_id": student_id, "consented": True}

    def request_hint(self, request: HintRequest) -> tuple[dict, int]:
        """Atomic consent + quota gate around the generation pipeline.

        The keyed lock covers only quota checks and appends; sandbox and
        provider calls run outside it so sessions don't serialize each other.
        """
        question = self.questions.get(request.question_id)
        if question is None:
            raise UnknownQuestion(request.question_id)
        if not self.store.consented(request.student_id):
            raise ConsentRequired(request.student_id)

        key_lock = self.store.session_lock(request.student_id, request.question_id)
        with key_lock:
            state = self.store.state(request.student_id, request.question_id)
            if check_quota(state, self.store.quota) <= 0:
                raise QuotaExhausted(request.question_id)
            requested = self.store.append(
                EventKind.HINT_REQUESTED,
                {
                    "student_id": request.student_id,
                    "question_id": request.question_id,
                    "hint_type": request.hint_type.value,
                    "reflection": request.reflection,
                },
            )

        request = replace(request, requested_at=requested.at)
        hint = generate_hint(request, question, self.provider, self.pipeline)

        with key_lock:
            try:
                delivered = self.store.append(EventKind.HINT_DELIVERED, _delivery_payload(hint))
            except QuotaExceeded as exc:
                # Lost a race against a concurrent delivery on the same session.
                raise QuotaExhausted(str(exc)) from exc
            state = self.store.state(request.student_id, request.question_id)
        shown = replace(hint, delivered_at=delivered.at)
        return hint_payload(shown, collapsed=False), check_quota(state, self.store.quota)

    def rate_hint(self, hint_id: str, rating: Rating) -> dict:
        key = self.store.find_hint(hint_id)
        if key is None:
            raise UnknownHint(hint_id)
        self.store.append(
            EventKind.HINT_RATED,
            {"student_id": key[0], "question_id": key[1], "hint_id": hint_id, "rating": rating.value},
        )
        return {"hint_id": hint_id, "rating": rating.value}

    def revisit_hint(self, hint_id: str) -> dict:
        key = self.store.find_hint(hint_id)
        if key is None:
            raise UnknownHint(hint_id)
        self.store.append(
            EventKind.HINT_REVISITED,
            {"student_id": key[0], "question_id": key[1], "hint_id": hint_id},
        )
        state = self.store.state(*key)
        return {"hint_id": hint_id, "revisit_count": state.revisit_count_per_hint.get(hint_id, 0)}

    def submit(self, student_id: str, question_id: str, code: str) -> dict:
        question = self.questions.get(question_id)
        if question is None:
            raise UnknownQuestion(question_id)
        outcome = run_against_harness(code, question)
        total = outcome.total_cases or len(question.test_cases)
        score = outcome.passed_cases / total if total else 0.0
        self.store.append(
            EventKind.SUBMISSION_MADE,
            {
                "student_id": student_id,
                "question_id": question_id,
                "score": score,
                "status": outcome.status.value,
            },
        )
        state = self.store.state(student_id, question_id)
        return {"score": score, "solved": state.solved, "status": outcome.status.value}

    def session(self, student_id: str, question_id: str) -> dict:
        return session_projection(self.store.state(student_id, question_id), self.store.quota)

    def question_list(self) -> list[dict]:
        # Test cases stay server-side; students see only the prompt surface.
        return [
            {
                "question_id": q.question_id,
                "assignment_id": q.assignment_id,
                "prompt_text": q.prompt_text,
                "starter_code": q.starter_code,
                "time_limit": q.time_limit,
            }
            for q in sorted(self.questions.values(), key=lambda q: q.question_id)
        ]


class ConsentBody(BaseModel):
    student_id: str = Field(min_length=1)


class HintBody(BaseModel):
    student_id: str = Field(min_length=1)
    question_id: str = Field(min_length=1)
    hint_type: HintType
    reflection: str = ""
    code: str = ""


class RatingBody(BaseModel):
    rating: Rating


class SubmissionBody(BaseModel):
    student_id: str = Field(min_length=1)
    question_id: str = Field(min_length=1)
    code: str


_HTTP_STATUS = {
    ConsentRequired: 403,
    QuotaExhausted: 409,
    UnknownQuestion: 404,
    UnknownHint: 404,
    GenerationFailed: 502,
    SandboxUnavailable: 503,
}


def _raise_http(exc: HintkitError):
    status = _HTTP_STATUS.get(type(exc), 500)
    raise HTTPException(status_code=status, detail=f"{type(exc).__name__}: {exc}")


def create_app(service: HintService, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="hintkit", version="0.1.0")
    app.state.service = service

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/consent")
    def post_consent(body: ConsentBody):
        return service.give_consent(body.student_id)

    @app.post("/api/hints")
    def post_hint(body: HintBody):
        request = HintRequest(
            student_id=body.student_id,
            question_id=body.question_id,
            hint_type=body.hint_type,
            reflection=body.reflection,
            code_snapshot=body.code,
        )
        try:
            hint, remaining = service.request_hint(request)
        except HintkitError as exc:
            _raise_http(exc)
        return {"hint": hint, "remaining_quota": remaining}

    @app.post("/api/hints/{hint_id}/rating")
    def post_rating(hint_id: str, body: RatingBody):
        try:
            return service.rate_hint(hint_id, body.rating)
        except HintkitError as exc:
            _raise_http(exc)

    @app.post("/api/hints/{hint_id}/revisit")
    def post_revisit(hint_id: str):
        try:
            return service.revisit_hint(hint_id)
        except HintkitError as exc:
            _raise_http(exc)

    @app.post("/api/submissions")
    def post_submission(body: SubmissionBody):
        try:
            return service.submit(body.student_id, body.question_id, body.code)
        except HintkitError as exc:
            _raise_http(exc)

    @app.get("/api/sessions/{student_id}/{question_id}")
    def get_session(student_id: str, question_id: str):
        return service.session(student_id, question_id)

    @app.get("/api/questions")
    def get_questions():
        return service.question_list()

    @app.get("/api/hint-type-descriptions")
    def get_hint_type_descriptions():
        return HINT_TYPE_DESCRIPTIONS

    if static_dir is not None:
        # Mounted last so /api keeps precedence; serves the built web client.
        from fastapi.staticfiles import StaticFiles

        if not Path(static_dir).is_dir():
            raise ConfigError(f"static_dir {static_dir} does not exist")
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="client")

    return app


def _delivery_payload(hint: Hint) -> dict:
    meta = hint.generation_metadata
    payload = {
        "student_id": hint.request.student_id,
        "question_id": hint.request.question_id,
        "hint_id": hint.hint_id,
        "hint_type": hint.request.hint_type.value,
        "hint_text": hint.hint_text,
        "explanation": hint.explanation,
        "reflection": hint.request.reflection,
        "code_snapshot": hint.request.code_snapshot,
        "requested_at": hint.request.requested_at,
        "metadata": {
            "provider": meta.provider,
            "attempts": meta.attempts,
            "validation": meta.validation,
        },
    }
    if meta.candidate_runtime_s is not None:
        payload["metadata"]["candidate_runtime_s"] = meta.candidate_runtime_s
    return payload

"""Two-phase hint generation: gather symbolic context, then prompt for a hint.

Phase one runs the student's program for its output and, depending on the
hint type, asks the provider for a repaired or optimized candidate program
that must pass the question's harness before it may enter any prompt.
Phase two assembles a guard-railed prompt from per-type templates, calls the
provider once, and splits the response into internal explanation and the
student-facing hint.
"""

from __future__ import annotations

import logging
import re
import uuid
from dataclasses import dataclass
from importlib import resources

from .core import GenerationMetadata, Hint, HintRequest, HintType, now_ms
from .errors import (
    EmptyResponse,
    GenerationFailed,
    ProviderError,
    SandboxUnavailable,
    TemplateMissing,
)
from .providers import CompletionProvider
from .sandbox import QuestionSpec, extract_buggy_output, measure_runtime, validate_candidate

log = logging.getLogger(__name__)

GUARDRAIL_CLAUSE = (
    "Do not reveal the complete solution or write full corrected code for "
    "the student, even if they ask for it directly."
)
RESPONSE_FORMAT = (
    'Think it through first: write your reasoning under "EXPLANATION:". '
    'Then write one short Socratic question for the student under "HINT:". '
    "Never place the full solution in either section."
)

EXPLANATION_MARKER = "EXPLANATION:"
HINT_MARKER = "HINT:"

SECTION_REFLECTION = "STUDENT REFLECTION:"
SECTION_PROGRAM_OUTPUT = "PROGRAM OUTPUT:"
SECTION_REPAIRED = "REPAIRED PROGRAM:"
SECTION_OPTIMIZED = "OPTIMIZED PROGRAM:"

_FENCED_BLOCK = re.compile(r"```[a-zA-Z0-9_+-]*\n(.*?)```", re.DOTALL)

VALIDATION_VALID = "valid"
VALIDATION_FAILED = "failed"
VALIDATION_NOT_ATTEMPTED = "not-attempted"


@dataclass(frozen=True)
class SymbolicInfo:
    """Execution- and model-derived context injected into prompts."""

    buggy_output: str
    repaired_program: str | None = None
    optimized_program: str | None = None
    candidate_attempts: int = 0
    candidate_runtime_s: float | None = None


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    hint_type: HintType


@dataclass(frozen=True)
class PipelineConfig:
    max_candidate_attempts: int = 3
    runtime_check_repeats: int = 1  # 0 disables the advisory timing run


def _load_template(name: str) -> str:
    try:
        return (resources.files("hintkit") / "templates" / name).read_text()
    except (FileNotFoundError, OSError) as exc:
        raise TemplateMissing(f"template {name} not found") from exc


def first_fenced_block(text: str) -> str | None:
    match = _FENCED_BLOCK.search(text)
    if not match:
        return None
    code = match.group(1).strip()
    return code or None


def _candidate_loop(
    provider: CompletionProvider,
    tag: str,
    user_text: str,
    question: QuestionSpec,
    max_attempts: int,
) -> tuple[str | None, int]:
    """Ask for program candidates until one passes the harness.

    Returns (validated candidate or None, attempts made). Provider failures
    abort the loop; generation then proceeds without this section.
    """
    system_text = _load_template("candidate_system.txt")
    attempts = 0
    for attempt in range(max_attempts):
        try:
            raw = provider.complete(system_text, user_text, tag=tag, attempt=attempt)
        except ProviderError as exc:
            log.warning("candidate request %s attempt %d failed: %s", tag, attempt + 1, exc)
            break
        attempts = attempt + 1
        candidate = first_fenced_block(raw)
        if candidate is None:
            continue
        valid, _ = validate_candidate(candidate, question)
        if valid:
            return candidate, attempts
    return None, attempts


def gather_symbolic_info(
    request: HintRequest,
    question: QuestionSpec,
    provider: CompletionProvider,
    config: PipelineConfig = PipelineConfig(),
) -> SymbolicInfo:
    """Phase one: program output plus a validated candidate where the type needs one."""
    buggy_output = extract_buggy_output(request.code_snapshot, question)

    if request.hint_type is HintType.PLANNING:
        return SymbolicInfo(buggy_output=buggy_output)

    fill = {
        "question": question.prompt_text,
        "student_code": request.code_snapshot,
        "buggy_output": buggy_output,
    }
    if request.hint_type is HintType.DEBUGGING:
        user_text = _load_template("candidate_repair_user.txt").format(**fill)
        repaired, attempts = _candidate_loop(
            provider, "repair", user_text, question, config.max_candidate_attempts
        )
        return SymbolicInfo(
            buggy_output=buggy_output,
            repaired_program=repaired,
            candidate_attempts=attempts,
        )

    user_text = _load_template("candidate_optimize_user.txt").format(**fill)
    optimized, attempts = _candidate_loop(
        provider, "optimize", user_text, question, config.max_candidate_attempts
    )
    runtime = None
    if optimized is not None and config.runtime_check_repeats > 0:
        # Advisory only: correctness is the gate, the timing is just logged.
        try:
            runtime = measure_runtime(optimized, question, repeats=config.runtime_check_repeats)
            log.info("optimized candidate runtime: %.3fs", runtime)
        except SandboxUnavailable:
            pass
    return SymbolicInfo(
        buggy_output=buggy_output,
        optimized_program=optimized,
        candidate_attempts=attempts,
        candidate_runtime_s=runtime,
    )


def _reflection_section(reflection: str) -> str:
    if not reflection:
        return ""
    return f"{SECTION_REFLECTION}\n{reflection}\n\n"


def _program_section(header: str, code: str | None) -> str:
    if code is None:
        return ""
    return f"{header}\n```python\n{code}\n```\n\n"


def assemble_prompt(
    request: HintRequest, question: QuestionSpec, info: SymbolicInfo
) -> PromptBundle:
    """Phase two, step one: deterministic text assembly from per-type templates."""
    hint_type = request.hint_type
    if hint_type is HintType.PLANNING and (info.repaired_program or info.optimized_program):
        raise ValueError("planning prompts must not carry candidate programs")
    if hint_type is HintType.DEBUGGING and info.optimized_program:
        raise ValueError("debugging prompts must not carry an optimized program")
    if hint_type is HintType.OPTIMIZATION and info.repaired_program:
        raise ValueError("optimization prompts must not carry a repaired program")

    system_text = _load_template(f"{hint_type.value}_system.txt").format(
        guardrail=GUARDRAIL_CLAUSE, response_format=RESPONSE_FORMAT
    )
    fill = {
        "question": question.prompt_text,
        "student_code": request.code_snapshot,
        "reflection_section": _reflection_section(request.reflection),
        "buggy_output": info.buggy_output,
    }
    if hint_type is HintType.DEBUGGING:
        fill["repaired_section"] = _program_section(SECTION_REPAIRED, info.repaired_program)
    elif hint_type is HintType.OPTIMIZATION:
        fill["optimized_section"] = _program_section(SECTION_OPTIMIZED, info.optimized_program)
    user_text = _load_template(f"{hint_type.value}_user.txt").format(**fill)
    return PromptBundle(system_text=system_text, user_text=user_text, hint_type=hint_type)


def parse_response(raw: str) -> tuple[str, str]:
    """Split a provider response into (explanation, hint_text).

    Splits on the EXPLANATION:/HINT: markers the templates demand; a
    response without markers becomes all hint_text with an empty
    explanation. Raises EmptyResponse when no hint text remains.
    """
    if not raw or not raw.strip():
        raise EmptyResponse("provider returned an empty response")
    idx = raw.find(HINT_MARKER)
    if idx < 0:
        return "", raw.strip()
    hint_text = raw[idx + len(HINT_MARKER) :].strip()
    if not hint_text:
        raise EmptyResponse("response carries an empty hint section")
    head = raw[:idx]
    expl_idx = head.find(EXPLANATION_MARKER)
    if expl_idx >= 0:
        head = head[expl_idx + len(EXPLANATION_MARKER) :]
    return head.strip(), hint_text


def generate_hint(
    request: HintRequest,
    question: QuestionSpec,
    provider: CompletionProvider,
    config: PipelineConfig = PipelineConfig(),
) -> Hint:
    """Run the full pipeline for one request and return the delivered hint.

    Consent and quota are the caller's responsibility (the service checks
    them atomically around this call). Raises GenerationFailed when the
    provider cannot produce a usable hint; no quota is consumed in that case.
    """
    info = gather_symbolic_info(request, question, provider, config)
    bundle = assemble_prompt(request, question, info)
    try:
        raw = provider.complete(
            bundle.system_text,
            bundle.user_text,
            tag=f"hint:{request.hint_type.value}",
        )
        explanation, hint_text = parse_response(raw)
    except (ProviderError, EmptyResponse) as exc:
        raise GenerationFailed(str(exc)) from exc

    if request.hint_type is HintType.DEBUGGING:
        validated = info.repaired_program is not None
    elif request.hint_type is HintType.OPTIMIZATION:
        validated = info.optimized_program is not None
    else:
        validated = None  # planning has no candidate phase
    if validated is None:
        validation = VALIDATION_NOT_ATTEMPTED
    else:
        validation = VALIDATION_VALID if validated else VALIDATION_FAILED

    return Hint(
        hint_id=uuid.uuid4().hex,
        request=request,
        explanation=explanation,
        hint_text=hint_text,
        delivered_at=now_ms(),
        generation_metadata=GenerationMetadata(
            provider=provider.name,
            attempts=info.candidate_attempts,
            validation=validation,
            candidate_runtime_s=info.candidate_runtime_s,
        ),
    )

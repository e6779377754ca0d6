"""Hint pipelines: symbolic gathering, prompt contracts, response parsing."""

import pytest

from hintkit.core import HintRequest, HintType
from hintkit.errors import EmptyResponse, GenerationFailed, ProviderError
from hintkit.generation import (
    GUARDRAIL_CLAUSE,
    SECTION_OPTIMIZED,
    SECTION_PROGRAM_OUTPUT,
    SECTION_REFLECTION,
    SECTION_REPAIRED,
    PipelineConfig,
    SymbolicInfo,
    assemble_prompt,
    first_fenced_block,
    gather_symbolic_info,
    generate_hint,
    parse_response,
)
from hintkit.providers import MockProvider
from hintkit.sandbox import PASSED_ALL_TESTS_MARKER

from conftest import ADD_BUGGY, ADD_SOLUTION

BROKEN_CANDIDATE = "```python\ndef add(a, b):\n    return a * b\n```"
VALID_CANDIDATE = f"```python\n{ADD_SOLUTION}```"

HINT_SCRIPT = {
    "hint:planning": "EXPLANATION: needs decomposition\nHINT: What are the sub-steps?",
    "hint:debugging": "EXPLANATION: wrong operator\nHINT: Which operator combines the inputs?",
    "hint:optimization": "EXPLANATION: fine already\nHINT: Could a builtin do this?",
}


def request(hint_type, code=ADD_BUGGY, reflection=""):
    return HintRequest(
        student_id="s1",
        question_id="a1q1",
        hint_type=hint_type,
        reflection=reflection,
        code_snapshot=code,
        requested_at=1000,
    )


def test_planning_gathers_output_only(add_question):
    provider = MockProvider(HINT_SCRIPT)
    info = gather_symbolic_info(request(HintType.PLANNING), add_question, provider)
    assert info.buggy_output
    assert info.repaired_program is None
    assert info.optimized_program is None
    assert info.candidate_attempts == 0


def test_debugging_retries_until_candidate_validates(add_question):
    provider = MockProvider({**HINT_SCRIPT, "repair": [BROKEN_CANDIDATE, VALID_CANDIDATE]})
    info = gather_symbolic_info(request(HintType.DEBUGGING), add_question, provider)
    assert info.repaired_program == ADD_SOLUTION.strip()
    assert info.candidate_attempts == 2


def test_optimization_exhausts_retries_and_degrades(add_question):
    provider = MockProvider({**HINT_SCRIPT, "optimize": [BROKEN_CANDIDATE] * 3})
    info = gather_symbolic_info(request(HintType.OPTIMIZATION), add_question, provider)
    assert info.optimized_program is None
    assert info.candidate_attempts == 3
    # The pipeline still produces a hint from the degraded context.
    bundle = assemble_prompt(request(HintType.OPTIMIZATION), add_question, info)
    assert SECTION_OPTIMIZED not in bundle.user_text


def test_prompt_sections_by_type(add_question):
    debug_info = SymbolicInfo(buggy_output="status: failed", repaired_program="def add(a, b): ...")
    debugging = assemble_prompt(request(HintType.DEBUGGING), add_question, debug_info)
    assert SECTION_PROGRAM_OUTPUT in debugging.user_text
    assert SECTION_REPAIRED in debugging.user_text

    planning = assemble_prompt(
        request(HintType.PLANNING), add_question, SymbolicInfo(buggy_output="status: failed")
    )
    assert SECTION_REPAIRED not in planning.user_text
    assert SECTION_OPTIMIZED not in planning.user_text

    optimizing = assemble_prompt(
        request(HintType.OPTIMIZATION),
        add_question,
        SymbolicInfo(buggy_output=PASSED_ALL_TESTS_MARKER, optimized_program="def add(a, b): ..."),
    )
    assert SECTION_OPTIMIZED in optimizing.user_text
    assert SECTION_REPAIRED not in optimizing.user_text


def test_guardrail_clause_in_every_system_text(add_question):
    for hint_type in HintType:
        bundle = assemble_prompt(
            request(hint_type), add_question, SymbolicInfo(buggy_output="out")
        )
        assert GUARDRAIL_CLAUSE in bundle.system_text


def test_reflection_included_verbatim(add_question):
    text = "I think my loop never runs?"
    bundle = assemble_prompt(
        request(HintType.PLANNING, reflection=text),
        add_question,
        SymbolicInfo(buggy_output="out"),
    )
    assert text in bundle.user_text
    assert SECTION_REFLECTION in bundle.user_text


def test_reflection_section_omitted_when_empty(add_question):
    bundle = assemble_prompt(
        request(HintType.PLANNING), add_question, SymbolicInfo(buggy_output="out")
    )
    assert SECTION_REFLECTION not in bundle.user_text


def test_mismatched_info_rejected(add_question):
    with pytest.raises(ValueError):
        assemble_prompt(
            request(HintType.PLANNING),
            add_question,
            SymbolicInfo(buggy_output="out", repaired_program="x"),
        )


def test_parse_response_with_markers():
    explanation, hint = parse_response("EXPLANATION: x off by one\nHINT: What does range exclude?")
    assert explanation == "x off by one"
    assert hint == "What does range exclude?"


def test_parse_response_without_markers_is_all_hint():
    explanation, hint = parse_response("Just try smaller inputs first.")
    assert explanation == ""
    assert hint == "Just try smaller inputs first."


def test_parse_response_empty_variants():
    with pytest.raises(EmptyResponse):
        parse_response("")
    with pytest.raises(EmptyResponse):
        parse_response("   \n ")
    with pytest.raises(EmptyResponse):
        parse_response("EXPLANATION: something\nHINT:")


def test_first_fenced_block():
    assert first_fenced_block("pre\n```python\ncode here\n```\npost") == "code here"
    assert first_fenced_block("no fences") is None
    assert first_fenced_block("```\n\n```") is None


def test_generate_hint_mock_round_trip(add_question):
    provider = MockProvider(HINT_SCRIPT)
    hint = generate_hint(request(HintType.PLANNING), add_question, provider)
    assert hint.hint_text == "What are the sub-steps?"
    assert hint.explanation == "needs decomposition"
    assert hint.generation_metadata.provider == "deterministic-mock"
    assert hint.generation_metadata.validation == "not-attempted"


def test_generate_hint_content_is_deterministic(add_question):
    provider = MockProvider({**HINT_SCRIPT, "repair": [BROKEN_CANDIDATE, VALID_CANDIDATE]})
    req = request(HintType.DEBUGGING)
    first = generate_hint(req, add_question, provider)
    second = generate_hint(req, add_question, provider)
    assert first.hint_text == second.hint_text
    assert first.explanation == second.explanation
    assert first.generation_metadata == second.generation_metadata


def test_generate_debugging_hint_on_passing_code(add_question):
    provider = MockProvider({**HINT_SCRIPT, "repair": VALID_CANDIDATE})
    info = gather_symbolic_info(request(HintType.DEBUGGING, code=ADD_SOLUTION), add_question, provider)
    assert info.buggy_output == PASSED_ALL_TESTS_MARKER
    hint = generate_hint(request(HintType.DEBUGGING, code=ADD_SOLUTION), add_question, provider)
    assert hint.hint_text
    assert hint.generation_metadata.validation == "valid"


def test_generate_hint_provider_offline(add_question):
    class OfflineProvider:
        name = "offline"

        def complete(self, system_text, user_text, *, tag, attempt=0):
            raise ProviderError("connection refused")

    with pytest.raises(GenerationFailed):
        generate_hint(request(HintType.PLANNING), add_question, OfflineProvider())


def test_candidate_provider_failure_degrades_gracefully(add_question):
    class FlakyProvider:
        """Candidate calls fail; the hint call still answers."""

        name = "flaky"

        def complete(self, system_text, user_text, *, tag, attempt=0):
            if tag == "repair":
                raise ProviderError("boom")
            return "EXPLANATION: e\nHINT: h"

    hint = generate_hint(request(HintType.DEBUGGING), add_question, FlakyProvider())
    assert hint.hint_text == "h"
    assert hint.generation_metadata.validation == "failed"
    assert hint.generation_metadata.attempts == 0


def test_optimization_records_advisory_runtime(add_question):
    provider = MockProvider({**HINT_SCRIPT, "optimize": VALID_CANDIDATE})
    info = gather_symbolic_info(
        request(HintType.OPTIMIZATION, code=ADD_SOLUTION),
        add_question,
        provider,
        PipelineConfig(runtime_check_repeats=1),
    )
    assert info.optimized_program == ADD_SOLUTION.strip()
    assert info.candidate_runtime_s is not None and info.candidate_runtime_s > 0

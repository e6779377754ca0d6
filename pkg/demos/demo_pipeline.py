"""Walk through the three hint pipelines against a deterministic mock provider.

Run with: python3 demos/demo_pipeline.py
"""

from hintkit import (
    HintRequest,
    HintType,
    MockProvider,
    QuestionSpec,
    TestCase,
    gather_symbolic_info,
    generate_hint,
)
from hintkit.generation import assemble_prompt

QUESTION = QuestionSpec(
    question_id="a1q1",
    assignment_id="a1",
    prompt_text="Write count_vowels(text) returning how many vowels appear in text.",
    starter_code="def count_vowels(text):\n    ...\n",
    test_cases=(
        TestCase(call="count_vowels('abc')", expected=1),
        TestCase(call="count_vowels('aeiou')", expected=5),
        TestCase(call="count_vowels('xyz')", expected=0),
    ),
    time_limit=5.0,
)

BUGGY_STUDENT_CODE = """\
def count_vowels(text):
    count = 0
    for ch in text:
        if ch in 'aeiou':
            count = 1   # oops: should accumulate
    return count
"""

REPAIRED = """\
```python
def count_vowels(text):
    count = 0
    for ch in text:
        if ch in 'aeiou':
            count += 1
    return count
```
"""

SCRIPT = {
    # First repair candidate is broken on purpose; the pipeline validates
    # candidates against the harness and retries.
    "repair": ["```python\ndef count_vowels(text):\n    return 1\n```", REPAIRED],
    "optimize": "```python\ndef count_vowels(text):\n    return sum(ch in 'aeiou' for ch in text)\n```",
    "hint:planning": (
        "EXPLANATION: The task decomposes into iterate, test membership, accumulate.\n"
        "HINT: What three smaller steps would turn one character into a running total?"
    ),
    "hint:debugging": (
        "EXPLANATION: The counter is assigned instead of incremented.\n"
        "HINT: After the second vowel, what value does your count variable hold?"
    ),
    "hint:optimization": (
        "EXPLANATION: A generator expression avoids the manual loop.\n"
        "HINT: Which builtin could replace your explicit counter loop?"
    ),
}


def main():
    provider = MockProvider(SCRIPT)

    for hint_type in HintType:
        request = HintRequest(
            student_id="demo-student",
            question_id=QUESTION.question_id,
            hint_type=hint_type,
            reflection="My count looks stuck at one." if hint_type is HintType.DEBUGGING else "",
            code_snapshot=BUGGY_STUDENT_CODE,
        )
        print("=" * 72)
        print(f"{hint_type.value.upper()} pipeline")
        print("=" * 72)

        info = gather_symbolic_info(request, QUESTION, provider)
        print(f"buggy output (first line): {info.buggy_output.splitlines()[0]}")
        print(f"candidate attempts: {info.candidate_attempts}")
        if info.repaired_program:
            print("validated repair obtained")
        if info.optimized_program:
            print("validated optimized program obtained")

        bundle = assemble_prompt(request, QUESTION, info)
        print("\n--- user prompt sent to the provider ---")
        print(bundle.user_text)

        hint = generate_hint(request, QUESTION, provider)
        print("--- delivered to the student ---")
        print(f"hint: {hint.hint_text}")
        print(f"(internal explanation, never shown: {hint.explanation})")
        print()


if __name__ == "__main__":
    main()

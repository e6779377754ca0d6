"""Sandboxed execution of student programs against a question's test harness.

Each run spawns one isolated child process (own session, temp working
directory, resource limits, best-effort network block) that executes the
student source and evaluates the question's test cases in order. The child
reports through a result file; the parent enforces the wall-clock limit and
kills the whole process group on timeout, so runaway or forking programs can
never take the service down with them.

When the service runs as root the child drops to nobody, which also makes
the process-count limit effective against fork storms.
"""

from __future__ import annotations

import json
import os
import resource
import signal
import statistics
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import ConfigError, NotCorrect, SandboxUnavailable

PASSED_ALL_TESTS_MARKER = "PROGRAM PASSED ALL TESTS"
TRUNCATION_MARKER = "\n...[output truncated]"
BUGGY_OUTPUT_CAP = 4096  # bytes of rendered output embedded into prompts
CAPTURE_CAP = 65536  # bytes of raw stdout/stderr kept per run

_NOBODY_UID = 65534
_NOBODY_GID = 65534
_CHILD_NPROC = 32

_worker_slots = threading.BoundedSemaphore(os.cpu_count() or 1)


def set_worker_cap(n: int) -> None:
    """Cap concurrent sandbox executions (default: host core count)."""
    global _worker_slots
    if n < 1:
        raise ValueError("worker cap must be >= 1")
    _worker_slots = threading.BoundedSemaphore(n)


class ExecutionStatus(str, Enum):
    PASSED = "passed"
    FAILED_ASSERTION = "failed_assertion"
    RAISED_ERROR = "raised_error"
    TIMED_OUT = "timed_out"
    CRASHED = "crashed"


@dataclass(frozen=True)
class TestCase:
    """One harness check: an invocation expression and its expected value."""

    __test__ = False  # not a pytest class, despite the name

    call: str
    expected: object
    comparison: str = "exact"  # "exact" | "approx"
    tolerance: float = 1e-6


@dataclass(frozen=True)
class QuestionSpec:
    question_id: str
    assignment_id: str
    prompt_text: str = ""
    starter_code: str = ""
    test_cases: tuple[TestCase, ...] = ()
    time_limit: float = 10.0
    memory_limit: int = 512 * 2**20

    def __post_init__(self):
        if not self.test_cases:
            raise ValueError("a question needs at least one test case")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class ExecutionOutcome:
    status: ExecutionStatus
    stdout_text: str = ""
    stderr_text: str = ""
    failure_detail: str = ""
    wall_time: float = 0.0
    passed_cases: int = 0
    total_cases: int = 0


def question_from_dict(doc: Mapping) -> QuestionSpec:
    try:
        cases = tuple(
            TestCase(
                call=c["call"],
                expected=c.get("expected"),
                comparison=c.get("comparison", "exact"),
                tolerance=c.get("tolerance", 1e-6),
            )
            for c in doc["test_cases"]
        )
        return QuestionSpec(
            question_id=doc["question_id"],
            assignment_id=doc.get("assignment_id", ""),
            prompt_text=doc.get("prompt_text", ""),
            starter_code=doc.get("starter_code", ""),
            test_cases=cases,
            time_limit=doc.get("time_limit", 10.0),
            memory_limit=doc.get("memory_limit", 512 * 2**20),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid question document: {exc}") from exc


def load_questions(directory: str | Path) -> dict[str, QuestionSpec]:
    """Load every *.json question document under a directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"questions directory {directory} does not exist")
    questions = {}
    for path in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        spec = question_from_dict(doc)
        questions[spec.question_id] = spec
    return questions


# The child process runs this standalone script with `python -I`; it never
# imports this package. Student stdout/stderr flow through the process pipes
# while the harness verdict goes to a separate result file, written only by
# the original pid so forked copies cannot corrupt it.
_RUNNER_SOURCE = r"""
import json, os, sys, traceback

def _block_network():
    try:
        import socket
        def _blocked(*args, **kwargs):
            raise OSError("network access is disabled in the sandbox")
        socket.socket = _blocked
        socket.create_connection = _blocked
    except Exception:
        pass

def _normalize(value):
    if isinstance(value, tuple):
        return [_normalize(v) for v in value]
    if isinstance(value, list):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        return {k: _normalize(v) for k, v in value.items()}
    return value

def _approx_equal(got, want, tol):
    if isinstance(want, bool) or isinstance(got, bool):
        return got == want
    if isinstance(want, (int, float)) and isinstance(got, (int, float)):
        return abs(got - want) <= tol
    if isinstance(want, list) and isinstance(got, list):
        return len(got) == len(want) and all(
            _approx_equal(g, w, tol) for g, w in zip(got, want)
        )
    if isinstance(want, dict) and isinstance(got, dict):
        return got.keys() == want.keys() and all(
            _approx_equal(got[k], want[k], tol) for k in want
        )
    return got == want

def main():
    spec_path, result_path = sys.argv[1], sys.argv[2]
    root_pid = os.getpid()
    with open(spec_path) as fh:
        spec = json.load(fh)
    cases = spec["cases"]
    result = {"status": "crashed", "passed": 0, "total": len(cases), "detail": ""}
    _block_network()
    namespace = {"__name__": "student_solution"}
    try:
        try:
            exec(compile(spec["code"], "solution.py", "exec"), namespace)
        except (MemoryError, OSError) as exc:
            result["status"] = "crashed"
            result["detail"] = "resource exhaustion while loading: %r" % (exc,)
            return
        except BaseException:
            result["status"] = "raised_error"
            result["detail"] = "error while loading program:\n" + traceback.format_exc(limit=8)
            return
        passed = 0
        for case in cases:
            call = case["call"]
            try:
                value = eval(call, namespace)
            except (MemoryError, OSError) as exc:
                result["status"] = "crashed"
                result["detail"] = "resource exhaustion in %s: %r" % (call, exc)
                result["passed"] = passed
                return
            except BaseException:
                result["status"] = "raised_error"
                result["detail"] = "error in %s:\n%s" % (call, traceback.format_exc(limit=8))
                result["passed"] = passed
                return
            got = _normalize(value)
            want = case["expected"]
            if case.get("comparison") == "approx":
                ok = _approx_equal(got, want, case.get("tolerance", 1e-6))
            else:
                ok = got == want
            if not ok:
                result["status"] = "failed_assertion"
                result["detail"] = "%s returned %r, expected %r" % (call, got, want)
                result["passed"] = passed
                return
            passed += 1
        result["status"] = "passed"
        result["passed"] = passed
    finally:
        if os.getpid() == root_pid:
            with open(result_path, "w") as fh:
                json.dump(result, fh)
        else:
            os._exit(0)

main()
"""


def _child_limits(memory_bytes: int, drop_privileges: bool):
    def preexec():
        resource.setrlimit(resource.RLIMIT_CORE, (0, 0))
        try:
            resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))
        except (ValueError, OSError):
            pass
        if drop_privileges:
            resource.setrlimit(resource.RLIMIT_NPROC, (_CHILD_NPROC, _CHILD_NPROC))
            os.setgroups([])
            os.setgid(_NOBODY_GID)
            os.setuid(_NOBODY_UID)

    return preexec


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        pass


def _drain(proc: subprocess.Popen) -> tuple[bytes, bytes]:
    try:
        return proc.communicate(timeout=3)
    except subprocess.TimeoutExpired:
        _kill_group(proc)
        try:
            return proc.communicate(timeout=2)
        except subprocess.TimeoutExpired:
            for stream in (proc.stdout, proc.stderr):
                if stream is not None:
                    stream.close()
            proc.wait()
            return b"", b""


def _truncate(text: str, cap: int) -> str:
    if len(text) <= cap:
        return text
    return text[:cap] + TRUNCATION_MARKER


def run_against_harness(code: str, question: QuestionSpec) -> ExecutionOutcome:
    """Execute student code against the question's test cases, isolated.

    Never raises for anything the student program does; only
    SandboxUnavailable when the host cannot spawn the child at all.
    """
    with _worker_slots:
        return _run_once(code, question)


def _run_once(code: str, question: QuestionSpec) -> ExecutionOutcome:
    drop = os.geteuid() == 0
    with tempfile.TemporaryDirectory(prefix="hintkit-run-") as workdir:
        os.chmod(workdir, 0o777)
        spec_path = os.path.join(workdir, "tests.json")
        runner_path = os.path.join(workdir, "runner.py")
        result_path = os.path.join(workdir, "result.json")
        with open(spec_path, "w") as fh:
            json.dump(
                {
                    "code": code,
                    "cases": [
                        {
                            "call": c.call,
                            "expected": c.expected,
                            "comparison": c.comparison,
                            "tolerance": c.tolerance,
                        }
                        for c in question.test_cases
                    ],
                },
                fh,
            )
        with open(runner_path, "w") as fh:
            fh.write(_RUNNER_SOURCE)
        os.chmod(spec_path, 0o644)
        os.chmod(runner_path, 0o644)

        started = time.monotonic()
        try:
            proc = subprocess.Popen(
                [sys.executable, "-I", runner_path, spec_path, result_path],
                stdin=subprocess.DEVNULL,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                cwd=workdir,
                start_new_session=True,
                preexec_fn=_child_limits(question.memory_limit, drop),
            )
        except OSError as exc:
            raise SandboxUnavailable(f"cannot spawn sandbox process: {exc}") from exc

        timed_out = False
        try:
            out, err = proc.communicate(timeout=question.time_limit)
        except subprocess.TimeoutExpired:
            timed_out = True
            _kill_group(proc)
            out, err = _drain(proc)
        finally:
            _kill_group(proc)
        wall = time.monotonic() - started

        stdout_text = _truncate(out.decode("utf-8", "replace"), CAPTURE_CAP)
        stderr_text = _truncate(err.decode("utf-8", "replace"), CAPTURE_CAP)
        total = len(question.test_cases)

        if timed_out:
            return ExecutionOutcome(
                status=ExecutionStatus.TIMED_OUT,
                stdout_text=stdout_text,
                stderr_text=stderr_text,
                failure_detail=f"execution exceeded the {question.time_limit}s time limit",
                wall_time=max(wall, question.time_limit),
                total_cases=total,
            )

        try:
            with open(result_path) as fh:
                verdict = json.load(fh)
        except (OSError, json.JSONDecodeError):
            return ExecutionOutcome(
                status=ExecutionStatus.CRASHED,
                stdout_text=stdout_text,
                stderr_text=stderr_text,
                failure_detail=f"process died without a verdict (exit code {proc.returncode})",
                wall_time=wall,
                total_cases=total,
            )

        status = ExecutionStatus(verdict.get("status", "crashed"))
        return ExecutionOutcome(
            status=status,
            stdout_text=stdout_text,
            stderr_text=stderr_text,
            failure_detail="" if status is ExecutionStatus.PASSED else verdict.get("detail", ""),
            wall_time=wall,
            passed_cases=int(verdict.get("passed", 0)),
            total_cases=int(verdict.get("total", total)),
        )


def extract_buggy_output(code: str, question: QuestionSpec) -> str:
    """Render an execution outcome as bounded text for prompt embedding."""
    outcome = run_against_harness(code, question)
    return render_buggy_output(outcome)


def render_buggy_output(outcome: ExecutionOutcome) -> str:
    if outcome.status is ExecutionStatus.PASSED:
        return PASSED_ALL_TESTS_MARKER
    parts = [f"status: {outcome.status.value}", outcome.failure_detail]
    if outcome.stderr_text:
        parts.append("stderr:\n" + outcome.stderr_text)
    if outcome.stdout_text:
        parts.append("stdout:\n" + outcome.stdout_text)
    return _truncate("\n".join(p for p in parts if p), BUGGY_OUTPUT_CAP)


def validate_candidate(code: str, question: QuestionSpec) -> tuple[bool, ExecutionOutcome]:
    """Gate for model-produced repaired/optimized programs: must pass everything."""
    outcome = run_against_harness(code, question)
    return outcome.status is ExecutionStatus.PASSED, outcome


def measure_runtime(code: str, question: QuestionSpec, repeats: int = 3) -> float:
    """Median wall time of ``repeats`` full harness runs of a passing program."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    valid, outcome = validate_candidate(code, question)
    if not valid:
        raise NotCorrect(
            f"cannot time a non-passing program (status {outcome.status.value})"
        )
    times = [run_against_harness(code, question).wall_time for _ in range(repeats)]
    return statistics.median(times)

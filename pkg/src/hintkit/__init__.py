"""hintkit: quota-gated hint orchestration and help-seeking analytics."""

from .core import (
    Event,
    EventKind,
    GenerationMetadata,
    Hint,
    HintRequest,
    HintType,
    QuotaPolicy,
    Rating,
    SessionState,
    apply_event,
    check_quota,
    replay_events,
)
from .generation import (
    PipelineConfig,
    PromptBundle,
    SymbolicInfo,
    assemble_prompt,
    gather_symbolic_info,
    generate_hint,
    parse_response,
)
from .providers import MockProvider, ProviderConfig, RemoteProvider, provider_from_config
from .sandbox import (
    ExecutionOutcome,
    ExecutionStatus,
    QuestionSpec,
    TestCase,
    extract_buggy_output,
    load_questions,
    measure_runtime,
    run_against_harness,
    validate_candidate,
)
from .service import ApiConfig, HintService, create_app, load_api_config
from .store import EventLogStore, read_event_log, write_event_log

__version__ = "0.1.0"

__all__ = [
    "ApiConfig",
    "Event",
    "EventKind",
    "EventLogStore",
    "ExecutionOutcome",
    "ExecutionStatus",
    "GenerationMetadata",
    "Hint",
    "HintRequest",
    "HintService",
    "HintType",
    "MockProvider",
    "PipelineConfig",
    "PromptBundle",
    "ProviderConfig",
    "QuestionSpec",
    "QuotaPolicy",
    "Rating",
    "RemoteProvider",
    "SessionState",
    "SymbolicInfo",
    "TestCase",
    "apply_event",
    "assemble_prompt",
    "check_quota",
    "create_app",
    "extract_buggy_output",
    "gather_symbolic_info",
    "generate_hint",
    "load_api_config",
    "load_questions",
    "measure_runtime",
    "parse_response",
    "provider_from_config",
    "read_event_log",
    "replay_events",
    "run_against_harness",
    "validate_candidate",
    "write_event_log",
    "__version__",
]

"""Agent roles that turn a conversation into a runnable pipeline."""

from .builder import BuildError, builder_build
from .inspector import SemanticIssue, inspector_semantics, inspector_syntax
from .loop import MAX_ITERATIONS, LoopResult, run_loop, run_to_completion
from .matchmaker import (
    ModelEntry,
    ModelRegistry,
    RegistryError,
    ScriptError,
    extract_preferences,
    generate_script,
    load_registry,
    make_generic_node,
    matchmaker_assign,
)
from .mentalist import (
    QUESTION_BUDGET,
    REFINED_MARKER,
    ExtractionError,
    extract_specification,
    match_attachments,
    mentalist_turn,
)
from .session import STATUSES, Attachment, Emit, Session, StatusError

__all__ = [
    "Attachment",
    "BuildError",
    "Emit",
    "ExtractionError",
    "LoopResult",
    "MAX_ITERATIONS",
    "ModelEntry",
    "ModelRegistry",
    "QUESTION_BUDGET",
    "REFINED_MARKER",
    "RegistryError",
    "STATUSES",
    "ScriptError",
    "SemanticIssue",
    "Session",
    "StatusError",
    "builder_build",
    "extract_preferences",
    "extract_specification",
    "generate_script",
    "inspector_semantics",
    "inspector_syntax",
    "load_registry",
    "make_generic_node",
    "match_attachments",
    "matchmaker_assign",
    "mentalist_turn",
    "run_loop",
    "run_to_completion",
]

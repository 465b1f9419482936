"""The build-inspect repair loop and the end-to-end session driver.

Each iteration rebuilds from scratch with the previous draft and its
problems as context; there is no in-place patching. The loop is capped:
when the cap is hit the least broken draft (latest on ties) is returned
marked degraded, and the session fails rather than pretending success.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gateway import ModelRoles, TranscriptError
from ..ir.catalog import FunctionCatalog
from ..ir.jsonio import pipeline_to_dict
from ..ir.model import Pipeline
from .builder import BuildError, builder_build
from .inspector import inspector_semantics, inspector_syntax
from .matchmaker import ModelRegistry, matchmaker_assign
from .mentalist import ExtractionError, extract_specification, match_attachments
from .session import Emit, Session

MAX_ITERATIONS = 3


@dataclass
class LoopResult:
    pipeline: Pipeline | None
    degraded: bool
    issues: list[str] = field(default_factory=list)


def run_loop(
    session: Session,
    llm,
    roles: ModelRoles,
    catalog: FunctionCatalog,
    max_iterations: int = MAX_ITERATIONS,
    emit: Emit | None = None,
) -> LoopResult:
    """Alternate building and inspecting until clean or out of budget."""
    if session.specification is None or session.refined_query is None:
        raise ValueError("session needs a refined query and a specification first")
    session.advance("building", emit)
    outcomes: list[tuple[Pipeline, list[str]]] = []
    prior: tuple[Pipeline, list[str]] | None = None
    for iteration in range(1, max_iterations + 1):
        session.iteration_count = iteration
        if iteration > 1:
            session.advance("building", emit)
        try:
            draft = builder_build(
                session.refined_query,
                session.specification,
                llm,
                roles,
                catalog,
                prior_draft=prior[0] if prior else None,
                issues=prior[1] if prior else None,
            )
        except (BuildError, TranscriptError) as exc:
            session.fail(f"builder failed on iteration {iteration}: {exc}", emit)
            return LoopResult(None, True, [str(exc)])
        session.advance("inspecting", emit)
        fixed, report, applied = inspector_syntax(draft, catalog)
        if emit and applied:
            emit({"type": "fixes", "iteration": iteration, "fixes": [f.to_dict() for f in applied]})
        if emit:
            emit({"type": "draft", "iteration": iteration, "pipeline": pipeline_to_dict(fixed)})
        texts = [f"{i.code} at {i.location}: {i.message}" for i in report.issues]
        if not texts:
            # semantics only gets syntactically clean drafts
            try:
                semantic = inspector_semantics(fixed, session.specification, llm, roles)
            except TranscriptError as exc:
                session.fail(f"semantic review failed on iteration {iteration}: {exc}", emit)
                return LoopResult(None, True, [str(exc)])
            texts = [f"output {s.output_id}: {s.description}" for s in semantic]
        session.drafts.append((fixed, report))
        outcomes.append((fixed, texts))
        if not texts:
            session.advance("matching", emit)
            return LoopResult(fixed, False, [])
        if emit:
            emit({"type": "issues", "iteration": iteration, "issues": texts})
        prior = (fixed, texts)
    _, (best_pipeline, best_issues) = min(
        enumerate(outcomes), key=lambda item: (len(item[1][1]), -item[0])
    )
    session.fail(f"no clean draft after {max_iterations} iterations", emit)
    return LoopResult(best_pipeline, True, list(best_issues))


def run_to_completion(
    session: Session,
    llm,
    roles: ModelRoles,
    catalog: FunctionCatalog,
    registry: ModelRegistry,
    max_iterations: int = MAX_ITERATIONS,
    emit: Emit | None = None,
) -> Pipeline | None:
    """Drive a confirmed session from refined query to final pipeline.

    Returns the final pipeline on success; on degradation returns the
    best draft (already marked in the session as a failure) and on a
    hard error returns None.
    """
    if session.refined_query is None:
        raise ValueError("session has no refined query to build from")
    try:
        spec = extract_specification(session.refined_query, llm, roles, emit=emit)
    except (ExtractionError, TranscriptError) as exc:
        session.fail(f"specification extraction failed: {exc}", emit)
        return None
    session.specification = spec
    if session.attachments:
        match_attachments(session, spec, llm, roles, emit=emit)
    result = run_loop(session, llm, roles, catalog, max_iterations=max_iterations, emit=emit)
    if result.degraded or result.pipeline is None:
        return result.pipeline
    try:
        final = matchmaker_assign(
            result.pipeline, session.messages, registry, catalog, llm, roles, emit=emit
        )
    except TranscriptError as exc:
        session.fail(f"model assignment failed: {exc}", emit)
        return result.pipeline
    if emit:
        emit({"type": "final_pipeline", "pipeline": pipeline_to_dict(final)})
    session.advance("done", emit)
    return final

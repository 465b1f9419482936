"""Draft checking: deterministic validation plus semantic review.

Syntax checking never touches a model: validate, apply the mechanical
fixes, validate again. The semantic pass reviews one branch per model
call and fails open: an unreadable verdict is logged and treated as
approval, because a flaky reviewer must not be able to veto a build.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..gateway import ChatMessage, ChatRequest, ModelRoles
from ..ir.branches import extract_branches
from ..ir.catalog import FunctionCatalog
from ..ir.model import Node, NodeKind, Pipeline, Specification
from ..synthesis import render_specification
from ..validation import AppliedFix, ValidationReport, apply_mechanical_fixes, validate
from .common import fill, parse_json_reply, prompt

log = logging.getLogger("pipesmith.agents")


@dataclass(frozen=True)
class SemanticIssue:
    output_id: str
    description: str


def inspector_syntax(
    draft: Pipeline, catalog: FunctionCatalog
) -> tuple[Pipeline, ValidationReport, list[AppliedFix]]:
    """Validate, apply the mechanical fixes, and re-validate."""
    report = validate(draft, catalog)
    fixed, applied = apply_mechanical_fixes(draft, report)
    if applied:
        report = validate(fixed, catalog)
    return fixed, report, applied


def _describe(node: Node) -> str:
    if node.kind is NodeKind.FUNCTION:
        args = ", ".join(f"{k}={v}" for k, v in sorted(node.params.items()))
        return f"{node.id}: {node.function_id}({args})"
    if node.kind in (NodeKind.INPUT, NodeKind.OUTPUT):
        lang = node.params.get("language")
        text = f"{node.id}: {node.kind.value} {node.params.get('modality')}"
        return text + (f" ({lang})" if lang else "")
    if node.kind is NodeKind.GENERIC_LLM:
        head = (node.payload or "").strip().splitlines()
        return f"{node.id}: generic_llm {head[0][:60]!r}" if head else f"{node.id}: generic_llm"
    return f"{node.id}: {node.kind.value}"


def inspector_semantics(
    draft: Pipeline, specification: Specification, llm, roles: ModelRoles
) -> list[SemanticIssue]:
    """Review each branch against the specification; one call per branch."""
    issues: list[SemanticIssue] = []
    spec_text = render_specification(specification)
    for branch in extract_branches(draft):
        summary = "\n".join(_describe(draft.nodes[nid]) for nid in branch.node_ids_in_path_order)
        ask = fill(
            prompt("semantic"),
            specification=spec_text,
            output_id=branch.output_node_id,
            summary=summary,
        )
        resp = llm.chat(ChatRequest(model=roles.inspector, messages=(ChatMessage("user", ask),)))
        try:
            verdict = parse_json_reply(resp.content)
            if not isinstance(verdict, dict) or not isinstance(verdict.get("ok"), bool):
                raise ValueError("verdict needs an 'ok' boolean")
        except ValueError as exc:
            log.warning(
                "semantic verdict for %s was unreadable (%s); treating the branch as sound",
                branch.output_node_id,
                exc,
            )
            continue
        if not verdict["ok"]:
            found = verdict.get("issues")
            if not isinstance(found, list) or not found:
                found = ["branch rejected without detail"]
            issues.extend(SemanticIssue(branch.output_node_id, str(item)) for item in found)
    return issues

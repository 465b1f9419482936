"""Draft construction, one model call per pipeline output.

Each call asks for the branch that feeds a single output; the reply
lists only the nodes new to that branch, so shared prefixes (one
transcription feeding three translations, say) are reused by id rather
than duplicated. An unusable reply gets exactly one correction prompt
before the build is abandoned.
"""

from __future__ import annotations

from ..gateway import ChatMessage, ChatRequest, ModelRoles
from ..ir.catalog import FunctionCatalog
from ..ir.jsonio import PipelineParseError, parse_pipeline_dict, serialize_pipeline_json
from ..ir.model import Pipeline, Specification, SpecRow
from ..synthesis import render_specification
from .common import builder_examples, fill, prompt, parse_json_reply, render_catalog


class BuildError(RuntimeError):
    pass


def _render_row(row: SpecRow) -> str:
    text = f"{row.role} {row.name}: {row.modality.value}"
    if row.language:
        text += f", language {row.language}"
    return text


def _parse_branch(text: str, taken: set[str]) -> dict:
    doc = parse_json_reply(text)
    if not isinstance(doc, dict):
        raise ValueError("branch reply must be a JSON object")
    nodes = doc.get("nodes")
    edges = doc.get("edges")
    if not isinstance(nodes, list) or not isinstance(edges, list):
        raise ValueError("branch object needs 'nodes' and 'edges' arrays")
    seen: set[str] = set()
    for nd in nodes:
        if not isinstance(nd, dict) or not isinstance(nd.get("id"), str):
            raise ValueError("every node needs a string 'id'")
        nid = nd["id"]
        if nid in taken or nid in seen:
            raise ValueError(f"node id {nid!r} is already defined in an earlier branch")
        seen.add(nid)
    for ed in edges:
        if not isinstance(ed, dict) or "from" not in ed or "to" not in ed:
            raise ValueError("every edge needs 'from' and 'to'")
    return doc


def _request_branch(llm, model: str, msgs: list[ChatMessage], index: int, taken: set[str]):
    resp = llm.chat(ChatRequest(model=model, messages=tuple(msgs)))
    try:
        return _parse_branch(resp.content, taken), resp.content
    except ValueError as first:
        msgs.append(ChatMessage("assistant", resp.content))
        msgs.append(
            ChatMessage(
                "user",
                f"That branch reply was unusable: {first}. "
                f"Resend branch {index} as the JSON object only.",
            )
        )
        resp = llm.chat(ChatRequest(model=model, messages=tuple(msgs)))
        try:
            return _parse_branch(resp.content, taken), resp.content
        except ValueError as second:
            raise BuildError(f"branch {index}: {second}") from second


def builder_build(
    refined_query: str,
    specification: Specification,
    llm,
    roles: ModelRoles,
    catalog: FunctionCatalog,
    prior_draft: Pipeline | None = None,
    issues: list[str] | None = None,
) -> Pipeline:
    """Build a draft pipeline branch by branch.

    When a rejected draft and its problems are passed in, they are
    prepended to the first branch request so the rebuild can fix them.
    """
    outputs = specification.outputs()
    system = fill(
        prompt("builder_system"),
        catalog=render_catalog(catalog),
        examples=builder_examples(),
    )
    msgs = [ChatMessage("system", system)]
    context = ""
    if prior_draft is not None and issues:
        context = fill(
            prompt("builder_repair"),
            draft=serialize_pipeline_json(prior_draft),
            issues="\n".join(f"- {i}" for i in issues),
        )
    spec_text = render_specification(specification)
    node_docs: dict[str, dict] = {}
    edge_docs: list[dict] = []
    for index, row in enumerate(outputs, start=1):
        ask = fill(
            prompt("builder_branch"),
            context=context if index == 1 else "",
            refined_query=refined_query,
            specification=spec_text,
            index=index,
            total=len(outputs),
            output_row=_render_row(row),
            known_nodes=", ".join(sorted(node_docs)) or "none yet",
        )
        msgs.append(ChatMessage("user", ask))
        branch, reply = _request_branch(llm, roles.builder, msgs, index, set(node_docs))
        msgs.append(ChatMessage("assistant", reply))
        for nd in branch["nodes"]:
            node_docs[nd["id"]] = nd
        edge_docs.extend(branch["edges"])
    doc = {"nodes": list(node_docs.values()), "edges": edge_docs}
    try:
        return parse_pipeline_dict(doc, catalog)
    except PipelineParseError as exc:
        raise BuildError(f"assembled draft does not parse: {exc}") from exc

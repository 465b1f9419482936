"""Model selection for finished drafts, with fallbacks for gaps.

Assignments go into pipeline metadata, not node params, so binding
models never changes the graph that structural comparison sees. A
function no registry model serves is either replaced by a prompted
generic text node (when it is a plain text-to-text step) or recorded
as unresolved for a human to sort out.
"""

from __future__ import annotations

import ast
import json
import logging
import textwrap
from collections.abc import Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..gateway import ChatMessage, ChatRequest, ModelRoles
from ..ir.catalog import FunctionCatalog, FunctionSpec
from ..ir.model import Edge, Endpoint, Modality, Node, NodeKind, Pipeline, Port
from .common import fill, parse_json_reply, prompt, render_conversation
from .session import Emit

log = logging.getLogger("pipesmith.agents")


class RegistryError(ValueError):
    pass


class ScriptError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelEntry:
    id: str
    function_id: str
    supplier: str
    version: int
    domains: tuple[str, ...] = ("general",)
    default: bool = False


class ModelRegistry:
    """Deployable models grouped by the catalog function they serve.

    Every covered function must have exactly one default entry; that is
    what keeps assignment deterministic when the user states no
    preference at all.
    """

    def __init__(self, entries: Sequence[ModelEntry]):
        self._by_function: dict[str, list[ModelEntry]] = {}
        seen: set[str] = set()
        for e in entries:
            if e.id in seen:
                raise RegistryError(f"duplicate model id {e.id!r}")
            seen.add(e.id)
            self._by_function.setdefault(e.function_id, []).append(e)
        for fid, group in sorted(self._by_function.items()):
            defaults = [e for e in group if e.default]
            if len(defaults) != 1:
                raise RegistryError(
                    f"function {fid!r} needs exactly one default model, has {len(defaults)}"
                )
            group.sort(key=lambda e: (-e.version, e.id))

    def functions(self) -> list[str]:
        return sorted(self._by_function)

    def covers(self, function_id: str) -> bool:
        return function_id in self._by_function

    def for_function(self, function_id: str) -> list[ModelEntry]:
        return list(self._by_function.get(function_id, ()))

    def default_for(self, function_id: str) -> ModelEntry | None:
        return next((e for e in self._by_function.get(function_id, ()) if e.default), None)


def load_registry(path: str | Path | None = None) -> ModelRegistry:
    if path is None:
        raw = (resources.files("pipesmith.agents") / "data" / "registry.json").read_text(
            encoding="utf-8"
        )
    else:
        raw = Path(path).read_text(encoding="utf-8")
    doc = json.loads(raw)
    if not isinstance(doc, list):
        raise RegistryError("registry must be a JSON array")
    entries = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise RegistryError(f"registry entry {i} is not an object")
        try:
            entries.append(
                ModelEntry(
                    id=item["id"],
                    function_id=item["function_id"],
                    supplier=item["supplier"],
                    version=int(item["version"]),
                    domains=tuple(item.get("domains") or ("general",)),
                    default=bool(item.get("default", False)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RegistryError(f"registry entry {i}: {exc!r}") from exc
    return ModelRegistry(entries)


_NO_PREFERENCES = {"supplier": None, "domain": None, "prefer_recent": False}


def extract_preferences(messages: Sequence[tuple[str, str]], llm, roles: ModelRoles) -> dict:
    """Pull supplier/domain/recency wishes out of the conversation.

    Fails open to no preferences: a garbled reply must not block
    assignment, it just loses the nice-to-haves.
    """
    if not messages:
        return dict(_NO_PREFERENCES)
    ask = fill(prompt("preferences"), conversation=render_conversation(messages))
    resp = llm.chat(ChatRequest(model=roles.utility, messages=(ChatMessage("user", ask),)))
    try:
        doc = parse_json_reply(resp.content)
        if not isinstance(doc, dict):
            raise ValueError("expected a JSON object")
    except ValueError as exc:
        log.warning("preference extraction was unreadable (%s); assuming none", exc)
        return dict(_NO_PREFERENCES)
    supplier = doc.get("supplier")
    domain = doc.get("domain")
    return {
        "supplier": supplier if isinstance(supplier, str) and supplier else None,
        "domain": domain if isinstance(domain, str) and domain else None,
        "prefer_recent": bool(doc.get("prefer_recent", False)),
    }


def _select(candidates: list[ModelEntry], prefs: dict) -> ModelEntry:
    # preference filters are soft: one that matches nothing is dropped
    pool = candidates
    if prefs.get("domain"):
        wanted = prefs["domain"].lower()
        narrowed = [e for e in pool if wanted in {d.lower() for d in e.domains}]
        if narrowed:
            pool = narrowed
    if prefs.get("supplier"):
        wanted = prefs["supplier"].lower()
        narrowed = [e for e in pool if e.supplier.lower() == wanted]
        if narrowed:
            pool = narrowed
    if prefs.get("prefer_recent"):
        return max(pool, key=lambda e: (e.version, e.id))
    default = next((e for e in pool if e.default), None)
    if default is not None:
        return default
    return max(pool, key=lambda e: (e.version, e.id))


def make_generic_node(task_description: str, query_fragment: str, node_id: str) -> Node:
    """A prompted text-to-text step standing in for an unserved function."""
    task = " ".join(task_description.split())
    if not task:
        raise ValueError("generic node needs a task description")
    if not node_id or "." in node_id:
        raise ValueError(f"bad node id {node_id!r}")
    payload = fill(
        prompt("generic_node"), task=task, query_fragment=" ".join(query_fragment.split())
    )
    return Node(
        id=node_id,
        kind=NodeKind.GENERIC_LLM,
        payload=payload,
        input_ports=[Port("text", Modality.TEXT)],
        output_ports=[Port("text", Modality.TEXT)],
    )


def _is_plain_text_step(node: Node, spec: FunctionSpec, pipeline: Pipeline) -> bool:
    if len(spec.inputs) != 1 or spec.inputs[0].modality is not Modality.TEXT:
        return False
    if len(spec.outputs) != 1 or spec.outputs[0].modality is not Modality.TEXT:
        return False
    # a parameter wired in by an edge carries data a prompt cannot see
    data_names = {p.name for p in spec.inputs}
    for e in pipeline.edges:
        if e.target.node == node.id and e.target.port not in data_names:
            return False
    return True


def _retarget(e: Edge, node_id: str) -> Edge:
    src, tgt = e.source, e.target
    if src.node == node_id and src.port != "text":
        src = Endpoint(node_id, "text")
    if tgt.node == node_id and tgt.port != "text":
        tgt = Endpoint(node_id, "text")
    if src is e.source and tgt is e.target:
        return e
    return Edge(src, tgt)


def matchmaker_assign(
    pipeline: Pipeline,
    conversation: Sequence[tuple[str, str]],
    registry: ModelRegistry,
    catalog: FunctionCatalog,
    llm,
    roles: ModelRoles,
    emit: Emit | None = None,
) -> Pipeline:
    """Bind every function node to a registry model, substitute, or flag."""
    prefs = extract_preferences(conversation, llm, roles)
    nodes = dict(pipeline.nodes)
    edges = list(pipeline.edges)
    assignments: dict[str, str] = {}
    substituted: list[str] = []
    unresolved: list[str] = []
    last_user = next((text for role, text in reversed(list(conversation)) if role == "user"), "")
    for nid in sorted(pipeline.nodes):
        node = pipeline.nodes[nid]
        if node.kind is not NodeKind.FUNCTION or node.function_id is None:
            continue
        candidates = registry.for_function(node.function_id)
        if candidates:
            assignments[nid] = _select(candidates, prefs).id
            continue
        spec = catalog.get(node.function_id)
        if spec is not None and _is_plain_text_step(node, spec, pipeline):
            task = node.function_id.replace("_", " ")
            if node.params:
                task += " (" + ", ".join(f"{k}={v}" for k, v in sorted(node.params.items())) + ")"
            nodes[nid] = make_generic_node(task, last_user, nid)
            edges = [_retarget(e, nid) for e in edges]
            substituted.append(nid)
        else:
            unresolved.append(nid)
    metadata = dict(pipeline.metadata)
    metadata["model_assignments"] = assignments
    if substituted:
        metadata["generic_substitutions"] = substituted
    if unresolved:
        metadata["unresolved_functions"] = unresolved
    result = Pipeline(nodes=nodes, edges=edges, metadata=metadata)
    if emit:
        emit(
            {
                "type": "model_assignments",
                "assignments": assignments,
                "generic_substitutions": substituted,
                "unresolved": unresolved,
            }
        )
    return result


def _normalize_body(text: str) -> str:
    body = text.strip("\n")
    if body.lstrip().startswith("```"):
        lines = body.strip().splitlines()
        if len(lines) >= 2 and lines[-1].strip().startswith("```"):
            lines = lines[1:-1]
        else:
            lines = lines[1:]
        body = "\n".join(lines)
    body = textwrap.dedent(body)
    lines = [("    " + ln if ln.strip() else "") for ln in body.splitlines()]
    if not any(ln.strip() for ln in lines):
        raise ScriptError("model returned an empty body")
    return "\n".join(lines)


def generate_script(
    task_description: str,
    input_names: Sequence[str],
    llm,
    roles: ModelRoles,
    returns: str = "str",
) -> str:
    """Fill the fixed script skeleton with a model-written body.

    Only the body is generated; signature and return type are pinned by
    the template, and the result must parse as Python before it leaves.
    """
    task = " ".join(task_description.split())
    if not task:
        raise ValueError("script needs a task description")
    if not input_names:
        raise ValueError("script needs at least one input")
    signature = ", ".join(f"{name}: str" for name in input_names)
    ask = fill(prompt("script_body"), task=task, signature=signature, returns=returns)
    resp = llm.chat(ChatRequest(model=roles.utility, messages=(ChatMessage("user", ask),)))
    code = fill(
        prompt("script_template"),
        signature=signature,
        returns=returns,
        task=task,
        body=_normalize_body(resp.content),
    )
    try:
        ast.parse(code)
    except SyntaxError as exc:
        raise ScriptError(f"generated body does not parse: {exc}") from exc
    return code

"""Semantic equality predicates shared by exact match and edit distance.

Two nodes are the same when their kinds agree and the payload that gives
them meaning agrees: modality for input/output nodes, function id plus
parameters for function nodes, routing table for routers, condition for
decisions. Freeform nodes get softer treatment: prompt nodes compare by
embedding similarity against a threshold, script nodes by a pluggable
code-equivalence judgment (exact text modulo whitespace by default).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..gateway import HashEmbedder, cosine
from ..ir.model import Edge, Node, NodeKind

_shared_embedder = HashEmbedder()


def _default_embed(text: str) -> list[float]:
    return _shared_embedder.embed(text)


def _default_code_equivalence(a: str, b: str) -> bool:
    return " ".join(a.split()) == " ".join(b.split())


@dataclass(frozen=True)
class MatchConfig:
    prompt_similarity_threshold: float = 0.5
    edit_cost: float = 1.0
    time_budget: float = 60.0
    code_equivalence: Callable[[str, str], bool] = field(
        default=_default_code_equivalence, compare=False
    )
    embed: Callable[[str], list[float]] = field(default=_default_embed, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.prompt_similarity_threshold <= 1.0:
            raise ValueError("prompt_similarity_threshold must be within [0, 1]")
        if self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.edit_cost <= 0:
            raise ValueError("edit_cost must be positive")


def _norm_function(function_id: str | None) -> str:
    return (function_id or "").lower()


def _router_signature(node: Node):
    routes = node.params.get("routes")
    routes_key = tuple(sorted(map(str, routes))) if isinstance(routes, list) else routes
    return (node.params.get("modality"), routes_key)


def node_match(a: Node, b: Node, cfg: MatchConfig) -> bool:
    if a.kind is not b.kind:
        return False
    kind = a.kind
    if kind in (NodeKind.INPUT, NodeKind.OUTPUT):
        return a.params.get("modality") == b.params.get("modality")
    if kind is NodeKind.FUNCTION:
        return _norm_function(a.function_id) == _norm_function(b.function_id) and a.params == b.params
    if kind is NodeKind.ROUTER:
        return _router_signature(a) == _router_signature(b)
    if kind is NodeKind.DECISION:
        return a.params.get("modality") == b.params.get("modality") and a.params.get(
            "condition"
        ) == b.params.get("condition")
    if kind is NodeKind.SCRIPT:
        return cfg.code_equivalence(a.payload or "", b.payload or "")
    # prompt nodes: identical text short-circuits the similarity test,
    # which also settles the two-empty-prompts case
    pa, pb = a.payload or "", b.payload or ""
    if pa == pb:
        return True
    return cosine(cfg.embed(pa), cfg.embed(pb)) >= cfg.prompt_similarity_threshold


def edge_match(a: Edge, b: Edge, node_mapping: Mapping[str, str]) -> bool:
    """Does edge a correspond to edge b once a's endpoints are mapped?

    Endpoint node ids translate through node_mapping; port names must
    coincide verbatim on both ends.
    """
    return (
        node_mapping.get(a.source.node) == b.source.node
        and node_mapping.get(a.target.node) == b.target.node
        and a.source.port == b.source.port
        and a.target.port == b.target.port
    )


def substitution_cause(a: Node, b: Node) -> str:
    """Why a (gen) had to be rewritten into b (ref), most severe reason first."""
    if a.kind is not b.kind:
        return "wrong_node_type"
    if a.kind is NodeKind.FUNCTION and _norm_function(a.function_id) != _norm_function(b.function_id):
        return "wrong_function"
    if a.params != b.params:
        return "parameter_mismatch"
    return "payload_mismatch"

"""Exact pipeline matching: isomorphism with semantic node predicates.

A VF2-style backtracking search maps generated nodes onto reference
nodes one at a time. Before any search starts, cheap invariants (node
and edge counts, kind histogram, per-node degrees) reject most
non-matches, and each generated node's candidate set is narrowed to
reference nodes that already satisfy node_match. During expansion a
candidate is accepted only if every edge to an already-mapped neighbor
is mirrored exactly, port labels included, in both directions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..ir.model import Pipeline
from .matching import MatchConfig, node_match


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    mapping: dict[str, str] | None = None

    def __bool__(self) -> bool:
        return self.matched


def _edge_labels(p: Pipeline) -> dict[tuple[str, str], frozenset[tuple[str, str]]]:
    out: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for e in p.edges:
        out.setdefault((e.source.node, e.target.node), set()).add((e.source.port, e.target.port))
    return {k: frozenset(v) for k, v in out.items()}


def _degrees(p: Pipeline) -> dict[str, tuple[int, int]]:
    ins: Counter = Counter()
    outs: Counter = Counter()
    for e in p.edges:
        outs[e.source.node] += 1
        ins[e.target.node] += 1
    return {nid: (ins[nid], outs[nid]) for nid in p.nodes}


def exact_match(gen: Pipeline, ref: Pipeline, cfg: MatchConfig | None = None) -> MatchResult:
    cfg = cfg or MatchConfig()
    if len(gen.nodes) != len(ref.nodes) or len(gen.edges) != len(ref.edges):
        return MatchResult(False)
    if Counter(n.kind for n in gen.nodes.values()) != Counter(n.kind for n in ref.nodes.values()):
        return MatchResult(False)
    gen_fns = Counter((n.function_id or "").lower() for n in gen.nodes.values() if n.function_id)
    ref_fns = Counter((n.function_id or "").lower() for n in ref.nodes.values() if n.function_id)
    if gen_fns != ref_fns:
        return MatchResult(False)

    gen_deg = _degrees(gen)
    ref_deg = _degrees(ref)
    if sorted(gen_deg.values()) != sorted(ref_deg.values()):
        return MatchResult(False)

    candidates: dict[str, list[str]] = {}
    for g in gen.nodes.values():
        options = [
            r.id
            for r in sorted(ref.nodes.values(), key=lambda n: n.id)
            if ref_deg[r.id] == gen_deg[g.id] and node_match(g, r, cfg)
        ]
        if not options:
            return MatchResult(False)
        candidates[g.id] = options

    # most-constrained nodes first keeps the search shallow
    order = sorted(candidates, key=lambda gid: (len(candidates[gid]), gid))
    gen_adj = _edge_labels(gen)
    ref_adj = _edge_labels(ref)

    mapping: dict[str, str] = {}
    used: set[str] = set()

    def consistent(gid: str, rid: str) -> bool:
        for other_g, other_r in mapping.items():
            if gen_adj.get((gid, other_g), frozenset()) != ref_adj.get((rid, other_r), frozenset()):
                return False
            if gen_adj.get((other_g, gid), frozenset()) != ref_adj.get((other_r, rid), frozenset()):
                return False
        return True

    def extend(depth: int) -> bool:
        if depth == len(order):
            return True
        gid = order[depth]
        for rid in candidates[gid]:
            if rid in used or not consistent(gid, rid):
                continue
            mapping[gid] = rid
            used.add(rid)
            if extend(depth + 1):
                return True
            del mapping[gid]
            used.discard(rid)
        return False

    if extend(0):
        return MatchResult(True, dict(mapping))
    return MatchResult(False)

"""Brute-force reference implementations for the matching tests.

These are deliberately dumb and slow: exact matching tries every node
bijection, edit distance tries every partial injective assignment and
prices each one from scratch. They exist to cross-check the search
implementations and must stay independent of them; do not "optimize"
these by borrowing pruning or incremental costing from the real code.
"""

from __future__ import annotations

import itertools

from pipesmith.ir.model import Pipeline
from pipesmith.metrics.matching import MatchConfig, node_match


def _edge_tuples(p: Pipeline) -> set[tuple[str, str, str, str]]:
    return {(e.source.node, e.source.port, e.target.node, e.target.port) for e in p.edges}


def brute_force_exact_match(gen: Pipeline, ref: Pipeline, cfg: MatchConfig | None = None) -> bool:
    cfg = cfg or MatchConfig()
    gen_ids = sorted(gen.nodes)
    ref_ids = sorted(ref.nodes)
    if len(gen_ids) != len(ref_ids):
        return False
    gen_edges = _edge_tuples(gen)
    ref_edges = _edge_tuples(ref)
    if len(gen_edges) != len(ref_edges):
        return False
    for perm in itertools.permutations(ref_ids):
        mapping = dict(zip(gen_ids, perm))
        if not all(node_match(gen.nodes[g], ref.nodes[r], cfg) for g, r in mapping.items()):
            continue
        translated = {(mapping[a], p, mapping[b], q) for (a, p, b, q) in gen_edges}
        if translated == ref_edges:
            return True
    return False


def _pair_labels(p: Pipeline) -> dict[tuple[str, str], set[tuple[str, str]]]:
    pairs: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for e in p.edges:
        pairs.setdefault((e.source.node, e.target.node), set()).add(
            (e.source.port, e.target.port)
        )
    return pairs


def _assignment_cost(
    gen: Pipeline, ref: Pipeline, assign: dict[str, str | None], cfg: MatchConfig
) -> int:
    cost = 0
    used = {r for r in assign.values() if r is not None}
    for gid, rid in assign.items():
        if rid is None:
            cost += 1
        elif not node_match(gen.nodes[gid], ref.nodes[rid], cfg):
            cost += 1
    cost += len(ref.nodes) - len(used)

    gen_pairs = _pair_labels(gen)
    ref_pairs = _pair_labels(ref)
    priced: set[tuple[str, str]] = set()
    for (a, b), labels in gen_pairs.items():
        ra, rb = assign[a], assign[b]
        if ra is None or rb is None:
            cost += len(labels)
            continue
        other = ref_pairs.get((ra, rb), set())
        cost += max(len(labels - other), len(other - labels))
        priced.add((ra, rb))
    for key, labels in ref_pairs.items():
        if key not in priced:
            cost += len(labels)
    return cost


def brute_force_ged(gen: Pipeline, ref: Pipeline, cfg: MatchConfig | None = None) -> int:
    """Minimal op count over every assignment. Exponential; keep graphs tiny."""
    cfg = cfg or MatchConfig()
    gen_ids = sorted(gen.nodes)
    ref_ids = sorted(ref.nodes)
    best: int | None = None

    def rec(i: int, assign: dict[str, str | None], used: set[str]):
        nonlocal best
        if i == len(gen_ids):
            cost = _assignment_cost(gen, ref, assign, cfg)
            if best is None or cost < best:
                best = cost
            return
        gid = gen_ids[i]
        for rid in ref_ids:
            if rid in used:
                continue
            assign[gid] = rid
            used.add(rid)
            rec(i + 1, assign, used)
            used.discard(rid)
            del assign[gid]
        assign[gid] = None
        rec(i + 1, assign, used)
        del assign[gid]

    rec(0, {}, set())
    assert best is not None
    return best

"""Branch decomposition of a pipeline.

A branch is everything one output node depends on: the output itself plus
every transitive predecessor over live edges. Branches of different outputs
usually overlap (shared inputs, shared upstream functions); that sharing is
the point, since merging per-output fragments back together is how drafts
get assembled.
"""

from __future__ import annotations

import heapq

from .model import Branch, NodeKind, Pipeline


def _ancestors(p: Pipeline, node_id: str) -> set[str]:
    seen = {node_id}
    stack = [node_id]
    while stack:
        for pred in p.predecessors(stack.pop()):
            if pred not in seen:
                seen.add(pred)
                stack.append(pred)
    return seen


def _topological_order(p: Pipeline, members: set[str]) -> list[str]:
    """Kahn's algorithm over the induced subgraph, smallest id first."""
    indegree = {n: 0 for n in members}
    succs: dict[str, set[str]] = {n: set() for n in members}
    for edge in p.live_edges():
        s, t = edge.source.node, edge.target.node
        if s in members and t in members and t not in succs[s]:
            succs[s].add(t)
            indegree[t] += 1
    ready = [n for n in members if indegree[n] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for t in sorted(succs[n]):
            indegree[t] -= 1
            if indegree[t] == 0:
                heapq.heappush(ready, t)
    # an acyclic pipeline always drains; cycles were rejected at parse time
    return order


def extract_branches(p: Pipeline) -> list[Branch]:
    comments = p.metadata.get("branches", {})
    if not isinstance(comments, dict):
        comments = {}
    branches = []
    for out_id in sorted(n.id for n in p.nodes_by_kind(NodeKind.OUTPUT)):
        members = _ancestors(p, out_id)
        branches.append(
            Branch(
                output_node_id=out_id,
                node_ids_in_path_order=tuple(_topological_order(p, members)),
                comment=str(comments.get(out_id, "")),
            )
        )
    return branches

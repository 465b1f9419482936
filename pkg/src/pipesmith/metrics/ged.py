"""Graph edit distance between pipelines.

Depth-first branch and bound over node assignments: each generated node
is paired with a reference node (free when node_match holds, one
substitution otherwise) or deleted; reference nodes left over at the end
are insertions, as are their incident edges. Edge costs accrue
incrementally as both endpoints of a pair become decided, comparing the
port-label sets of the parallel edges between the two nodes: with A and
B the two label sets, max(|A\\B|, |B\\A|) edits turn one into the other
(shared labels free, mismatches substituted, the surplus inserted or
deleted).

A greedy assignment seeds the upper bound so the search always has a
finite best to return; an admissible lower bound (nodes that match no
available partner, plus unavoidable size imbalance) prunes the tree.
When the time budget runs out the best assignment found so far is
returned with timed_out=True; its distance is an upper bound on the
true optimum. All costs are op-counts times the configured edit_cost.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from ..ir.model import Pipeline
from .matching import MatchConfig, node_match, substitution_cause

_CHECK_EVERY = 512


@dataclass(frozen=True)
class EditOp:
    kind: str  # insert | delete | substitute
    entity: str  # node | edge
    detail: str
    substitution_cause: str | None = None

    def __post_init__(self):
        wants_cause = self.kind == "substitute" and self.entity == "node"
        if wants_cause != (self.substitution_cause is not None):
            raise ValueError("substitution_cause is set exactly for node substitutions")

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "entity": self.entity, "detail": self.detail}
        if self.substitution_cause is not None:
            doc["substitution_cause"] = self.substitution_cause
        return doc


@dataclass(frozen=True)
class GedResult:
    distance: float
    edit_script: tuple[EditOp, ...]
    normalized: float
    timed_out: bool

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "normalized": self.normalized,
            "timed_out": self.timed_out,
            "edit_script": [op.to_dict() for op in self.edit_script],
        }


def _edge_labels(p: Pipeline) -> dict[tuple[str, str], frozenset[tuple[str, str]]]:
    out: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for e in p.edges:
        out.setdefault((e.source.node, e.target.node), set()).add((e.source.port, e.target.port))
    return {k: frozenset(v) for k, v in out.items()}


def _label_cost(a: frozenset, b: frozenset) -> int:
    return max(len(a - b), len(b - a))


class _Timeout(Exception):
    pass


class _Search:
    def __init__(self, gen: Pipeline, ref: Pipeline, cfg: MatchConfig):
        self.gen = gen
        self.ref = ref
        self.cfg = cfg
        self.gen_adj = _edge_labels(gen)
        self.ref_adj = _edge_labels(ref)
        self.ref_ids = sorted(ref.nodes)

        self.free: dict[str, frozenset[str]] = {}
        for gid, g in gen.nodes.items():
            self.free[gid] = frozenset(
                rid for rid in self.ref_ids if node_match(g, ref.nodes[rid], cfg)
            )

        degree: dict[str, int] = {gid: 0 for gid in gen.nodes}
        for (a, b), labels in self.gen_adj.items():
            degree[a] += len(labels)
            degree[b] += len(labels)
        # nodes with forced cost first: they raise the prefix early and
        # let the bound cut whole subtrees
        self.order = sorted(gen.nodes, key=lambda gid: (len(self.free[gid]), -degree[gid], gid))

        self.deadline = time.monotonic() + cfg.time_budget
        self.ticks = 0
        self.timed_out = False
        self.best_cost: int | None = None
        self.best_assign: dict[str, str | None] = {}

    def _tick(self):
        self.ticks += 1
        if self.ticks % _CHECK_EVERY == 0 and time.monotonic() > self.deadline:
            self.timed_out = True
            raise _Timeout

    def _step_cost(self, assign: dict[str, str | None], gid: str, rid: str | None) -> int:
        cost = 0
        if rid is None:
            cost += 1
        elif rid not in self.free[gid]:
            cost += 1
        for other_g, other_r in assign.items():
            a_fwd = self.gen_adj.get((gid, other_g), frozenset())
            a_bwd = self.gen_adj.get((other_g, gid), frozenset())
            if rid is None or other_r is None:
                cost += len(a_fwd) + len(a_bwd)
            else:
                b_fwd = self.ref_adj.get((rid, other_r), frozenset())
                b_bwd = self.ref_adj.get((other_r, rid), frozenset())
                cost += _label_cost(a_fwd, b_fwd) + _label_cost(a_bwd, b_bwd)
        return cost

    def _tail_cost(self, used_ref: set[str]) -> int:
        unused = [rid for rid in self.ref_ids if rid not in used_ref]
        cost = len(unused)
        unused_set = set(unused)
        for (a, b), labels in self.ref_adj.items():
            if a in unused_set or b in unused_set:
                cost += len(labels)
        return cost

    def _lower_bound(self, depth: int, used_ref: set[str]) -> int:
        remaining = self.order[depth:]
        avail = len(self.ref_ids) - len(used_ref)
        unmatched = sum(1 for gid in remaining if not (self.free[gid] - used_ref))
        node_side = max(unmatched, max(0, len(remaining) - avail))
        return node_side + max(0, avail - len(remaining))

    def _greedy_seed(self):
        assign: dict[str, str | None] = {}
        used: set[str] = set()
        cost = 0
        for gid in self.order:
            best_rid: str | None = None
            best_step: int | None = None
            for rid in sorted(self.free[gid] - used) or [None]:
                step = self._step_cost(assign, gid, rid)
                if best_step is None or step < best_step:
                    best_rid, best_step = rid, step
            if best_rid is None and len(used) < len(self.ref_ids):
                # no free partner: weigh cheapest substitution against deletion
                for rid in self.ref_ids:
                    if rid in used:
                        continue
                    step = self._step_cost(assign, gid, rid)
                    if step < best_step:
                        best_rid, best_step = rid, step
            assign[gid] = best_rid
            if best_rid is not None:
                used.add(best_rid)
            cost += best_step
        self.best_cost = cost + self._tail_cost(used)
        self.best_assign = dict(assign)

    def _dfs(self, depth: int, assign: dict[str, str | None], used: set[str], prefix: int):
        if prefix + self._lower_bound(depth, used) >= self.best_cost:
            return
        if depth == len(self.order):
            total = prefix + self._tail_cost(used)
            if total < self.best_cost:
                self.best_cost = total
                self.best_assign = dict(assign)
            return
        gid = self.order[depth]
        zero = sorted(self.free[gid] - used)
        subs = [rid for rid in self.ref_ids if rid not in used and rid not in self.free[gid]]
        for rid in [*zero, *subs, None]:
            self._tick()
            step = self._step_cost(assign, gid, rid)
            if prefix + step >= self.best_cost:
                continue
            assign[gid] = rid
            if rid is not None:
                used.add(rid)
            self._dfs(depth + 1, assign, used, prefix + step)
            del assign[gid]
            if rid is not None:
                used.discard(rid)
            if self.best_cost == 0:
                return

    def run(self) -> tuple[int, dict[str, str | None], bool]:
        self._greedy_seed()
        if self.best_cost > 0:
            try:
                self._dfs(0, {}, set(), 0)
            except _Timeout:
                pass
        return self.best_cost, self.best_assign, self.timed_out


def _rebuild_script(
    gen: Pipeline, ref: Pipeline, assign: dict[str, str | None], cfg: MatchConfig
) -> list[EditOp]:
    ops: list[EditOp] = []
    used_ref = {rid for rid in assign.values() if rid is not None}

    for gid in sorted(gen.nodes):
        rid = assign[gid]
        if rid is None:
            ops.append(EditOp("delete", "node", gid))
        elif not node_match(gen.nodes[gid], ref.nodes[rid], cfg):
            ops.append(
                EditOp(
                    "substitute",
                    "node",
                    f"{gid}=>{rid}",
                    substitution_cause=substitution_cause(gen.nodes[gid], ref.nodes[rid]),
                )
            )
    for rid in sorted(ref.nodes):
        if rid not in used_ref:
            ops.append(EditOp("insert", "node", rid))

    gen_adj = _edge_labels(gen)
    ref_adj = _edge_labels(ref)

    # edges with a deleted endpoint go away; pairs of decided endpoints
    # are compared label set against label set
    reverse = {rid: gid for gid, rid in assign.items() if rid is not None}
    pair_keys: set[tuple[str, str]] = set()
    for (a, b) in gen_adj:
        if assign.get(a) is not None and assign.get(b) is not None:
            pair_keys.add((a, b))
        else:
            for p, q in sorted(gen_adj[(a, b)]):
                ops.append(EditOp("delete", "edge", f"{a}.{p}->{b}.{q}"))
    for (ra, rb) in ref_adj:
        if ra in reverse and rb in reverse:
            pair_keys.add((reverse[ra], reverse[rb]))
        else:
            for p, q in sorted(ref_adj[(ra, rb)]):
                ops.append(EditOp("insert", "edge", f"{ra}.{p}->{rb}.{q}"))

    for a, b in sorted(pair_keys):
        ra, rb = assign[a], assign[b]
        labels_gen = sorted(gen_adj.get((a, b), frozenset()))
        labels_ref = sorted(ref_adj.get((ra, rb), frozenset()))
        gen_only = [lab for lab in labels_gen if lab not in set(labels_ref)]
        ref_only = [lab for lab in labels_ref if lab not in set(labels_gen)]
        n_sub = min(len(gen_only), len(ref_only))
        for (p1, q1), (p2, q2) in zip(gen_only[:n_sub], ref_only[:n_sub]):
            ops.append(EditOp("substitute", "edge", f"{a}.{p1}->{b}.{q1} => {ra}.{p2}->{rb}.{q2}"))
        for p, q in gen_only[n_sub:]:
            ops.append(EditOp("delete", "edge", f"{a}.{p}->{b}.{q}"))
        for p, q in ref_only[n_sub:]:
            ops.append(EditOp("insert", "edge", f"{ra}.{p}->{rb}.{q}"))
    return ops


def ged(gen: Pipeline, ref: Pipeline, cfg: MatchConfig | None = None) -> GedResult:
    cfg = cfg or MatchConfig()
    search = _Search(gen, ref, cfg)
    cost, assign, timed_out = search.run()
    script = _rebuild_script(gen, ref, assign, cfg)
    if len(script) != cost:
        raise AssertionError(
            f"edit script length {len(script)} disagrees with search cost {cost}"
        )
    denominator = max(1, len(ref.nodes) + len(ref.edges))
    distance = cfg.edit_cost * cost
    return GedResult(
        distance=distance,
        edit_script=tuple(script),
        normalized=distance / denominator,
        timed_out=timed_out,
    )

"""Seeded mutations whose edit-distance price is known by construction.

Each mutation costs exactly one edit and is chosen so that no pair of
applied mutations can cancel or merge:

- param_fresh rewrites one parameter of a function node to a value that
  appears nowhere in the original, so that node can only be repaired by
  a single substitution; each application targets a distinct node.
- edge_delete removes an edge whose endpoints have not been touched by
  any other mutation, so restoring it is one insertion.
- node_dangle adds an isolated prompt node, which no original node can
  absorb, so it costs one deletion.

Applying k such mutations therefore yields a pipeline at edit distance
exactly k from the original. The node_dangle argument assumes the
original contains no prompt nodes (true for catalog-built pipelines);
otherwise a lucky prompt could absorb the dangle as a free match.
"""

from __future__ import annotations

import copy
import random

from pipesmith.ir.model import Modality, Node, NodeKind, Pipeline, Port


def apply_mutations(pipeline: Pipeline, k: int, rng: random.Random) -> tuple[Pipeline, list[str]]:
    mutated = copy.deepcopy(pipeline)
    touched: set[str] = set()  # nodes no later mutation may involve
    applied: list[str] = []
    fresh = 0

    for _ in range(k):
        kinds = ["param_fresh", "edge_delete", "node_dangle"]
        rng.shuffle(kinds)
        for kind in kinds:
            if kind == "param_fresh":
                targets = sorted(
                    n.id
                    for n in mutated.nodes.values()
                    if n.kind is NodeKind.FUNCTION and n.params and n.id not in touched
                )
                if not targets:
                    continue
                nid = rng.choice(targets)
                node = mutated.nodes[nid]
                key = rng.choice(sorted(node.params))
                fresh += 1
                node.params[key] = f"zz{fresh}"
                touched.add(nid)
                applied.append(f"param_fresh {nid}.{key}")
                break
            if kind == "edge_delete":
                candidates = [
                    e
                    for e in mutated.edges
                    if e.source.node not in touched and e.target.node not in touched
                ]
                if not candidates:
                    continue
                victim = rng.choice(candidates)
                mutated.edges = [e for e in mutated.edges if e != victim]
                touched.update((victim.source.node, victim.target.node))
                applied.append(f"edge_delete {victim}")
                break
            fresh += 1
            nid = f"dangle{fresh}"
            mutated.nodes[nid] = Node(
                nid,
                NodeKind.GENERIC_LLM,
                payload=f"standalone probe step {fresh} zzq",
                input_ports=[Port("text", Modality.TEXT)],
                output_ports=[Port("text", Modality.TEXT)],
            )
            touched.add(nid)
            applied.append(f"node_dangle {nid}")
            break
        else:
            raise RuntimeError("no applicable mutation left; pipeline too small for k")
    return mutated, applied

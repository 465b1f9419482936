"""Random small graphs for fuzzing the matchers against the oracles.

The generator does not care about validation rules: matching and edit
distance are defined for arbitrary port-labeled graphs, so the fuzz
corpus deliberately includes pipelines no builder would produce.
"""

from __future__ import annotations

import copy
import random

from pipesmith.ir.model import Edge, Endpoint, Modality, Node, NodeKind, Pipeline, Port

_TEXT = Port("text", Modality.TEXT)
_AUDIO_IN = Port("audio", Modality.AUDIO)
_AUDIO_OUT = Port("audio", Modality.AUDIO)

_FUNCTION_VOCAB = [
    ("speech_recognition", [_AUDIO_IN], [_TEXT], {"language": ["en", "fr", "de"]}),
    ("translation", [_TEXT], [_TEXT], {"source_language": ["en", "fr"], "target_language": ["de", "es"]}),
    ("speech_synthesis", [_TEXT], [_AUDIO_OUT], {"language": ["en", "de"]}),
    ("summarization", [_TEXT], [_TEXT], {}),
]

_PROMPTS = [
    "simplify the text for children",
    "rewrite the text in simple words",
    "translate the text informally",
    "count the words in the text",
]


def random_pipeline(rng: random.Random, max_nodes: int = 8) -> Pipeline:
    n = rng.randint(1, max_nodes)
    nodes: dict[str, Node] = {}
    for i in range(n):
        nid = f"n{i}"
        roll = rng.random()
        if roll < 0.2:
            m = rng.choice([Modality.TEXT, Modality.AUDIO])
            nodes[nid] = Node(
                nid, NodeKind.INPUT, params={"modality": m.value},
                output_ports=[Port(m.value, m)],
            )
        elif roll < 0.4:
            m = rng.choice([Modality.TEXT, Modality.AUDIO])
            params = {"modality": m.value}
            if rng.random() < 0.5:
                params["language"] = rng.choice(["en", "fr"])
            nodes[nid] = Node(
                nid, NodeKind.OUTPUT, params=params, input_ports=[Port(m.value, m)]
            )
        elif roll < 0.85:
            fid, ins, outs, param_space = rng.choice(_FUNCTION_VOCAB)
            params = {k: rng.choice(v) for k, v in sorted(param_space.items())}
            nodes[nid] = Node(
                nid, NodeKind.FUNCTION, function_id=fid, params=params,
                input_ports=list(ins), output_ports=list(outs),
            )
        else:
            nodes[nid] = Node(
                nid, NodeKind.GENERIC_LLM, payload=rng.choice(_PROMPTS),
                input_ports=[_TEXT], output_ports=[_TEXT],
            )
    edges = []
    ids = sorted(nodes)
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.choice(ids), rng.choice(ids)
        if a == b:
            continue
        src, tgt = nodes[a], nodes[b]
        if not src.output_ports or not tgt.input_ports:
            continue
        sp = rng.choice(src.output_ports)
        tp = rng.choice(tgt.input_ports)
        edges.append(Edge(Endpoint(a, sp.name), Endpoint(b, tp.name)))
    return Pipeline(nodes=nodes, edges=edges)


def relabel(p: Pipeline, rng: random.Random) -> Pipeline:
    """Same graph under a random fresh renaming of node ids."""
    ids = sorted(p.nodes)
    fresh = [f"m{i}" for i in range(len(ids))]
    rng.shuffle(fresh)
    mapping = dict(zip(ids, fresh))
    nodes = {}
    for old, node in p.nodes.items():
        nodes[mapping[old]] = Node(
            mapping[old], node.kind, node.function_id, dict(node.params),
            list(node.input_ports), list(node.output_ports), node.payload,
        )
    edges = [
        Edge(
            Endpoint(mapping[e.source.node], e.source.port),
            Endpoint(mapping[e.target.node], e.target.port),
        )
        for e in p.edges
    ]
    return Pipeline(nodes=nodes, edges=edges)


def perturb(p: Pipeline, rng: random.Random) -> Pipeline:
    """One small arbitrary change; no promise about how it prices."""
    q = copy.deepcopy(p)
    moves = []
    fn = sorted(
        (n for n in q.nodes.values() if n.kind is NodeKind.FUNCTION and n.params),
        key=lambda n: n.id,
    )
    llm = sorted(
        (n for n in q.nodes.values() if n.kind is NodeKind.GENERIC_LLM), key=lambda n: n.id
    )
    if fn:
        moves.append("param")
    if q.edges:
        moves.append("edge")
    if llm:
        moves.append("prompt")
    if not moves:
        return q
    move = rng.choice(moves)
    if move == "param":
        node = rng.choice(fn)
        key = rng.choice(sorted(node.params))
        node.params[key] = str(node.params[key]) + "x"
    elif move == "edge":
        victim = rng.choice(q.edges)
        q.edges = [e for e in q.edges if e != victim]
    else:
        node = rng.choice(llm)
        node.payload = "compose an unrelated sonnet about planetary orbits"
    return q

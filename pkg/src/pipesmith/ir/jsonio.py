"""Canonical JSON interchange for pipelines.

Document shape::

    {"nodes": [{"id", "kind", "function", "params", "payload"}, ...],
     "edges": [{"from": "nodeId.port", "to": "nodeId.port"}, ...],
     "metadata": {...}}

Ports are not spelled out in the document; they follow from the node
kind, its params, and (for function nodes) the catalog. Serialization
is deterministic: nodes ordered by id, edges ordered by endpoints, keys
sorted, so serialize-parse-serialize is byte identical.

Parsing enforces node-level invariants and acyclicity. Whether edges
point at real ports, and whether function ids resolve, is deliberately
left to the validator so broken drafts can be diagnosed rather than
rejected outright.
"""

from __future__ import annotations

import json

from .catalog import FunctionCatalog
from .model import Edge, Endpoint, Modality, Node, NodeKind, Pipeline, Port


class PipelineParseError(ValueError):
    """One or more problems in a pipeline document, each with a location."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        lines = [f"{loc}: {msg}" for loc, msg in problems]
        super().__init__("invalid pipeline document:\n  " + "\n  ".join(lines))


class _Problems:
    def __init__(self) -> None:
        self.items: list[tuple[str, str]] = []

    def add(self, loc: str, msg: str) -> None:
        self.items.append((loc, msg))

    def raise_if_any(self) -> None:
        if self.items:
            raise PipelineParseError(self.items)


def _require_str(raw: dict, key: str, loc: str, problems: _Problems) -> str | None:
    value = raw.get(key)
    if not isinstance(value, str) or not value:
        problems.add(loc, f"missing or non-string {key!r}")
        return None
    return value


def _parse_modality(value, loc: str, problems: _Problems) -> Modality | None:
    if not isinstance(value, str):
        problems.add(loc, "missing or non-string 'modality' param")
        return None
    try:
        return Modality.parse(value)
    except ValueError as exc:
        problems.add(loc, str(exc))
        return None


def _port_list(raw, loc: str, problems: _Problems) -> list[Port]:
    """Build ports from a name->modality map (script nodes)."""
    if raw is None:
        return []
    if not isinstance(raw, dict):
        problems.add(loc, "expected a name->modality object")
        return []
    ports = []
    for name in sorted(raw):
        m = _parse_modality(raw[name], f"{loc}.{name}", problems)
        if m is not None:
            ports.append(Port(str(name), m))
    return ports


def _router_ports(node_id: str, params: dict, loc: str, problems: _Problems) -> tuple[list[Port], list[Port]]:
    m = _parse_modality(params.get("modality"), loc, problems)
    routes = params.get("routes")
    if not isinstance(routes, list) or not routes:
        problems.add(loc, "router needs a 'routes' param listing output modalities")
        return [], []
    out_ports: list[Port] = []
    seen: dict[str, int] = {}
    mods: list[Modality] = []
    for r in routes:
        rm = _parse_modality(r, f"{loc}.routes", problems)
        if rm is None:
            continue
        mods.append(rm)
        n = seen.get(rm.value, 0) + 1
        seen[rm.value] = n
        out_ports.append(Port(rm.value if n == 1 else f"{rm.value}_{n}", rm))
    if len(mods) < 2 or len(set(mods)) != len(mods):
        problems.add(loc, "router needs two or more routes with pairwise distinct modalities")
    in_ports = [Port("input", m)] if m is not None else []
    return in_ports, out_ports


def _decision_ports(params: dict, loc: str, problems: _Problems) -> tuple[list[Port], list[Port]]:
    m = _parse_modality(params.get("modality"), loc, problems)
    condition = params.get("condition", {})
    if not isinstance(condition, dict):
        problems.add(loc, "decision 'condition' param must map values to port names")
        condition = {}
    if m is None:
        return [], []
    out_names = sorted({str(v) for v in condition.values()})
    return [Port("input", m)], [Port(name, m) for name in out_names]


def build_node(raw: dict, catalog: FunctionCatalog, loc: str, problems: _Problems) -> Node | None:
    """Construct one node, deriving its ports; None if it cannot stand."""
    node_id = _require_str(raw, "id", loc, problems)
    kind_str = _require_str(raw, "kind", loc, problems)
    if node_id is None or kind_str is None:
        return None
    if "." in node_id:
        problems.add(loc, f"node id {node_id!r} must not contain '.'")
        return None
    try:
        kind = NodeKind.parse(kind_str)
    except ValueError as exc:
        problems.add(loc, str(exc))
        return None

    params = raw.get("params") or {}
    if not isinstance(params, dict):
        problems.add(loc, "'params' must be an object")
        return None
    payload = raw.get("payload")
    if payload is not None and not isinstance(payload, str):
        problems.add(loc, "'payload' must be a string")
        return None
    function_id = raw.get("function")
    if kind is NodeKind.FUNCTION and not isinstance(function_id, str):
        problems.add(loc, "function node needs a 'function' id")
        return None
    if kind is not NodeKind.FUNCTION:
        function_id = None

    in_ports: list[Port] = []
    out_ports: list[Port] = []
    if kind is NodeKind.INPUT:
        m = _parse_modality(params.get("modality"), loc, problems)
        if m is not None:
            out_ports = [Port(m.value, m)]
    elif kind is NodeKind.OUTPUT:
        m = _parse_modality(params.get("modality"), loc, problems)
        if m is not None:
            in_ports = [Port(m.value, m)]
    elif kind is NodeKind.FUNCTION:
        spec = catalog.get(function_id)  # unresolved ids are the validator's business
        if spec is not None:
            in_ports = spec.input_ports()
            out_ports = spec.output_ports()
    elif kind is NodeKind.ROUTER:
        in_ports, out_ports = _router_ports(node_id, params, loc, problems)
    elif kind is NodeKind.DECISION:
        in_ports, out_ports = _decision_ports(params, loc, problems)
    elif kind is NodeKind.SCRIPT:
        in_ports = _port_list(params.get("inputs"), f"{loc}.inputs", problems)
        out_ports = _port_list(params.get("outputs"), f"{loc}.outputs", problems)
    elif kind is NodeKind.GENERIC_LLM:
        in_ports = [Port("text", Modality.TEXT)]
        out_ports = [Port("text", Modality.TEXT)]

    return Node(
        id=node_id,
        kind=kind,
        function_id=function_id,
        params=params,
        input_ports=in_ports,
        output_ports=out_ports,
        payload=payload,
    )


def _parse_endpoint(value, key: str, loc: str, problems: _Problems) -> Endpoint | None:
    if not isinstance(value, str) or "." not in value:
        problems.add(loc, f"{key!r} must look like 'nodeId.port'")
        return None
    node, port = value.split(".", 1)
    if not node or not port:
        problems.add(loc, f"{key!r} must look like 'nodeId.port'")
        return None
    return Endpoint(node, port)


def parse_pipeline_dict(doc: dict, catalog: FunctionCatalog) -> Pipeline:
    problems = _Problems()
    if not isinstance(doc, dict):
        problems.add("$", "top level must be an object")
        problems.raise_if_any()

    raw_nodes = doc.get("nodes", [])
    raw_edges = doc.get("edges", [])
    metadata = doc.get("metadata", {})
    if not isinstance(raw_nodes, list):
        problems.add("nodes", "must be a list")
        raw_nodes = []
    if not isinstance(raw_edges, list):
        problems.add("edges", "must be a list")
        raw_edges = []
    if not isinstance(metadata, dict):
        problems.add("metadata", "must be an object")
        metadata = {}

    nodes: dict[str, Node] = {}
    for i, raw in enumerate(raw_nodes):
        loc = f"nodes[{i}]"
        if not isinstance(raw, dict):
            problems.add(loc, "must be an object")
            continue
        node = build_node(raw, catalog, loc, problems)
        if node is None:
            continue
        if node.id in nodes:
            problems.add(loc, f"duplicate node id {node.id!r}")
            continue
        nodes[node.id] = node

    edges: list[Edge] = []
    for i, raw in enumerate(raw_edges):
        loc = f"edges[{i}]"
        if not isinstance(raw, dict):
            problems.add(loc, "must be an object")
            continue
        src = _parse_endpoint(raw.get("from"), "from", loc, problems)
        tgt = _parse_endpoint(raw.get("to"), "to", loc, problems)
        if src is not None and tgt is not None:
            edges.append(Edge(src, tgt))

    problems.raise_if_any()
    pipeline = Pipeline(nodes=nodes, edges=edges, metadata=metadata)
    cycle = pipeline.find_cycle()
    if cycle is not None:
        problems.add("edges", "pipeline contains a cycle: " + " -> ".join(cycle))
        problems.raise_if_any()
    return pipeline


def parse_pipeline_json(text: str, catalog: FunctionCatalog) -> Pipeline:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PipelineParseError([(f"line {exc.lineno}", f"not valid JSON: {exc.msg}")]) from exc
    return parse_pipeline_dict(doc, catalog)


def pipeline_to_dict(p: Pipeline) -> dict:
    nodes = []
    for node_id in sorted(p.nodes):
        node = p.nodes[node_id]
        raw: dict = {"id": node.id, "kind": node.kind.value}
        if node.function_id is not None:
            raw["function"] = node.function_id
        raw["params"] = node.params
        if node.payload is not None:
            raw["payload"] = node.payload
        nodes.append(raw)
    edges = [{"from": str(e.source), "to": str(e.target)} for e in p.edges]
    return {"nodes": nodes, "edges": edges, "metadata": p.metadata}


def serialize_pipeline_json(p: Pipeline) -> str:
    return json.dumps(pipeline_to_dict(p), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

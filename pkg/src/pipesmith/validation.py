"""Structural validation of pipelines and mechanical repair.

Fifteen rules, ten about nodes and five about edges. Every violation is
an error; there is no warning tier. Each issue is tagged with how it can
be fixed: ``mechanical`` issues have a safe, deterministic rewrite that
apply_mechanical_fixes performs, everything else needs the graph to be
rebuilt by a smarter agent.

Diagnostic philosophy: report every root cause, once. An edge whose
target is an input node is reported as the input-node rule, not also as
a bad endpoint; a router fed by another router is reported as chaining,
not also as a bad predecessor; a node whose function id is unknown gets
that one issue rather than a cascade of port and reachability noise.
Local rules (port feeding, dangling outputs) count raw edges so a
defect on the far side of an edge is not reported twice, while
reachability works on node-to-node adjacency so a broken port does not
disconnect the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir.catalog import FunctionCatalog
from .ir.model import Edge, Node, NodeKind, Pipeline

MECHANICAL = "mechanical"
LLM_ASSISTED = "llm_assisted"

# code -> fixability, one code per graph constraint
CODE_FIXABILITY: dict[str, str] = {
    # node rules
    "INPUT_HAS_PREDECESSOR": LLM_ASSISTED,
    "INPUT_PORT_COUNT": LLM_ASSISTED,
    "OUTPUT_HAS_SUCCESSOR": LLM_ASSISTED,
    "DUP_OUTPUT": MECHANICAL,
    "ROUTER_PREDECESSOR": LLM_ASSISTED,
    "ROUTER_PORTS": LLM_ASSISTED,
    "ROUTER_CHAIN": LLM_ASSISTED,
    "UNKNOWN_FUNCTION": LLM_ASSISTED,
    "UNKNOWN_PARAM": LLM_ASSISTED,
    "MISSING_REQUIRED_PARAM": LLM_ASSISTED,
    # edge rules
    "PORT_FEED": LLM_ASSISTED,
    "DANGLING_OUTPUT": LLM_ASSISTED,
    "UNREACHABLE": LLM_ASSISTED,
    "EDGE_ENDPOINT": MECHANICAL,
    "MODALITY_MISMATCH": LLM_ASSISTED,
}


def classify_fixability(code: str) -> str:
    try:
        return CODE_FIXABILITY[code]
    except KeyError:
        raise ValueError(f"unknown issue code {code!r}") from None


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    location: str
    message: str
    severity: str = "error"

    @property
    def fixability(self) -> str:
        return CODE_FIXABILITY[self.code]

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "fixability": self.fixability,
            "location": self.location,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def is_valid(self) -> bool:
        return not self.issues

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    def to_dict(self) -> dict:
        return {"issues": [i.to_dict() for i in self.issues], "is_valid": self.is_valid}


@dataclass(frozen=True)
class AppliedFix:
    code: str
    location: str
    description: str

    def to_dict(self) -> dict:
        return {"code": self.code, "location": self.location, "description": self.description}


def _edge_loc(e: Edge) -> str:
    return f"{e.source}->{e.target}"


@dataclass
class _EdgeView:
    """One edge, resolved against the pipeline as far as it goes."""

    edge: Edge
    src_node: Node | None
    tgt_node: Node | None
    feeds_input_node: bool = False
    leaves_output_node: bool = False
    src_port: object = None
    tgt_port: object = None

    @property
    def live(self) -> bool:
        return self.src_port is not None and self.tgt_port is not None

    @property
    def nodes_exist(self) -> bool:
        return self.src_node is not None and self.tgt_node is not None


def _resolve_edges(p: Pipeline) -> list[_EdgeView]:
    views = []
    for e in p.edges:
        v = _EdgeView(e, p.nodes.get(e.source.node), p.nodes.get(e.target.node))
        if v.tgt_node is not None and v.tgt_node.kind is NodeKind.INPUT:
            v.feeds_input_node = True
        if v.src_node is not None and v.src_node.kind is NodeKind.OUTPUT:
            v.leaves_output_node = True
        if v.nodes_exist and not v.feeds_input_node and not v.leaves_output_node:
            v.src_port = v.src_node.output_port(e.source.port)
            v.tgt_port = v.tgt_node.input_port(e.target.port)
        views.append(v)
    return views


def _param_slot_names(node: Node, catalog: FunctionCatalog) -> frozenset[str]:
    """Input ports of a function node that stand for required parameters."""
    if node.kind is not NodeKind.FUNCTION or node.function_id is None:
        return frozenset()
    spec = catalog.get(node.function_id)
    if spec is None:
        return frozenset()
    data_names = {p.name for p in spec.inputs}
    return frozenset(rp.name for rp in spec.required_params if rp.name not in data_names)


def validate(p: Pipeline, catalog: FunctionCatalog) -> ValidationReport:
    issues: list[ValidationIssue] = []

    def add(code: str, location: str, message: str) -> None:
        issues.append(ValidationIssue(code=code, location=location, message=message))

    views = _resolve_edges(p)
    opaque = {
        n.id
        for n in p.nodes.values()
        if n.kind is NodeKind.FUNCTION
        and (n.function_id is None or catalog.get(n.function_id) is None)
    }

    raw_feeds: dict[tuple[str, str], int] = {}
    raw_consumes: dict[tuple[str, str], int] = {}
    input_preds: dict[str, set[str]] = {}
    output_succs: dict[str, set[str]] = {}
    for v in views:
        e = v.edge
        if v.feeds_input_node:
            input_preds.setdefault(e.target.node, set()).add(e.source.node)
        if v.leaves_output_node:
            output_succs.setdefault(e.source.node, set()).add(e.target.node)
        if v.feeds_input_node or v.leaves_output_node:
            continue
        if not v.nodes_exist:
            add("EDGE_ENDPOINT", _edge_loc(e), "edge references a node that does not exist")
            continue
        if not v.live:
            missing = []
            if v.src_port is None:
                missing.append(f"{e.source} is not an output parameter of {e.source.node!r}")
            if v.tgt_port is None:
                missing.append(f"{e.target} is not an input parameter of {e.target.node!r}")
            add("EDGE_ENDPOINT", _edge_loc(e), "; ".join(missing))
            continue
        raw_feeds[(e.target.node, e.target.port)] = raw_feeds.get((e.target.node, e.target.port), 0) + 1
        raw_consumes[(e.source.node, e.source.port)] = raw_consumes.get((e.source.node, e.source.port), 0) + 1
        if v.src_node.kind is NodeKind.ROUTER and v.tgt_node.kind is NodeKind.ROUTER:
            add("ROUTER_CHAIN", _edge_loc(e), "router feeds another router; routers cannot be chained")
        if v.src_port.modality is not v.tgt_port.modality:
            add(
                "MODALITY_MISMATCH",
                _edge_loc(e),
                f"cannot connect {v.src_port.modality.value} to {v.tgt_port.modality.value}",
            )

    # Edges reported on the input-predecessor or output-successor rules
    # still count as using their healthy end, so that single defect does
    # not also surface as dangling or unfed ports. Endpoint-broken edges
    # count nowhere: the mechanical fix removes them, and the remaining
    # report must already be what re-validation will say.
    for v in views:
        e = v.edge
        if v.live:
            continue
        if v.feeds_input_node and not v.leaves_output_node and v.src_node is not None:
            if v.src_node.output_port(e.source.port) is not None:
                raw_consumes[(e.source.node, e.source.port)] = raw_consumes.get((e.source.node, e.source.port), 0) + 1
        if v.leaves_output_node and not v.feeds_input_node and v.tgt_node is not None:
            if v.tgt_node.input_port(e.target.port) is not None:
                raw_feeds[(e.target.node, e.target.port)] = raw_feeds.get((e.target.node, e.target.port), 0) + 1

    for node_id, preds in sorted(input_preds.items()):
        add(
            "INPUT_HAS_PREDECESSOR",
            node_id,
            "input node is fed by " + ", ".join(sorted(preds)) + "; input nodes take no edges",
        )
    for node_id, succs in sorted(output_succs.items()):
        add(
            "OUTPUT_HAS_SUCCESSOR",
            node_id,
            "output node feeds " + ", ".join(sorted(succs)) + "; output nodes are terminal",
        )

    live_edges = [v.edge for v in views if v.live]

    # duplicate outputs: several output nodes hanging off one source endpoint
    outputs_by_source: dict[str, list[str]] = {}
    for e in live_edges:
        tgt = p.nodes[e.target.node]
        if tgt.kind is NodeKind.OUTPUT:
            outputs_by_source.setdefault(str(e.source), []).append(tgt.id)
    for source, out_ids in sorted(outputs_by_source.items()):
        distinct = sorted(set(out_ids))
        if len(distinct) > 1:
            add(
                "DUP_OUTPUT",
                f"{source}->" + ",".join(distinct),
                f"{len(distinct)} output nodes ({', '.join(distinct)}) share the link from {source}",
            )

    for node in sorted(p.nodes.values(), key=lambda n: n.id):
        if node.id in opaque:
            add(
                "UNKNOWN_FUNCTION",
                node.id,
                f"function {node.function_id!r} is not in the catalog",
            )
            continue

        if node.kind is NodeKind.INPUT and (len(node.output_ports) != 1 or node.input_ports):
            add(
                "INPUT_PORT_COUNT",
                node.id,
                f"input node must expose exactly one output parameter, found {len(node.output_ports)}",
            )

        if node.kind is NodeKind.ROUTER:
            modalities = [port.modality for port in node.output_ports]
            if len(modalities) < 2 or len(set(modalities)) != len(modalities):
                add(
                    "ROUTER_PORTS",
                    node.id,
                    "router needs two or more output parameters with pairwise distinct modalities",
                )
            pred_ids = sorted({e.source.node for e in live_edges if e.target.node == node.id})
            non_router = [p.nodes[i] for i in pred_ids if p.nodes[i].kind is not NodeKind.ROUTER]
            # router->router feeding is the chaining rule's business
            bad = len(non_router) > 1 or (
                len(non_router) == 1 and non_router[0].kind is not NodeKind.INPUT
            )
            if bad:
                add(
                    "ROUTER_PREDECESSOR",
                    node.id,
                    "router must be preceded by exactly one input node, found "
                    + ", ".join(f"{i} ({p.nodes[i].kind.value})" for i in pred_ids),
                )

        if node.kind is NodeKind.FUNCTION:
            spec = catalog.get(node.function_id)
            assert spec is not None  # opaque nodes were skipped above
            known = set(spec.param_names())
            for key in sorted(node.params):
                if key not in known:
                    add(
                        "UNKNOWN_PARAM",
                        node.id,
                        f"{spec.id} takes no parameter {key!r}",
                    )
            slot_fed = {
                name
                for name in _param_slot_names(node, catalog)
                if raw_feeds.get((node.id, name), 0) >= 1
            }
            for rp in spec.required_params:
                value = node.params.get(rp.name)
                if value is None:
                    if rp.name not in slot_fed:
                        add(
                            "MISSING_REQUIRED_PARAM",
                            node.id,
                            f"{spec.id} requires parameter {rp.name!r} (set a value or feed its port)",
                        )
                elif not isinstance(value, str) or (rp.domain is not None and value not in rp.domain):
                    add(
                        "MISSING_REQUIRED_PARAM",
                        node.id,
                        f"parameter {rp.name!r} has unusable value {value!r}",
                    )

        # port feeding: data inputs want exactly one edge; parameter slots
        # are optional (the required-parameter rule owns their absence)
        # but still reject double feeding; alternative inputs (a function
        # accepting audio OR video) need any one of the group fed
        slots = _param_slot_names(node, catalog)
        fspec = catalog.get(node.function_id) if node.kind is NodeKind.FUNCTION else None
        optional = {ps.name for ps in fspec.inputs if not ps.required} if fspec else set()
        data_ports = [port for port in node.input_ports if port.name not in slots]
        for port in node.input_ports:
            n = raw_feeds.get((node.id, port.name), 0)
            loc = f"{node.id}.{port.name}"
            if n > 1:
                add("PORT_FEED", loc, f"input parameter is fed by {n} edges, wants exactly one")
            elif n == 0 and port.name not in slots and port.name not in optional:
                add("PORT_FEED", loc, "input parameter is never fed")
        if data_ports and all(port.name in optional for port in data_ports):
            if all(raw_feeds.get((node.id, port.name), 0) == 0 for port in data_ports):
                names = ", ".join(port.name for port in data_ports)
                add("PORT_FEED", node.id, f"none of the alternative input parameters ({names}) is fed")

        if node.kind is not NodeKind.OUTPUT:
            for port in node.output_ports:
                if raw_consumes.get((node.id, port.name), 0) == 0:
                    add(
                        "DANGLING_OUTPUT",
                        f"{node.id}.{port.name}",
                        "output parameter flows nowhere; every non-terminal product must be consumed",
                    )

    # reachability over node-to-node adjacency (ports may be broken and
    # separately reported; an edge between existing nodes still connects them)
    adjacency: dict[str, set[str]] = {}
    for v in views:
        if v.nodes_exist:
            adjacency.setdefault(v.src_node.id, set()).add(v.tgt_node.id)
    frontier = [n.id for n in p.nodes.values() if n.kind is NodeKind.INPUT]
    reached = set(frontier)
    while frontier:
        for succ in adjacency.get(frontier.pop(), ()):
            if succ not in reached:
                reached.add(succ)
                frontier.append(succ)
    for node_id in sorted(p.nodes):
        if node_id not in reached and node_id not in opaque:
            add("UNREACHABLE", node_id, "node cannot be reached from any input node")
    if not p.nodes:
        add("UNREACHABLE", "pipeline", "pipeline is empty: no input node, nothing to run")

    issues.sort(key=lambda i: (i.code, i.location, i.message))
    return ValidationReport(issues=tuple(issues))


def _mechanical_edge_kills(p: Pipeline) -> list[Edge]:
    kills = []
    for v in _resolve_edges(p):
        if v.feeds_input_node or v.leaves_output_node:
            continue
        if not v.nodes_exist or not v.live:
            kills.append(v.edge)
    return kills


def _duplicate_output_removals(p: Pipeline) -> list[tuple[str, list[str]]]:
    outputs_by_source: dict[str, list[str]] = {}
    for v in _resolve_edges(p):
        if v.live and v.tgt_node.kind is NodeKind.OUTPUT:
            outputs_by_source.setdefault(str(v.edge.source), []).append(v.tgt_node.id)
    removals = []
    for source, out_ids in sorted(outputs_by_source.items()):
        distinct = sorted(set(out_ids))
        if len(distinct) > 1:
            removals.append((source, distinct[1:]))  # smallest id survives
    return removals


def apply_mechanical_fixes(
    p: Pipeline, report: ValidationReport
) -> tuple[Pipeline, list[AppliedFix]]:
    if not any(i.fixability == MECHANICAL for i in report.issues):
        return p, []

    applied: list[AppliedFix] = []
    current = p
    for _ in range(len(p.nodes) + len(p.edges) + 1):
        edge_kills = _mechanical_edge_kills(current)
        dup_removals = _duplicate_output_removals(current)
        if not edge_kills and not dup_removals:
            break
        doomed_nodes: set[str] = set()
        for source, victims in dup_removals:
            doomed_nodes.update(victims)
            applied.append(
                AppliedFix(
                    code="DUP_OUTPUT",
                    location=source,
                    description="removed duplicate output node(s) " + ", ".join(victims),
                )
            )
        doomed_edges = set(edge_kills)
        for e in edge_kills:
            applied.append(
                AppliedFix(
                    code="EDGE_ENDPOINT",
                    location=_edge_loc(e),
                    description="removed edge with nonexistent endpoint",
                )
            )
        nodes = {nid: n for nid, n in current.nodes.items() if nid not in doomed_nodes}
        edges = [
            e
            for e in current.edges
            if e not in doomed_edges
            and e.source.node not in doomed_nodes
            and e.target.node not in doomed_nodes
        ]
        current = Pipeline(nodes=nodes, edges=edges, metadata=current.metadata)
    return current, applied

"""Core data model: typed dataflow graphs of AI functions.

A pipeline is a directed acyclic graph. Nodes are data sources (inputs),
sinks (outputs), catalog functions, or one of the special control nodes
(router, decision, script, generic LLM). Edges connect a named output
port of one node to a named input port of another; every port carries
exactly one modality.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Modality(str, enum.Enum):
    """Kinds of data that can flow along an edge."""

    TEXT = "text"
    AUDIO = "audio"
    IMAGE = "image"
    VIDEO = "video"
    LABEL = "label"
    NUMBER = "number"
    TABULAR = "tabular"
    EMBEDDING = "embedding"

    @classmethod
    def parse(cls, value: str) -> "Modality":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown modality {value!r}") from None


class NodeKind(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"
    FUNCTION = "function"
    ROUTER = "router"
    DECISION = "decision"
    SCRIPT = "script"
    GENERIC_LLM = "generic_llm"

    @classmethod
    def parse(cls, value: str) -> "NodeKind":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown node kind {value!r}") from None


@dataclass(frozen=True)
class Port:
    """A named, typed attachment point on one side of a node."""

    name: str
    modality: Modality


@dataclass(frozen=True)
class ParamSpec:
    """Declared data input or output of a catalog function."""

    name: str
    modality: Modality
    required: bool = True


@dataclass(frozen=True)
class RequiredParam:
    """Named parameter a function needs, e.g. a language code.

    The parameter is satisfied either by a static value on the node or by
    an edge into the like-named label port (a language identifier feeding
    a translation node, say). ``domain`` lists allowed values; None means
    unconstrained.
    """

    name: str
    domain: tuple[str, ...] | None = None


@dataclass(frozen=True)
class FunctionSpec:
    """One entry of the AI function catalog."""

    id: str
    display_name: str
    inputs: tuple[ParamSpec, ...]
    outputs: tuple[ParamSpec, ...]
    required_params: tuple[RequiredParam, ...] = ()

    def __post_init__(self) -> None:
        if not self.inputs or not self.outputs:
            raise ValueError(f"function {self.id!r} needs at least one input and one output")
        for side in (self.inputs, self.outputs):
            names = [p.name for p in side]
            if len(names) != len(set(names)):
                raise ValueError(f"function {self.id!r} has duplicate port names")

    def input_ports(self) -> list[Port]:
        """Data ports plus one label-typed slot per required parameter."""
        ports = [Port(p.name, p.modality) for p in self.inputs]
        taken = {p.name for p in ports}
        for rp in self.required_params:
            if rp.name not in taken:
                ports.append(Port(rp.name, Modality.LABEL))
        return ports

    def output_ports(self) -> list[Port]:
        return [Port(p.name, p.modality) for p in self.outputs]

    def param_names(self) -> set[str]:
        return {rp.name for rp in self.required_params}


@dataclass
class Node:
    """A single step of a pipeline.

    ``function_id`` is set only for function nodes, ``payload`` holds the
    prompt of a generic LLM node or the code of a script node. Ports are
    derived from the kind, the params, and the catalog; they are stored
    here so validation and matching never need the catalog again.
    """

    id: str
    kind: NodeKind
    function_id: str | None = None
    params: dict = field(default_factory=dict)
    input_ports: list[Port] = field(default_factory=list)
    output_ports: list[Port] = field(default_factory=list)
    payload: str | None = None

    def input_port(self, name: str) -> Port | None:
        return next((p for p in self.input_ports if p.name == name), None)

    def output_port(self, name: str) -> Port | None:
        return next((p for p in self.output_ports if p.name == name), None)


@dataclass(frozen=True)
class Endpoint:
    node: str
    port: str

    def __str__(self) -> str:
        return f"{self.node}.{self.port}"


@dataclass(frozen=True)
class Edge:
    """Data flow from an output port to an input port."""

    source: Endpoint
    target: Endpoint

    def __str__(self) -> str:
        return f"{self.source}->{self.target}"


def _edge_sort_key(e: Edge) -> tuple[str, str, str, str]:
    return (e.source.node, e.source.port, e.target.node, e.target.port)


@dataclass
class Pipeline:
    """A directed acyclic graph of nodes and port-to-port edges.

    Nodes are keyed by id; edges are kept sorted so that two pipelines
    with the same content compare and serialize identically. Instances
    are treated as immutable after construction.
    """

    nodes: dict[str, Node] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.edges = sorted(set(self.edges), key=_edge_sort_key)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pipeline):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.metadata == other.metadata
        )

    def nodes_by_kind(self, kind: NodeKind) -> list[Node]:
        return [n for n in self.nodes.values() if n.kind is kind]

    def live_edges(self) -> list[Edge]:
        """Edges whose endpoints both resolve to existing nodes and ports.

        Structural rules other than the existence check itself only look
        at live edges, so that removing a broken edge can never surface
        new violations of a stricter kind.
        """
        out = []
        for e in self.edges:
            src = self.nodes.get(e.source.node)
            tgt = self.nodes.get(e.target.node)
            if src is None or tgt is None:
                continue
            if src.output_port(e.source.port) is None:
                continue
            if tgt.input_port(e.target.port) is None:
                continue
            out.append(e)
        return out

    def out_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.source.node == node_id]

    def in_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.target.node == node_id]

    def successors(self, node_id: str) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.edges:
            if e.source.node == node_id and e.target.node in self.nodes:
                seen.setdefault(e.target.node, None)
        return list(seen)

    def predecessors(self, node_id: str) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.edges:
            if e.target.node == node_id and e.source.node in self.nodes:
                seen.setdefault(e.source.node, None)
        return list(seen)

    def find_cycle(self) -> list[str] | None:
        """Return one cycle as a node id list, or None if acyclic."""
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {nid: WHITE for nid in self.nodes}
        stack: list[str] = []

        def visit(nid: str) -> list[str] | None:
            color[nid] = GRAY
            stack.append(nid)
            for succ in self.successors(nid):
                if color[succ] == GRAY:
                    return stack[stack.index(succ):] + [succ]
                if color[succ] == WHITE:
                    found = visit(succ)
                    if found:
                        return found
            stack.pop()
            color[nid] = BLACK
            return None

        for nid in sorted(self.nodes):
            if color[nid] == WHITE:
                found = visit(nid)
                if found:
                    return found
        return None


@dataclass(frozen=True)
class Branch:
    """All the work feeding one output node, in topological order."""

    output_node_id: str
    node_ids_in_path_order: tuple[str, ...]
    comment: str = ""


@dataclass(frozen=True)
class SpecRow:
    role: str  # "input" | "output"
    name: str
    modality: Modality
    language: str | None = None
    extra: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Specification:
    """Structured restatement of what a pipeline must consume and produce."""

    rows: tuple[SpecRow, ...]

    def __post_init__(self) -> None:
        roles = {r.role for r in self.rows}
        if "input" not in roles or "output" not in roles:
            raise ValueError("specification needs at least one input row and one output row")

    def inputs(self) -> list[SpecRow]:
        return [r for r in self.rows if r.role == "input"]

    def outputs(self) -> list[SpecRow]:
        return [r for r in self.rows if r.role == "output"]

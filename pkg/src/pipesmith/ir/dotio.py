"""A restricted DOT dialect for pipelines.

Example::

    digraph pipeline {
      graph [metadata="%7B%7D"];
      asr [kind="function" function="speech_recognition" params="%7B%22language%22%3A%22en%22%7D"];
      in_video [kind="input" params="%7B%22modality%22%3A%22video%22%7D"];
      in_video -> asr [ports="video->video"];
    }

One statement per line. Node statements carry kind/function/params/payload
attributes; params and payload are URL-encoded (params holds compact JSON).
Edge statements carry a ports attribute "sourcePort->targetPort". Attributes
outside that set are ignored, so files decorated with label/shape/color for
rendering still parse. Output is deterministic: nodes sorted by id, edges in
canonical order, attributes in a fixed sequence.
"""

from __future__ import annotations

import json
import re
import urllib.parse

from .catalog import FunctionCatalog
from .jsonio import PipelineParseError, _Problems, parse_pipeline_dict, pipeline_to_dict
from .model import Pipeline

_BARE_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN = r'(?:[A-Za-z_][A-Za-z0-9_]*|"(?:[^"\\]|\\.)*")'
_NODE_STMT = re.compile(rf"({_TOKEN})\s*(\[(.*)\])?\s*;?$")
_EDGE_STMT = re.compile(rf"({_TOKEN})\s*->\s*({_TOKEN})\s*(\[(.*)\])?\s*;?$")
_ATTR = re.compile(rf"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*({_TOKEN})\s*,?\s*")


def _unquote_id(token: str) -> str:
    if token.startswith('"'):
        return token[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    return token


def _parse_attrs(text: str, loc: str, problems: _Problems) -> dict[str, str] | None:
    attrs: dict[str, str] = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _ATTR.match(text, pos)
        if m is None:
            problems.add(loc, f"cannot read attributes near {text[pos:pos + 20]!r}")
            return None
        attrs[m.group(1)] = _unquote_id(m.group(2))
        pos = m.end()
    return attrs


def _decode_json_attr(attrs: dict[str, str], key: str, loc: str, problems: _Problems):
    if key not in attrs:
        return None
    try:
        return json.loads(urllib.parse.unquote(attrs[key]))
    except (json.JSONDecodeError, ValueError):
        problems.add(loc, f"attribute {key!r} does not hold URL-encoded JSON")
        return None


def parse_pipeline_dot(text: str, catalog: FunctionCatalog) -> Pipeline:
    problems = _Problems()
    lines = text.splitlines()
    body: list[tuple[int, str]] = []
    opened = closed = False
    for i, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("//") or line.startswith("#"):
            continue
        if not opened:
            if re.match(rf"digraph(\s+{_TOKEN})?\s*\{{$", line):
                opened = True
                continue
            problems.add(f"line {i}", "expected 'digraph <name> {'")
            problems.raise_if_any()
        if line == "}":
            closed = True
            continue
        if closed:
            problems.add(f"line {i}", "statement after closing brace")
            continue
        body.append((i, line))
    if not opened or not closed:
        problems.add("line 1" if not opened else f"line {len(lines)}", "unbalanced digraph braces")
    problems.raise_if_any()

    nodes: list[dict] = []
    edges: list[dict] = []
    metadata: dict = {}
    for i, line in body:
        loc = f"line {i}"
        edge = _EDGE_STMT.match(line)
        if edge is not None:
            attrs = _parse_attrs(edge.group(4) or "", loc, problems)
            if attrs is None:
                continue
            ports = attrs.get("ports")
            if ports is None or "->" not in ports:
                problems.add(loc, "edge needs a ports=\"src->tgt\" attribute")
                continue
            src_port, tgt_port = ports.split("->", 1)
            edges.append({
                "from": f"{_unquote_id(edge.group(1))}.{src_port}",
                "to": f"{_unquote_id(edge.group(2))}.{tgt_port}",
            })
            continue
        stmt = _NODE_STMT.match(line)
        if stmt is None:
            problems.add(loc, "statement is neither a node nor an edge")
            continue
        name = _unquote_id(stmt.group(1))
        attrs = _parse_attrs(stmt.group(3) or "", loc, problems)
        if attrs is None:
            continue
        if name == "graph":
            meta = _decode_json_attr(attrs, "metadata", loc, problems)
            if meta is not None:
                if isinstance(meta, dict):
                    metadata = meta
                else:
                    problems.add(loc, "graph metadata must be a JSON object")
            continue
        if name in ("node", "edge"):
            continue  # dialect ignores global attribute defaults
        if "kind" not in attrs:
            problems.add(loc, f"node {name!r} is missing the kind attribute")
            continue
        raw_node: dict = {"id": name, "kind": attrs["kind"]}
        if "function" in attrs:
            raw_node["function"] = attrs["function"]
        params = _decode_json_attr(attrs, "params", loc, problems)
        if params is not None:
            raw_node["params"] = params
        if "payload" in attrs:
            raw_node["payload"] = urllib.parse.unquote(attrs["payload"])
        nodes.append(raw_node)
    problems.raise_if_any()
    return parse_pipeline_dict({"nodes": nodes, "edges": edges, "metadata": metadata}, catalog)


def _dot_id(name: str) -> str:
    if _BARE_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _encode(value) -> str:
    return urllib.parse.quote(json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False), safe="")


def serialize_pipeline_dot(p: Pipeline) -> str:
    doc = pipeline_to_dict(p)
    out = ["digraph pipeline {"]
    if doc["metadata"]:
        out.append(f'  graph [metadata="{_encode(doc["metadata"])}"];')
    for raw in doc["nodes"]:
        attrs = [f'kind="{raw["kind"]}"']
        if "function" in raw:
            attrs.append(f'function="{raw["function"]}"')
        attrs.append(f'params="{_encode(raw["params"])}"')
        if "payload" in raw:
            attrs.append(f'payload="{urllib.parse.quote(raw["payload"], safe="")}"')
        out.append(f'  {_dot_id(raw["id"])} [{" ".join(attrs)}];')
    for raw in doc["edges"]:
        src_node, src_port = raw["from"].split(".", 1)
        tgt_node, tgt_port = raw["to"].split(".", 1)
        out.append(
            f'  {_dot_id(src_node)} -> {_dot_id(tgt_node)} [ports="{src_port}->{tgt_port}"];'
        )
    out.append("}")
    return "\n".join(out) + "\n"


__all__ = ["PipelineParseError", "parse_pipeline_dot", "serialize_pipeline_dot"]

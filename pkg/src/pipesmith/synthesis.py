"""Rule-based reference pipelines plus query generation around them.

expand_pipeline grows a valid pipeline from seeded randomness: start
with input nodes, repeatedly attach a catalog function whose single
required input (or optional-alternative input) consumes an open output
port, then cap every still-open port with an output node. Growth only
ever attaches to a port with spare child capacity, so the two-children
bound holds by construction, and every finished pipeline must pass the
validator with zero issues before it is returned.

The query side derives a Specification mechanically from the input and
output nodes and asks an LLM for two phrasings: a clear request that
enumerates everything, and a deliberately vague one with instructions
to omit selected details. rate_ambiguity asks an LLM to grade a query
against a three-level rubric.

Datasets are line-delimited JSON, one entry per line, written with
sorted keys so files are byte-stable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .gateway import ChatMessage, ChatRequest
from .ir import FunctionCatalog, parse_pipeline_dict, pipeline_to_dict
from .ir.model import Modality, NodeKind, Pipeline, Specification, SpecRow
from .validation import validate

AMBIGUITY_LEVELS = ("unambiguous", "ambiguous", "very_ambiguous")
PROVENANCES = ("manual", "synthetic")

_INPUT_MODALITIES = ("text", "audio", "video", "image")
_LANGUAGE_AWARE = {Modality.TEXT, Modality.AUDIO, Modality.VIDEO}
_LANGUAGES = ("ar", "de", "en", "es", "fr", "hi", "pt", "zh")


class SynthesisError(RuntimeError):
    pass


class DatasetError(ValueError):
    pass


class AmbiguityParseError(ValueError):
    def __init__(self, message: str, response: str):
        super().__init__(f"{message}: {response!r}")
        self.response = response


@dataclass(frozen=True)
class SynthesisConfig:
    n_function_nodes: int
    catalog: FunctionCatalog
    max_children: int = 2
    n_inputs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_function_nodes < 1:
            raise ValueError("n_function_nodes must be at least 1")
        if self.n_inputs < 1:
            raise ValueError("n_inputs must be at least 1")
        if self.max_children < 1:
            raise ValueError("max_children must be at least 1")


@dataclass
class _OpenPort:
    node: str
    name: str
    modality: Modality
    language: str | None
    producer_fid: str | None
    consumers: int = 0


def _attachment_table(catalog: FunctionCatalog):
    """modality -> [(FunctionSpec, input port name)] for growable functions.

    Growable means a single required data input, or none required with
    optional alternatives (then any alternative is an attachment point).
    Functions needing two simultaneous data feeds would break the
    one-edge-per-step growth and are left to hand-authored pipelines.
    """
    table: dict[Modality, list] = {}
    for fid in sorted(catalog.ids()):
        spec = catalog.lookup(fid)
        if len(spec.outputs) != 1:
            continue
        required = [p for p in spec.inputs if p.required]
        if len(required) == 1:
            table.setdefault(required[0].modality, []).append((spec, required[0].name))
        elif not required:
            for p in spec.inputs:
                table.setdefault(p.modality, []).append((spec, p.name))
    return table


def _sample_params(spec, rng: random.Random) -> dict:
    params = {}
    for rp in spec.required_params:
        domain = rp.domain or _LANGUAGES
        params[rp.name] = rng.choice(sorted(domain))
    src = params.get("source_language")
    tgt = params.get("target_language")
    if src is not None and src == tgt:
        domain = next(
            (rp.domain or _LANGUAGES)
            for rp in spec.required_params
            if rp.name == "target_language"
        )
        options = sorted(v for v in domain if v != src)
        if options:
            params["target_language"] = rng.choice(options)
    return params


def _function_language(spec, params: dict, inherited: str | None) -> str | None:
    if "target_language" in params:
        return params["target_language"]
    if "language" in params:
        return params["language"]
    return inherited


def expand_pipeline(cfg: SynthesisConfig) -> Pipeline:
    rng = random.Random(cfg.seed)
    table = _attachment_table(cfg.catalog)
    growable = set(table)

    nodes: list[dict] = []
    edges: list[dict] = []
    ports: list[_OpenPort] = []

    for i in range(cfg.n_inputs):
        modality = Modality(rng.choice(_INPUT_MODALITIES))
        language = rng.choice(_LANGUAGES) if modality in _LANGUAGE_AWARE else None
        nid = f"in{i + 1}"
        params = {"modality": modality.value}
        if language:
            params["language"] = language
        nodes.append({"id": nid, "kind": "input", "params": params})
        ports.append(_OpenPort(nid, modality.value, modality, language, None))

    for k in range(1, cfg.n_function_nodes + 1):
        attachable = [p for p in ports if p.consumers < cfg.max_children and p.modality in growable]
        if not attachable:
            open_mods = sorted({p.modality.value for p in ports if p.consumers < cfg.max_children})
            raise SynthesisError(
                f"no catalog function consumes any attachable modality (open: {open_mods})"
            )
        choices = [
            (port, spec, port_name)
            for port in attachable
            for spec, port_name in table[port.modality]
        ]
        # avoid stacking a function directly on its own kind
        varied = [c for c in choices if c[1].id != c[0].producer_fid]
        pool = varied or choices
        if k < cfg.n_function_nodes:
            # keep at least one attachment point for the next function
            def still_growable(choice):
                port, spec, _ = choice
                remaining = sum(
                    1
                    for p in ports
                    if p.modality in growable
                    and p.consumers + (1 if p is port else 0) < cfg.max_children
                )
                return remaining > 0 or spec.outputs[0].modality in growable

            safe = [c for c in pool if still_growable(c)]
            pool = safe or pool
        pool.sort(key=lambda c: (c[0].node, c[0].name, c[1].id, c[2]))
        port, spec, in_port = pool[rng.randrange(len(pool))]

        nid = f"f{k}"
        params = _sample_params(spec, rng)
        nodes.append({"id": nid, "kind": "function", "function": spec.id, "params": params})
        edges.append({"from": f"{port.node}.{port.name}", "to": f"{nid}.{in_port}"})
        port.consumers += 1
        out = spec.outputs[0]
        ports.append(
            _OpenPort(
                nid, out.name, out.modality,
                _function_language(spec, params, port.language), spec.id,
            )
        )

    n_out = 0
    for port in ports:
        if port.consumers:
            continue
        n_out += 1
        nid = f"out{n_out}"
        params = {"modality": port.modality.value}
        if port.language and port.modality in _LANGUAGE_AWARE:
            params["language"] = port.language
        nodes.append({"id": nid, "kind": "output", "params": params})
        edges.append({"from": f"{port.node}.{port.name}", "to": f"{nid}.{port.modality.value}"})
        port.consumers += 1

    doc = {
        "metadata": {"generator": {"seed": cfg.seed, "n_function_nodes": cfg.n_function_nodes}},
        "nodes": nodes,
        "edges": edges,
    }
    pipeline = parse_pipeline_dict(doc, cfg.catalog)
    report = validate(pipeline, cfg.catalog)
    if report.issues:
        codes = sorted({i.code for i in report.issues})
        raise SynthesisError(f"generated pipeline failed validation: {codes}")
    return pipeline


def specification_from_pipeline(p: Pipeline) -> Specification:
    rows = []
    for node in sorted(p.nodes_by_kind(NodeKind.INPUT), key=lambda n: n.id):
        rows.append(
            SpecRow(
                role="input",
                name=node.id,
                modality=Modality(node.params["modality"]),
                language=node.params.get("language"),
            )
        )
    for node in sorted(p.nodes_by_kind(NodeKind.OUTPUT), key=lambda n: n.id):
        rows.append(
            SpecRow(
                role="output",
                name=node.id,
                modality=Modality(node.params["modality"]),
                language=node.params.get("language"),
            )
        )
    return Specification(tuple(rows))


def render_specification(spec: Specification) -> str:
    lines = []
    for row in spec.rows:
        language = f", language {row.language}" if row.language else ""
        lines.append(f"- {row.role} {row.name}: {row.modality.value}{language}")
    return "\n".join(lines)


CLEAR_QUERY_PROMPT = """You write requests for an AI pipeline building service.
Below is the input/output specification of a pipeline. Write ONE short,
natural user request that explicitly enumerates every input and every
output, including modalities and languages. Reply with the request only.

{table}"""

AMBIGUOUS_QUERY_PROMPT = """You write requests for an AI pipeline building service.
Below is the input/output specification of a pipeline. Write ONE short,
natural user request for this pipeline, but make it vague: omit the
following details entirely: {omissions}. Do not hint at the omitted
values. Reply with the request only.

{table}"""

AMBIGUITY_RUBRIC_PROMPT = """Rate how ambiguous the following request to an AI
pipeline building service is. Answer with exactly one of:
- unambiguous: every input and output is fully specified (modalities and
  languages where applicable)
- ambiguous: one or two details are missing (a language, a modality)
- very ambiguous: the request leaves most of the pipeline unspecified

Request: {query}

Answer with just the level."""


def generate_spec_and_queries(p: Pipeline, llm, model: str = "utility-model"):
    spec = specification_from_pipeline(p)
    table = render_specification(spec)
    clear = llm.chat(
        ChatRequest(
            model=model,
            messages=(ChatMessage("user", CLEAR_QUERY_PROMPT.format(table=table)),),
        )
    ).content.strip()
    omitted = sorted({f"the {r.modality.value} language" for r in spec.rows if r.language})
    omitted.append("the exact number of outputs")
    ambiguous = llm.chat(
        ChatRequest(
            model=model,
            messages=(
                ChatMessage(
                    "user",
                    AMBIGUOUS_QUERY_PROMPT.format(table=table, omissions="; ".join(omitted)),
                ),
            ),
        )
    ).content.strip()
    return spec, clear, ambiguous


def rate_ambiguity(query: str, llm, model: str = "utility-model") -> str:
    response = llm.chat(
        ChatRequest(
            model=model,
            messages=(ChatMessage("user", AMBIGUITY_RUBRIC_PROMPT.format(query=query)),),
        )
    ).content
    text = response.strip().lower().replace("_", " ")
    if "very ambiguous" in text:
        return "very_ambiguous"
    if "unambiguous" in text:
        return "unambiguous"
    if "ambiguous" in text:
        return "ambiguous"
    raise AmbiguityParseError("no ambiguity level in model response", response)


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    ambiguous_query: str
    clear_query: str
    specification: Specification
    reference: Pipeline
    ambiguity_level: str
    provenance: str = "synthetic"

    def __post_init__(self):
        if self.ambiguity_level not in AMBIGUITY_LEVELS:
            raise ValueError(f"unknown ambiguity level {self.ambiguity_level!r}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        rows = []
        for r in self.specification.rows:
            row = {"role": r.role, "name": r.name, "modality": r.modality.value}
            if r.language:
                row["language"] = r.language
            if r.extra:
                row["extra"] = dict(r.extra)
            rows.append(row)
        return {
            "id": self.id,
            "ambiguous_query": self.ambiguous_query,
            "clear_query": self.clear_query,
            "ambiguity_level": self.ambiguity_level,
            "provenance": self.provenance,
            "specification": rows,
            "reference": pipeline_to_dict(self.reference),
        }

    @classmethod
    def from_dict(cls, doc: dict, catalog: FunctionCatalog) -> "DatasetEntry":
        rows = tuple(
            SpecRow(
                role=r["role"],
                name=r["name"],
                modality=Modality.parse(r["modality"]),
                language=r.get("language"),
                extra=tuple(sorted(r.get("extra", {}).items())),
            )
            for r in doc["specification"]
        )
        return cls(
            id=doc["id"],
            ambiguous_query=doc["ambiguous_query"],
            clear_query=doc["clear_query"],
            specification=Specification(rows),
            reference=parse_pipeline_dict(doc["reference"], catalog),
            ambiguity_level=doc["ambiguity_level"],
            provenance=doc.get("provenance", "synthetic"),
        )


def write_dataset(entries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry.to_dict(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_dataset(path, catalog: FunctionCatalog) -> list[DatasetEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                entry = DatasetEntry.from_dict(doc, catalog)
            except Exception as exc:
                raise DatasetError(f"line {lineno}: {exc}") from exc
            report = validate(entry.reference, catalog)
            if report.issues:
                codes = sorted({i.code for i in report.issues})
                raise DatasetError(
                    f"line {lineno}: reference of entry {entry.id!r} is invalid: {codes}"
                )
            _check_spec_consistency(entry, lineno)
            entries.append(entry)
    return entries


def _check_spec_consistency(entry: DatasetEntry, lineno: int) -> None:
    spec_inputs = {r.name for r in entry.specification.inputs()}
    spec_outputs = {r.name for r in entry.specification.outputs()}
    node_inputs = {n.id for n in entry.reference.nodes_by_kind(NodeKind.INPUT)}
    node_outputs = {n.id for n in entry.reference.nodes_by_kind(NodeKind.OUTPUT)}
    if spec_inputs != node_inputs or spec_outputs != node_outputs:
        raise DatasetError(
            f"line {lineno}: specification rows of entry {entry.id!r} do not match "
            f"the reference pipeline's input/output nodes"
        )

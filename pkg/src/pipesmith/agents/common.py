"""Prompt templates, packaged data, and small rendering helpers."""

from __future__ import annotations

import functools
import json
from collections.abc import Sequence
from importlib import resources

from ..ir.catalog import FunctionCatalog
from ..ir.model import Modality, Specification, SpecRow


@functools.cache
def prompt(name: str) -> str:
    path = resources.files("pipesmith.agents") / "prompts" / f"{name}.txt"
    return path.read_text(encoding="utf-8")


def fill(template: str, **values: object) -> str:
    # str.format would trip over the literal JSON braces in the templates
    out = template
    for key, val in values.items():
        out = out.replace("{" + key + "}", str(val))
    return out


def parse_json_reply(text: str):
    """json.loads with tolerance for one fenced code block around the payload."""
    body = text.strip()
    if body.startswith("```"):
        lines = body.splitlines()
        if len(lines) >= 2 and lines[-1].strip().startswith("```"):
            lines = lines[1:-1]
        else:
            lines = lines[1:]
        body = "\n".join(lines).strip()
    return json.loads(body)


def render_conversation(messages: Sequence[tuple[str, str]]) -> str:
    return "\n".join(f"{role}: {text}" for role, text in messages)


def render_catalog(catalog: FunctionCatalog) -> str:
    lines = []
    for spec in sorted(catalog, key=lambda s: s.id):
        ins = ", ".join(
            f"{p.name}:{p.modality.value}" + ("" if p.required else "?") for p in spec.inputs
        )
        outs = ", ".join(f"{p.name}:{p.modality.value}" for p in spec.outputs)
        params = ", ".join(sorted(spec.param_names())) or "none"
        lines.append(f"- {spec.id}: ({ins}) -> ({outs}); required params: {params}")
    return "\n".join(lines)


@functools.cache
def builder_examples() -> str:
    raw = (resources.files("pipesmith.agents") / "data" / "examples.json").read_text(
        encoding="utf-8"
    )
    parts = []
    for entry in json.loads(raw):
        doc = json.dumps(entry["pipeline"], indent=2, sort_keys=True, ensure_ascii=False)
        parts.append(f'Query: {entry["query"]}\n{doc}')
    return "\n\n".join(parts)


def spec_row_dict(row: SpecRow) -> dict:
    doc: dict = {"role": row.role, "name": row.name, "modality": row.modality.value}
    if row.language:
        doc["language"] = row.language
    if row.extra:
        doc["extra"] = dict(row.extra)
    return doc


def spec_to_dicts(spec: Specification) -> list[dict]:
    return [spec_row_dict(r) for r in spec.rows]


def spec_from_dicts(rows: Sequence[dict]) -> Specification:
    return Specification(
        rows=tuple(
            SpecRow(
                role=r["role"],
                name=r["name"],
                modality=Modality(r["modality"]),
                language=r.get("language"),
                extra=tuple(sorted(r.get("extra", {}).items())),
            )
            for r in rows
        )
    )

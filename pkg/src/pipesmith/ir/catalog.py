"""The AI function catalog: which steps exist and how they are typed.

The catalog ships as a JSON data file. Input/output modalities and the
required-parameter lists are curated per entry (the notes field on an
entry records any non-obvious choice).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .model import FunctionSpec, Modality, ParamSpec, RequiredParam

LANGUAGE_CODES = ("ar", "de", "en", "es", "fr", "hi", "pt", "zh")


class CatalogError(ValueError):
    pass


class FunctionCatalog:
    """Lookup table of function specs, case-insensitive on id."""

    def __init__(self, specs: list[FunctionSpec]):
        self._by_id: dict[str, FunctionSpec] = {}
        for spec in specs:
            key = spec.id.lower()
            if key in self._by_id:
                raise CatalogError(f"duplicate function id {spec.id!r}")
            self._by_id[key] = spec

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return iter(sorted(self._by_id.values(), key=lambda s: s.id))

    def get(self, function_id: str) -> FunctionSpec | None:
        """The catalog entry for ``function_id``, or None as the not-found signal."""
        if not isinstance(function_id, str):
            return None
        return self._by_id.get(function_id.lower())

    def lookup(self, function_id: str) -> FunctionSpec:
        spec = self.get(function_id)
        if spec is None:
            raise CatalogError(f"unknown function id {function_id!r}")
        return spec

    def ids(self) -> list[str]:
        return sorted(s.id for s in self._by_id.values())

    def consumers_of(self, modality: Modality) -> list[FunctionSpec]:
        """Functions with a required data input of the given modality."""
        return [
            s for s in self
            if any(p.required and p.modality is modality for p in s.inputs)
        ]


def _parse_spec(raw: dict, where: str) -> FunctionSpec:
    try:
        inputs = tuple(
            ParamSpec(p["name"], Modality.parse(p["modality"]), p.get("required", True))
            for p in raw["inputs"]
        )
        outputs = tuple(
            ParamSpec(p["name"], Modality.parse(p["modality"]), p.get("required", True))
            for p in raw["outputs"]
        )
        required = tuple(
            RequiredParam(p["name"], tuple(p["domain"]) if p.get("domain") else None)
            for p in raw.get("required_params", [])
        )
        return FunctionSpec(
            id=raw["id"],
            display_name=raw.get("display_name", raw["id"]),
            inputs=inputs,
            outputs=outputs,
            required_params=required,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"{where}: {exc}") from exc


def parse_catalog(text: str) -> FunctionCatalog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    entries = doc.get("functions")
    if not isinstance(entries, list):
        raise CatalogError("catalog document must contain a 'functions' list")
    specs = [_parse_spec(raw, f"functions[{i}]") for i, raw in enumerate(entries)]
    return FunctionCatalog(specs)


def load_catalog(path: str | Path | None = None) -> FunctionCatalog:
    """Load the catalog from ``path``, or the bundled default."""
    if path is None:
        text = resources.files("pipesmith.ir").joinpath("data/catalog.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_catalog(text)


def lookup_function(catalog: FunctionCatalog, function_id: str) -> FunctionSpec | None:
    return catalog.get(function_id)

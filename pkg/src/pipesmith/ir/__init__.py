"""Typed dataflow graph model, function catalog, and interchange formats."""

from .branches import extract_branches
from .catalog import LANGUAGE_CODES, CatalogError, FunctionCatalog, load_catalog, parse_catalog
from .dotio import parse_pipeline_dot, serialize_pipeline_dot
from .jsonio import (
    PipelineParseError,
    parse_pipeline_dict,
    parse_pipeline_json,
    pipeline_to_dict,
    serialize_pipeline_json,
)
from .model import (
    Branch,
    Edge,
    Endpoint,
    FunctionSpec,
    Modality,
    Node,
    NodeKind,
    ParamSpec,
    Pipeline,
    Port,
    RequiredParam,
    Specification,
    SpecRow,
)

__all__ = [
    "Branch",
    "CatalogError",
    "Edge",
    "Endpoint",
    "FunctionCatalog",
    "FunctionSpec",
    "LANGUAGE_CODES",
    "Modality",
    "Node",
    "NodeKind",
    "ParamSpec",
    "Pipeline",
    "PipelineParseError",
    "Port",
    "RequiredParam",
    "SpecRow",
    "Specification",
    "extract_branches",
    "load_catalog",
    "parse_catalog",
    "parse_pipeline_dict",
    "parse_pipeline_dot",
    "parse_pipeline_json",
    "pipeline_to_dict",
    "serialize_pipeline_dot",
    "serialize_pipeline_json",
]

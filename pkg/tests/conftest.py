import pathlib

import pytest

from pipesmith.ir import load_catalog, parse_pipeline_dict, parse_pipeline_json

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

_CATALOG = load_catalog()


@pytest.fixture(scope="session")
def catalog():
    return _CATALOG


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


def load_fixture(name: str):
    return parse_pipeline_json(read_fixture(name), _CATALOG)


def make_pipeline(nodes: list[dict], edges: list[tuple[str, str]], metadata: dict | None = None):
    doc = {
        "nodes": nodes,
        "edges": [{"from": f, "to": t} for f, t in edges],
        "metadata": metadata or {},
    }
    return parse_pipeline_dict(doc, _CATALOG)


def n(id: str, kind: str, function: str | None = None, params: dict | None = None, payload: str | None = None) -> dict:
    raw: dict = {"id": id, "kind": kind, "params": params or {}}
    if function is not None:
        raw["function"] = function
    if payload is not None:
        raw["payload"] = payload
    return raw

import pytest

from pipesmith.ir import (
    FunctionCatalog,
    Modality,
    NodeKind,
    PipelineParseError,
    extract_branches,
    parse_catalog,
    parse_pipeline_dot,
    parse_pipeline_json,
    serialize_pipeline_dot,
    serialize_pipeline_json,
)
from pipesmith.ir.model import Edge, Endpoint

from conftest import load_fixture, make_pipeline, n, read_fixture


def test_modality_parse_rejects_unknown():
    assert Modality.parse("audio") is Modality.AUDIO
    with pytest.raises(ValueError, match="unknown modality"):
        Modality.parse("smell")


def test_node_kind_parse_rejects_unknown():
    assert NodeKind.parse("generic_llm") is NodeKind.GENERIC_LLM
    with pytest.raises(ValueError):
        NodeKind.parse("widget")


class TestCatalog:
    def test_bundled_catalog_loads(self, catalog):
        assert len(list(catalog)) >= 70

    def test_lookup_is_case_insensitive(self, catalog):
        assert catalog.get("Machine_Translation") is catalog.get("machine_translation")

    def test_get_returns_none_for_unknown(self, catalog):
        assert catalog.get("frobnicate") is None
        with pytest.raises(Exception, match="unknown function"):
            catalog.lookup("frobnicate")

    def test_consumers_of_modality(self, catalog):
        ids = {f.id for f in catalog.consumers_of(Modality.VIDEO)}
        assert "extract_audio_from_video" in ids
        assert "machine_translation" not in ids

    def test_duplicate_ids_rejected(self):
        doc = '{"functions": [{"id": "x", "inputs": [{"name": "a", "modality": "text"}], "outputs": [{"name": "b", "modality": "text"}]}, {"id": "X", "inputs": [{"name": "a", "modality": "text"}], "outputs": [{"name": "b", "modality": "text"}]}]}'
        with pytest.raises(Exception, match="duplicate"):
            parse_catalog(doc)

    def test_required_params_become_label_ports(self, catalog):
        mt = catalog.lookup("machine_translation")
        ports = {p.name: p.modality for p in mt.input_ports()}
        assert ports["source_language"] is Modality.LABEL
        assert ports["target_language"] is Modality.LABEL
        assert ports["text"] is Modality.TEXT


class TestJsonParsing:
    def test_parse_errors_are_aggregated_with_locations(self, catalog):
        doc = """
        {"nodes": [
            {"id": "a", "kind": "widget", "params": {}},
            {"id": "b", "kind": "input", "params": {"modality": "smell"}},
            {"id": "b", "kind": "input", "params": {"modality": "text"}},
            {"id": "c.d", "kind": "input", "params": {"modality": "text"}}
        ], "edges": [{"from": "a", "to": "b.text"}], "metadata": {}}
        """
        with pytest.raises(PipelineParseError) as exc:
            parse_pipeline_json(doc, catalog)
        locations = [loc for loc, _ in exc.value.problems]
        assert locations == ["nodes[0]", "nodes[1]", "nodes[2]", "nodes[3]", "edges[0]"]

    def test_malformed_json_reports_line(self, catalog):
        with pytest.raises(PipelineParseError, match="not valid JSON"):
            parse_pipeline_json("{nope", catalog)

    def test_cycle_is_rejected(self, catalog):
        doc = {
            "nodes": [
                n("a", "function", "text_reconstruction", {}),
                n("b", "function", "text_reconstruction", {}),
            ],
            "edges": [{"from": "a.text", "to": "b.text"}, {"from": "b.text", "to": "a.text"}],
            "metadata": {},
        }
        import json

        with pytest.raises(PipelineParseError, match="cycle"):
            parse_pipeline_json(json.dumps(doc), catalog)

    def test_router_route_rules_checked_at_parse(self, catalog):
        doc = '{"nodes": [{"id": "r", "kind": "router", "params": {"modality": "text", "routes": ["text"]}}], "edges": [], "metadata": {}}'
        with pytest.raises(PipelineParseError, match="distinct"):
            parse_pipeline_json(doc, catalog)

    def test_unknown_function_parses_for_later_diagnosis(self, catalog):
        p = make_pipeline([n("f", "function", "frobnicate", {})], [])
        assert p.nodes["f"].input_ports == []

    def test_duplicate_edges_collapse(self, catalog):
        p = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("out1", "output", params={"modality": "text"})],
            [("in1.text", "out1.text"), ("in1.text", "out1.text")],
        )
        assert len(p.edges) == 1


class TestRoundTrips:
    @pytest.mark.parametrize(
        "name",
        ["video_dubbing.json", "mechanical_issues.json", "residual_issues.json",
         "speech_translation_dual_asr.json", "speech_repair_draft.json", "speech_translation.json"],
    )
    def test_fixture_files_are_canonical(self, name, catalog):
        text = read_fixture(name)
        assert serialize_pipeline_json(parse_pipeline_json(text, catalog)) == text

    def test_dot_round_trip_preserves_everything(self, catalog):
        p = load_fixture("video_dubbing.json")
        dot = serialize_pipeline_dot(p)
        again = parse_pipeline_dot(dot, catalog)
        assert serialize_pipeline_json(again) == serialize_pipeline_json(p)
        assert serialize_pipeline_dot(again) == dot

    def test_dot_round_trip_with_payload_and_metadata(self, catalog):
        p = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("g", "generic_llm", payload='Summarize "this" -> plainly\nsecond line'),
             n("out1", "output", params={"modality": "text"})],
            [("in1.text", "g.text"), ("g.text", "out1.text")],
            metadata={"query": "summarize my docs"},
        )
        dot = serialize_pipeline_dot(p)
        again = parse_pipeline_dot(dot, catalog)
        assert again.nodes["g"].payload == p.nodes["g"].payload
        assert again.metadata == p.metadata


class TestDotParsing:
    def test_missing_kind_attribute(self, catalog):
        text = 'digraph pipeline {\n  a [function="machine_translation"];\n}\n'
        with pytest.raises(PipelineParseError, match="kind"):
            parse_pipeline_dot(text, catalog)

    def test_edge_needs_ports(self, catalog):
        text = 'digraph p {\n  a [kind="input" params="%7B%22modality%22%3A%22text%22%7D"];\n  b [kind="output" params="%7B%22modality%22%3A%22text%22%7D"];\n  a -> b;\n}\n'
        with pytest.raises(PipelineParseError, match="ports"):
            parse_pipeline_dot(text, catalog)

    def test_cosmetic_attrs_and_comments_ignored(self, catalog):
        text = (
            "digraph p {\n"
            "  // a decorated file\n"
            '  a [kind="input" params="%7B%22modality%22%3A%22text%22%7D" shape="box" label="Input"];\n'
            '  b [kind="output" params="%7B%22modality%22%3A%22text%22%7D"];\n'
            '  a -> b [ports="text->text" color="red"];\n'
            "}\n"
        )
        p = parse_pipeline_dot(text, catalog)
        assert set(p.nodes) == {"a", "b"}
        assert len(p.edges) == 1

    def test_garbage_statement_reports_line(self, catalog):
        text = "digraph p {\n  what even is this\n}\n"
        with pytest.raises(PipelineParseError, match="line 2"):
            parse_pipeline_dot(text, catalog)

    def test_unbalanced_braces(self, catalog):
        with pytest.raises(PipelineParseError, match="unbalanced"):
            parse_pipeline_dot('digraph p {\n  a [kind="input"];\n', catalog)


class TestPipelineModel:
    def test_live_edges_exclude_phantoms(self, catalog):
        p = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("out1", "output", params={"modality": "text"})],
            [("in1.text", "out1.text"), ("in1.text", "ghost.text"), ("in1.nope", "out1.text")],
        )
        assert len(p.edges) == 3
        assert len(p.live_edges()) == 1

    def test_edges_are_canonically_ordered(self, catalog):
        a = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("g", "generic_llm", payload="x"),
             n("out1", "output", params={"modality": "text"})],
            [("g.text", "out1.text"), ("in1.text", "g.text")],
        )
        b = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("g", "generic_llm", payload="x"),
             n("out1", "output", params={"modality": "text"})],
            [("in1.text", "g.text"), ("g.text", "out1.text")],
        )
        assert a.edges == b.edges
        assert a == b

    def test_successors_and_predecessors(self, catalog):
        p = load_fixture("video_dubbing.json")
        assert p.successors("asr") == ["mt_de", "mt_es", "mt_fr"]
        assert p.predecessors("tts_fr") == ["mt_fr"]

    def test_find_cycle_on_programmatic_graph(self, catalog):
        p = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("out1", "output", params={"modality": "text"})],
            [("in1.text", "out1.text")],
        )
        assert p.find_cycle() is None
        looped = make_pipeline([n("g", "generic_llm", payload="x")], [])
        looped.edges.append(Edge(Endpoint("g", "text"), Endpoint("g", "text")))
        assert looped.find_cycle() is not None


class TestBranches:
    def test_each_output_gets_a_branch(self, catalog):
        p = load_fixture("video_dubbing.json")
        branches = extract_branches(p)
        assert [b.output_node_id for b in branches] == ["out_de", "out_es", "out_fr"]
        for b in branches:
            assert b.node_ids_in_path_order[0] == "in_video"
            assert b.node_ids_in_path_order[-1] == b.output_node_id
            assert "asr" in b.node_ids_in_path_order

    def test_order_respects_dependencies(self, catalog):
        p = load_fixture("speech_translation.json")
        for b in extract_branches(p):
            order = {node_id: i for i, node_id in enumerate(b.node_ids_in_path_order)}
            for e in p.live_edges():
                if e.source.node in order and e.target.node in order:
                    assert order[e.source.node] < order[e.target.node]

    def test_comments_come_from_metadata(self, catalog):
        p = make_pipeline(
            [n("in1", "input", params={"modality": "text"}),
             n("out1", "output", params={"modality": "text"})],
            [("in1.text", "out1.text")],
            metadata={"branches": {"out1": "pass the text through"}},
        )
        (b,) = extract_branches(p)
        assert b.comment == "pass the text through"

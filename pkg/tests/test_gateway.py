import json

import httpx
import pytest

from pipesmith.gateway import (
    ChatMessage,
    ChatRequest,
    ChatResponse,
    GatewayError,
    HashEmbedder,
    HttpGateway,
    ModelRoles,
    ScriptedGateway,
    TranscriptError,
    cosine,
    load_transcript,
)


def req(*contents: str, model: str = "m") -> ChatRequest:
    roles = ["user", "assistant"]
    messages = [ChatMessage(roles[i % 2], c) for i, c in enumerate(contents)]
    return ChatRequest(model=model, messages=tuple(messages))


class TestChatRequest:
    def test_empty_messages_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(model="m", messages=())

    def test_roles_must_alternate(self):
        with pytest.raises(ValueError, match="alternate"):
            ChatRequest(
                model="m",
                messages=(ChatMessage("user", "a"), ChatMessage("user", "b")),
            )

    def test_system_turn_allowed_first(self):
        r = ChatRequest(
            model="m",
            messages=(ChatMessage("system", "s"), ChatMessage("user", "q")),
        )
        assert r.digest() == r.digest()

    def test_digest_changes_with_content(self):
        assert req("a").digest() != req("b").digest()


class TestScriptedGateway:
    def test_replays_in_order(self):
        gw = ScriptedGateway.from_responses(["first", "second"])
        assert gw.chat(req("q1")).content == "first"
        assert gw.chat(req("q2")).content == "second"
        assert gw.exhausted

    def test_exhaustion_is_loud(self):
        gw = ScriptedGateway.from_responses(["only"])
        gw.chat(req("q"))
        with pytest.raises(TranscriptError, match="exhausted"):
            gw.chat(req("q again"))

    def test_digest_divergence_is_loud(self):
        expected = req("the planned question")
        gw = ScriptedGateway(
            entries=load_entries([{"digest": expected.digest(), "response": "ok"}])
        )
        with pytest.raises(TranscriptError, match="diverged"):
            gw.chat(req("a different question"))

    def test_digestless_entries_match_any_request(self):
        gw = ScriptedGateway.from_responses(["ok"])
        assert gw.chat(req("whatever")).content == "ok"

    def test_transcript_file_round_trip(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps([{"response": "hi"}, {"digest": None, "response": "bye"}]))
        gw = ScriptedGateway.from_file(path)
        assert gw.chat(req("a")).content == "hi"
        assert gw.chat(req("b")).content == "bye"

    def test_bad_transcript_file(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text('{"not": "a list"}')
        with pytest.raises(TranscriptError):
            load_transcript(path)


def load_entries(raw):
    from pipesmith.gateway import TranscriptEntry

    return [TranscriptEntry(response=e["response"], digest=e.get("digest")) for e in raw]


class TestHashEmbedder:
    def test_identical_text_full_similarity(self):
        e = HashEmbedder()
        assert cosine(e.embed("translate the video"), e.embed("translate the video")) == pytest.approx(1.0)

    def test_disjoint_tokens_zero_similarity(self):
        e = HashEmbedder()
        assert cosine(e.embed("alpha bravo"), e.embed("charlie delta")) == pytest.approx(0.0)

    def test_empty_text_zero_vector_convention(self):
        e = HashEmbedder()
        assert cosine(e.embed(""), e.embed("anything")) == 0.0

    def test_paraphrase_pair_clears_default_threshold(self):
        e = HashEmbedder()
        a = "simplify the text so a child can read it"
        b = "simplify this text so that a child could read it"
        assert cosine(e.embed(a), e.embed(b)) > 0.5

    def test_deterministic_across_instances(self):
        assert HashEmbedder().embed("stable hash") == HashEmbedder().embed("stable hash")


class TestHttpGateway:
    def make_gateway(self, handler, retries=2):
        transport = httpx.MockTransport(handler)
        return HttpGateway(
            "http://llm.test/v1",
            api_key="k",
            max_retries=retries,
            backoff_base=0.0,
            transport=transport,
        )

    def test_chat_posts_dialect_body(self):
        seen = {}

        def handler(request):
            seen["url"] = str(request.url)
            seen["body"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(
                200,
                json={
                    "choices": [{"message": {"content": "hello"}, "finish_reason": "stop"}],
                    "usage": {"prompt_tokens": 3, "completion_tokens": 1},
                },
            )

        gw = self.make_gateway(handler)
        resp = gw.chat(req("hi", model="chat-1"))
        assert resp == ChatResponse(
            content="hello",
            finish_reason="stop",
            usage=(("completion_tokens", 1), ("prompt_tokens", 3)),
        )
        assert seen["url"] == "http://llm.test/v1/chat/completions"
        assert seen["body"]["model"] == "chat-1"
        assert seen["body"]["temperature"] == 0.0
        assert seen["auth"] == "Bearer k"

    def test_retries_transient_then_succeeds(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) < 3:
                return httpx.Response(503)
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        gw = self.make_gateway(handler, retries=3)
        assert gw.chat(req("q")).content == "ok"
        assert len(attempts) == 3

    def test_retry_cap_is_honored(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(500)

        gw = self.make_gateway(handler, retries=2)
        with pytest.raises(GatewayError, match="after 3 attempts"):
            gw.chat(req("q"))
        assert len(attempts) == 3

    def test_non_retryable_status_fails_fast(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(400, text="bad request")

        gw = self.make_gateway(handler, retries=5)
        with pytest.raises(GatewayError, match="400"):
            gw.chat(req("q"))
        assert len(attempts) == 1

    def test_embeddings_endpoint(self):
        def handler(request):
            body = json.loads(request.content)
            assert body["input"] == "some text"
            return httpx.Response(200, json={"data": [{"embedding": [0.1, 0.2]}]})

        gw = self.make_gateway(handler)
        assert gw.embed("some text") == [0.1, 0.2]

    def test_malformed_response_is_an_error(self):
        gw = self.make_gateway(lambda r: httpx.Response(200, json={"nope": 1}))
        with pytest.raises(GatewayError, match="malformed"):
            gw.chat(req("q"))

    def test_from_env_requires_url(self):
        with pytest.raises(GatewayError, match="PIPESMITH_LLM_URL"):
            HttpGateway.from_env(env={})


def test_model_roles_from_env():
    roles = ModelRoles.from_env(env={"PIPESMITH_MODEL_BUILDER": "big-model"})
    assert roles.builder == "big-model"
    assert roles.clarifier == "utility-model"


def test_cosine_dimension_mismatch():
    with pytest.raises(ValueError):
        cosine([1.0], [1.0, 0.0])

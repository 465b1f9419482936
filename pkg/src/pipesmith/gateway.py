"""Access to chat-completion and embedding backends.

Two interchangeable gateways: HttpGateway speaks the common
chat-completions JSON dialect to any compatible endpoint, with bounded
retries; ScriptedGateway replays a canned transcript for tests and
offline runs, matching calls by sequence position and failing loudly
the moment the conversation drifts from the script.

Embeddings default to HashEmbedder, a deterministic bag-of-tokens
vector (each token hashed into one of `dim` buckets, counts normalized)
so similarity thresholds are reproducible without a model.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
from dataclasses import dataclass, field

import httpx

DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 3
RETRYABLE_STATUS = (429, 500, 502, 503, 504)


class GatewayError(RuntimeError):
    pass


class TranscriptError(GatewayError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("chat request needs at least one message")
        turns = list(self.messages)
        if turns[0].role == "system":
            turns = turns[1:]
        expected = "user"
        for m in turns:
            if m.role != expected:
                raise ValueError(f"messages must alternate user/assistant, got {m.role!r}")
            expected = "assistant" if expected == "user" else "user"

    def digest(self) -> str:
        doc = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
        }
        blob = json.dumps(doc, sort_keys=True, ensure_ascii=False).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    usage: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class ModelRoles:
    """Which model serves which agent role."""

    clarifier: str = "utility-model"
    builder: str = "builder-model"
    inspector: str = "utility-model"
    utility: str = "utility-model"
    embedder: str = "embedding-model"

    @classmethod
    def from_env(cls, env=os.environ) -> "ModelRoles":
        base = cls()
        return cls(
            clarifier=env.get("PIPESMITH_MODEL_CLARIFIER", base.clarifier),
            builder=env.get("PIPESMITH_MODEL_BUILDER", base.builder),
            inspector=env.get("PIPESMITH_MODEL_INSPECTOR", base.inspector),
            utility=env.get("PIPESMITH_MODEL_UTILITY", base.utility),
            embedder=env.get("PIPESMITH_MODEL_EMBED", base.embedder),
        )


class HashEmbedder:
    """Bag-of-tokens vector: sha256 of each token picks a bucket."""

    def __init__(self, dim: int = 256):
        if dim < 2:
            raise ValueError("dimension must be at least 2")
        self.dim = dim

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for token in re.findall(r"[a-z0-9]+", text.lower()):
            bucket = int.from_bytes(hashlib.sha256(token.encode()).digest()[:4], "big")
            vec[bucket % self.dim] += 1.0
        norm = math.sqrt(sum(x * x for x in vec))
        if norm == 0.0:
            return vec
        return [x / norm for x in vec]


def cosine(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        raise ValueError("vectors have different dimensions")
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


class HttpGateway:
    """Chat-completions dialect over HTTP with bounded backoff retries."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        max_retries: int = DEFAULT_RETRIES,
        backoff_base: float = 0.5,
        embed_model: str = "embedding-model",
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.embed_model = embed_model
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    @classmethod
    def from_env(cls, env=os.environ) -> "HttpGateway":
        url = env.get("PIPESMITH_LLM_URL")
        if not url:
            raise GatewayError("PIPESMITH_LLM_URL is not set; no live backend configured")
        return cls(
            base_url=url,
            api_key=env.get("PIPESMITH_LLM_KEY"),
            timeout=float(env.get("PIPESMITH_LLM_TIMEOUT", DEFAULT_TIMEOUT)),
            max_retries=int(env.get("PIPESMITH_LLM_RETRIES", DEFAULT_RETRIES)),
            embed_model=env.get("PIPESMITH_MODEL_EMBED", "embedding-model"),
        )

    def _post(self, path: str, body: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(min(self.backoff_base * 2 ** (attempt - 1), 8.0))
            try:
                resp = self._client.post(self.base_url + path, json=body)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = GatewayError(f"{path} returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise GatewayError(f"{path} returned {resp.status_code}: {resp.text[:200]}")
            return resp.json()
        raise GatewayError(f"{path} failed after {self.max_retries + 1} attempts: {last_error}")

    def chat(self, req: ChatRequest) -> ChatResponse:
        body = {
            "model": req.model,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
        }
        if req.max_tokens is not None:
            body["max_tokens"] = req.max_tokens
        data = self._post("/chat/completions", body)
        try:
            choice = data["choices"][0]
            usage = tuple(sorted((k, int(v)) for k, v in data.get("usage", {}).items()))
            return ChatResponse(
                content=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "stop"),
                usage=usage,
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed chat response: {exc!r}") from exc

    def embed(self, text: str) -> list[float]:
        data = self._post("/embeddings", {"model": self.embed_model, "input": text})
        try:
            return [float(x) for x in data["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed embedding response: {exc!r}") from exc

    def close(self) -> None:
        self._client.close()


@dataclass
class TranscriptEntry:
    response: str
    digest: str | None = None


def load_transcript(path) -> list[TranscriptEntry]:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise TranscriptError(f"{path}: transcript must be a JSON array")
    entries = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or not isinstance(item.get("response"), str):
            raise TranscriptError(f"{path}: entry {i} needs a string 'response'")
        entries.append(TranscriptEntry(response=item["response"], digest=item.get("digest")))
    return entries


class ScriptedGateway:
    """Replays a fixed transcript; any divergence is an immediate error."""

    def __init__(self, entries: list[TranscriptEntry], embedder: HashEmbedder | None = None):
        self.entries = list(entries)
        self.calls: list[ChatRequest] = []
        self._lock = threading.Lock()
        self._embedder = embedder or HashEmbedder()

    @classmethod
    def from_file(cls, path) -> "ScriptedGateway":
        return cls(load_transcript(path))

    @classmethod
    def from_responses(cls, responses: list[str]) -> "ScriptedGateway":
        return cls([TranscriptEntry(response=r) for r in responses])

    def chat(self, req: ChatRequest) -> ChatResponse:
        with self._lock:
            position = len(self.calls)
            if position >= len(self.entries):
                raise TranscriptError(
                    f"transcript exhausted: call {position + 1} but only {len(self.entries)} entries"
                )
            entry = self.entries[position]
            if entry.digest is not None and entry.digest != req.digest():
                raise TranscriptError(
                    f"transcript diverged at position {position}: "
                    f"expected digest {entry.digest[:12]}…, got {req.digest()[:12]}…"
                )
            self.calls.append(req)
            return ChatResponse(content=entry.response)

    def embed(self, text: str) -> list[float]:
        return self._embedder.embed(text)

    @property
    def exhausted(self) -> bool:
        return len(self.calls) == len(self.entries)

"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SessionOut(BaseModel):
    id: str
    status: str


class AttachmentIn(BaseModel):
    name: str
    modality: str
    content_b64: str | None = None


class MessageIn(BaseModel):
    text: str
    attachments: list[AttachmentIn] = Field(default_factory=list)


class MessageOut(BaseModel):
    reply: str
    refined_query: str | None = None
    status: str


class ConfirmOut(BaseModel):
    accepted: bool
    status: str


class EventRecord(BaseModel):
    seq: int
    event: dict


class EventsOut(BaseModel):
    events: list[EventRecord]
    last_seq: int
    status: str


class PipelineOut(BaseModel):
    pipeline: dict


class ValidateIn(BaseModel):
    pipeline: dict
    fix: bool = False


class FixedOut(BaseModel):
    pipeline: dict
    applied: list[dict]
    report: dict


class ValidateOut(BaseModel):
    report: dict
    fixed: FixedOut | None = None


class EvalConfigIn(BaseModel):
    edit_cost: float = 1.0
    time_budget: float = 60.0
    prompt_similarity_threshold: float = 0.5


class EvaluateIn(BaseModel):
    generated: dict
    reference: dict
    config: EvalConfigIn | None = None


class EvaluateOut(BaseModel):
    exact_match: bool
    ged: dict

"""Conversation state shared by the agent roles.

A session moves strictly forward through the stages: clarifying (the
query is being refined), building, inspecting, matching, and finally
done or failed. Repair loops bounce between building and inspecting;
everything else is one-way. The service layer owns persistence; agents
mutate the Session they are handed and report externally visible
progress through an emit callback.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..ir.model import Modality, Pipeline, Specification
from ..validation import ValidationReport

STATUSES = ("clarifying", "building", "inspecting", "matching", "done", "failed")

# repair loops may re-enter building from inspecting; failure is always allowed
_ALLOWED = {
    "clarifying": {"clarifying", "building", "failed"},
    "building": {"inspecting", "failed"},
    "inspecting": {"building", "matching", "failed"},
    "matching": {"done", "failed"},
    "done": set(),
    "failed": set(),
}

Emit = Callable[[dict], None]


class StatusError(RuntimeError):
    pass


@dataclass(frozen=True)
class Attachment:
    name: str
    modality: Modality
    content_ref: str


@dataclass
class Session:
    id: str
    messages: list[tuple[str, str]] = field(default_factory=list)  # (role, text)
    attachments: list[Attachment] = field(default_factory=list)
    refined_query: str | None = None
    specification: Specification | None = None
    drafts: list[tuple[Pipeline, ValidationReport]] = field(default_factory=list)
    iteration_count: int = 0
    status: str = "clarifying"
    failure_reason: str | None = None

    def advance(self, status: str, emit: Emit | None = None) -> None:
        if status not in STATUSES:
            raise StatusError(f"unknown status {status!r}")
        if status not in _ALLOWED[self.status]:
            raise StatusError(f"cannot move from {self.status!r} to {status!r}")
        self.status = status
        if emit:
            emit({"type": "status", "status": status})

    def fail(self, reason: str, emit: Emit | None = None) -> None:
        self.failure_reason = reason
        self.status = "failed"
        if emit:
            emit({"type": "error", "reason": reason})

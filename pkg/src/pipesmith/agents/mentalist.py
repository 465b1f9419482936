"""Query refinement, interface extraction, and attachment assignment.

The clarifier asks one question per turn until it can restate the whole
request; the restatement is marked with a fixed prefix so the code can
find it without parsing prose. A hard question budget keeps a vague
conversation from looping forever: once it is spent, the model is told
to commit to a refined query now, and a refusal fails the session.
"""

from __future__ import annotations

import logging

from ..gateway import ChatMessage, ChatRequest, ModelRoles
from ..ir.model import Modality, Specification, SpecRow
from .common import fill, parse_json_reply, prompt, render_conversation, spec_to_dicts
from .session import Emit, Session, StatusError

log = logging.getLogger("pipesmith.agents")

REFINED_MARKER = "REFINED QUERY:"
QUESTION_BUDGET = 8


class ExtractionError(RuntimeError):
    pass


def mentalist_turn(
    session: Session,
    user_message: str,
    llm,
    roles: ModelRoles,
    question_budget: int = QUESTION_BUDGET,
    emit: Emit | None = None,
) -> str | None:
    """Feed one user message to the clarifier.

    Returns the refined query when this turn produced one, else None
    (the assistant asked a question instead). The session stays in
    ``clarifying`` either way; moving on is the caller's call, since
    the user still has to confirm the restatement.
    """
    if session.status != "clarifying":
        raise StatusError(f"cannot clarify a session in status {session.status!r}")
    session.messages.append(("user", user_message))
    asked = sum(1 for role, _ in session.messages if role == "assistant")
    forced = asked >= question_budget
    system = prompt("clarifier")
    if forced:
        system = system + "\n\n" + prompt("clarifier_force")
    msgs = [ChatMessage("system", system)]
    msgs.extend(ChatMessage(role, text) for role, text in session.messages)
    resp = llm.chat(ChatRequest(model=roles.clarifier, messages=tuple(msgs)))
    session.messages.append(("assistant", resp.content))
    if emit:
        emit({"type": "assistant_message", "text": resp.content})
    if REFINED_MARKER in resp.content:
        refined = resp.content.split(REFINED_MARKER, 1)[1].strip()
        session.refined_query = refined
        if emit:
            emit({"type": "refined_query", "query": refined})
        return refined
    if forced:
        session.fail("clarifier kept asking after the question budget ran out", emit)
    return None


def _parse_spec_rows(text: str) -> Specification:
    doc = parse_json_reply(text)
    if not isinstance(doc, list):
        raise ValueError("expected a JSON array of rows")
    rows = []
    names = set()
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise ValueError(f"row {i} is not an object")
        role = item.get("role")
        if role not in ("input", "output"):
            raise ValueError(f"row {i}: role must be 'input' or 'output'")
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise ValueError(f"row {i}: missing name")
        if name in names:
            raise ValueError(f"row {i}: duplicate name {name!r}")
        names.add(name)
        try:
            modality = Modality(item.get("modality"))
        except ValueError:
            raise ValueError(f"row {i}: unknown modality {item.get('modality')!r}") from None
        language = item.get("language")
        if language is not None and not isinstance(language, str):
            raise ValueError(f"row {i}: language must be a string")
        rows.append(SpecRow(role=role, name=name, modality=modality, language=language))
    return Specification(rows=tuple(rows))


def extract_specification(
    refined_query: str, llm, roles: ModelRoles, emit: Emit | None = None
) -> Specification:
    """Turn the refined query into typed input/output rows; one retry."""
    msgs = [ChatMessage("user", fill(prompt("extractor"), refined_query=refined_query))]
    last_error: Exception | None = None
    for _ in range(2):
        resp = llm.chat(ChatRequest(model=roles.utility, messages=tuple(msgs)))
        try:
            spec = _parse_spec_rows(resp.content)
        except ValueError as exc:
            last_error = exc
            msgs.append(ChatMessage("assistant", resp.content))
            msgs.append(
                ChatMessage(
                    "user",
                    f"That reply was unusable: {exc}. "
                    "Resend the corrected JSON array only, no prose.",
                )
            )
            continue
        if emit:
            emit({"type": "specification", "rows": spec_to_dicts(spec)})
        return spec
    raise ExtractionError(f"could not extract a specification: {last_error}")


def match_attachments(
    session: Session,
    specification: Specification,
    llm,
    roles: ModelRoles,
    emit: Emit | None = None,
) -> dict[str, str | None]:
    """Assign each attached file to a specification input, or flag it.

    A modality with exactly one file and exactly one input needs no
    model call. Everything else goes to the LLM in one batch; answers
    that point at a missing input, the wrong modality, or an input that
    is already taken are downgraded to None rather than trusted.
    """
    if not session.attachments:
        return {}
    inputs = specification.inputs()
    rows_by_modality: dict[Modality, list] = {}
    for row in inputs:
        rows_by_modality.setdefault(row.modality, []).append(row)
    files_by_modality: dict[Modality, list] = {}
    for att in session.attachments:
        files_by_modality.setdefault(att.modality, []).append(att)

    mapping: dict[str, str | None] = {}
    pending = []
    for modality in sorted(files_by_modality, key=lambda m: m.value):
        files = files_by_modality[modality]
        rows = rows_by_modality.get(modality, [])
        if not rows:
            for f in files:
                mapping[f.name] = None
        elif len(files) == 1 and len(rows) == 1:
            mapping[files[0].name] = rows[0].name
        else:
            pending.extend(files)

    if pending:
        att_lines = "\n".join(f"- {f.name} ({f.modality.value})" for f in pending)
        input_lines = "\n".join(
            f"- {r.name} ({r.modality.value}"
            + (f", language {r.language}" if r.language else "")
            + ")"
            for r in inputs
        )
        ask = fill(
            prompt("attachment"),
            conversation=render_conversation(session.messages),
            attachments=att_lines,
            inputs=input_lines,
        )
        resp = llm.chat(ChatRequest(model=roles.utility, messages=(ChatMessage("user", ask),)))
        try:
            doc = parse_json_reply(resp.content)
            if not isinstance(doc, dict):
                raise ValueError("expected a JSON object")
        except ValueError as exc:
            log.warning("attachment assignment was unreadable (%s); flagging all", exc)
            doc = {}
        rows_by_name = {r.name: r for r in inputs}
        taken = {v for v in mapping.values() if v is not None}
        for f in pending:
            target = doc.get(f.name)
            row = rows_by_name.get(target) if isinstance(target, str) else None
            if row is not None and row.modality is f.modality and target not in taken:
                mapping[f.name] = target
                taken.add(target)
            else:
                mapping[f.name] = None
    if emit:
        emit({"type": "attachment_map", "map": dict(sorted(mapping.items()))})
    return mapping

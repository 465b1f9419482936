"""HTTP facade over the agent flow and the batch utilities.

One FastAPI app per data directory. Sessions live in memory while the
process runs; every externally visible event is appended to the
session's log file first, so a restarted process can rebuild session
state by replaying the log. The build triggered by confirm runs as a
background task and reports progress only through events.
"""

from __future__ import annotations

import base64
import binascii
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import BackgroundTasks, FastAPI, HTTPException

from ..agents import (
    Attachment,
    ModelRegistry,
    Session,
    load_registry,
    mentalist_turn,
    run_to_completion,
)
from ..agents.common import spec_from_dicts
from ..gateway import GatewayError, HttpGateway, ModelRoles, ScriptedGateway
from ..ir import (
    FunctionCatalog,
    Modality,
    Pipeline,
    PipelineParseError,
    load_catalog,
    parse_pipeline_dict,
    pipeline_to_dict,
)
from ..metrics import MatchConfig, exact_match, ged
from ..validation import apply_mechanical_fixes, validate
from .schemas import (
    ConfirmOut,
    EvaluateIn,
    EvaluateOut,
    EventRecord,
    EventsOut,
    FixedOut,
    MessageIn,
    MessageOut,
    PipelineOut,
    SessionOut,
    ValidateIn,
    ValidateOut,
)
from .store import BlobStore, SessionStore


@dataclass
class LiveSession:
    session: Session
    gateway: object
    confirmed: bool = False
    final: Pipeline | None = None


def _env_gateway():
    path = os.environ.get("PIPESMITH_TRANSCRIPT")
    if path:
        return ScriptedGateway.from_file(path)
    return HttpGateway.from_env()


def _replay(session_id: str, records: list[dict], catalog: FunctionCatalog) -> LiveSession:
    """Rebuild session state from its event log."""
    s = Session(id=session_id)
    final: Pipeline | None = None
    confirmed = False
    for record in records:
        ev = record["event"]
        kind = ev.get("type")
        if kind == "user_message":
            s.messages.append(("user", ev["text"]))
        elif kind == "assistant_message":
            s.messages.append(("assistant", ev["text"]))
        elif kind == "attachment":
            s.attachments.append(
                Attachment(ev["name"], Modality(ev["modality"]), ev["content_ref"])
            )
        elif kind == "refined_query":
            s.refined_query = ev["query"]
        elif kind == "specification":
            s.specification = spec_from_dicts(ev["rows"])
        elif kind == "confirmed":
            confirmed = True
        elif kind == "status":
            s.status = ev["status"]  # log order is ground truth, no transition check
        elif kind == "draft":
            p = parse_pipeline_dict(ev["pipeline"], catalog)
            s.drafts.append((p, validate(p, catalog)))
            s.iteration_count = ev.get("iteration", s.iteration_count)
        elif kind == "final_pipeline":
            final = parse_pipeline_dict(ev["pipeline"], catalog)
        elif kind == "error":
            s.failure_reason = ev["reason"]
            s.status = "failed"
    return LiveSession(session=s, gateway=None, confirmed=confirmed, final=final)


def create_app(
    data_dir: str | Path,
    gateway_factory=None,
    roles: ModelRoles | None = None,
    catalog: FunctionCatalog | None = None,
    registry: ModelRegistry | None = None,
    max_iterations: int = 3,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    catalog = catalog or load_catalog()
    registry = registry or load_registry()
    roles = roles or ModelRoles.from_env()
    factory = gateway_factory or _env_gateway
    store = SessionStore(Path(data_dir) / "sessions")
    blobs = BlobStore(Path(data_dir) / "blobs")
    live: dict[str, LiveSession] = {}

    app = FastAPI(title="pipesmith", version="0.1.0")
    app.state.store = store
    app.state.blobs = blobs

    def _load(session_id: str) -> LiveSession:
        if session_id in live:
            return live[session_id]
        if not store.exists(session_id):
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        ls = _replay(session_id, store.events(session_id), catalog)
        ls.gateway = factory()
        live[session_id] = ls
        return ls

    def _emit(session_id: str):
        return lambda event: store.append(session_id, event)

    @app.post("/sessions", response_model=SessionOut, status_code=201)
    def create_session():
        session_id = store.create()
        ls = LiveSession(session=Session(id=session_id), gateway=factory())
        live[session_id] = ls
        store.append(session_id, {"type": "status", "status": ls.session.status})
        return SessionOut(id=session_id, status=ls.session.status)

    @app.post("/sessions/{session_id}/messages", response_model=MessageOut)
    def post_message(session_id: str, body: MessageIn):
        ls = _load(session_id)
        if ls.confirmed or ls.session.status != "clarifying":
            raise HTTPException(
                status_code=409,
                detail=f"session is {ls.session.status}; it takes no further messages",
            )
        for att in body.attachments:
            try:
                modality = Modality(att.modality)
            except ValueError:
                raise HTTPException(
                    status_code=422, detail=f"unknown modality {att.modality!r}"
                ) from None
            ref = ""
            if att.content_b64:
                try:
                    ref = blobs.put(base64.b64decode(att.content_b64, validate=True))
                except (binascii.Error, ValueError):
                    raise HTTPException(
                        status_code=422, detail=f"attachment {att.name!r} is not valid base64"
                    ) from None
            ls.session.attachments.append(Attachment(att.name, modality, ref))
            store.append(
                session_id,
                {
                    "type": "attachment",
                    "name": att.name,
                    "modality": modality.value,
                    "content_ref": ref,
                },
            )
        store.append(session_id, {"type": "user_message", "text": body.text})
        try:
            mentalist_turn(ls.session, body.text, ls.gateway, roles, emit=_emit(session_id))
        except GatewayError as exc:
            raise HTTPException(status_code=502, detail=f"model backend failed: {exc}") from exc
        return MessageOut(
            reply=ls.session.messages[-1][1],
            refined_query=ls.session.refined_query,
            status=ls.session.status,
        )

    def _run_build(session_id: str, ls: LiveSession) -> None:
        emit = _emit(session_id)
        try:
            final = run_to_completion(
                ls.session,
                ls.gateway,
                roles,
                catalog,
                registry,
                max_iterations=max_iterations,
                emit=emit,
            )
        except Exception as exc:  # a crashed build must still land in the log
            if ls.session.status != "failed":
                ls.session.fail(f"internal error: {exc}", emit)
            return
        if ls.session.status == "done":
            ls.final = final

    @app.post("/sessions/{session_id}/confirm", response_model=ConfirmOut, status_code=202)
    def confirm(session_id: str, background: BackgroundTasks):
        ls = _load(session_id)
        if ls.confirmed:
            raise HTTPException(status_code=409, detail="session is already confirmed")
        if ls.session.status != "clarifying" or ls.session.refined_query is None:
            raise HTTPException(
                status_code=409,
                detail="nothing to confirm: the query has not been refined yet",
            )
        ls.confirmed = True
        store.append(session_id, {"type": "confirmed"})
        background.add_task(_run_build, session_id, ls)
        return ConfirmOut(accepted=True, status=ls.session.status)

    @app.get("/sessions/{session_id}/events", response_model=EventsOut)
    def get_events(session_id: str, since: int = 0):
        ls = _load(session_id)
        records = store.events(session_id, since=since)
        return EventsOut(
            events=[EventRecord(**r) for r in records],
            last_seq=store.last_seq(session_id),
            status=ls.session.status,
        )

    @app.get("/sessions/{session_id}/pipeline", response_model=PipelineOut)
    def get_pipeline(session_id: str):
        ls = _load(session_id)
        if ls.session.status != "done" or ls.final is None:
            raise HTTPException(
                status_code=409,
                detail=f"pipeline is not ready: session is {ls.session.status}",
            )
        return PipelineOut(pipeline=pipeline_to_dict(ls.final))

    def _parse_or_422(doc: dict) -> Pipeline:
        try:
            return parse_pipeline_dict(doc, catalog)
        except PipelineParseError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/validate", response_model=ValidateOut)
    def validate_endpoint(body: ValidateIn):
        p = _parse_or_422(body.pipeline)
        report = validate(p, catalog)
        fixed = None
        if body.fix:
            fp, applied = apply_mechanical_fixes(p, report)
            fixed = FixedOut(
                pipeline=pipeline_to_dict(fp),
                applied=[a.to_dict() for a in applied],
                report=validate(fp, catalog).to_dict(),
            )
        return ValidateOut(report=report.to_dict(), fixed=fixed)

    @app.post("/evaluate", response_model=EvaluateOut)
    def evaluate_endpoint(body: EvaluateIn):
        gen = _parse_or_422(body.generated)
        ref = _parse_or_422(body.reference)
        cfg = MatchConfig()
        if body.config is not None:
            cfg = MatchConfig(
                edit_cost=body.config.edit_cost,
                time_budget=body.config.time_budget,
                prompt_similarity_threshold=body.config.prompt_similarity_threshold,
            )
        return EvaluateOut(
            exact_match=bool(exact_match(gen, ref, cfg)),
            ged=ged(gen, ref, cfg).to_dict(),
        )

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # same-origin hosting for a built web client; the API stays at /
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

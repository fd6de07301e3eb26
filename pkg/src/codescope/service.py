"""HTTP API: graphs, views, planning, sessions, annotations, documents.

All endpoints live under /api/. Collaboration is polling-based: session reads
carry an ETag (the session version) and writers use If-Match for optimistic
concurrency. Per-session mutations are serialized; the graph and history are
shared read-only.
"""
from __future__ import annotations

import os
import time
from dataclasses import replace as dc_replace
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from .abstraction import export_json, export_plantuml, materialize
from .errors import (
    CodescopeError,
    InvalidIntent,
    NotFound,
    UnparseableUtterance,
    VersionConflict,
)
from .history import heat_overlay
from .llm import client_from_env
from .model import Level, ROOT_SCOPE
from .planner import Planner, TraceStep
from .viewspec import (
    Intent,
    default_viewspec,
    diff_viewspec,
    intent_from_dict,
    parse_viewspec,
    validate_viewspec,
    viewspec_hash,
)
from .workspace import ANNOTATION_KINDS, Annotation, Session, Workspace, replace_session

DEFAULT_PORT = 7420

_STATUS = {
    "session_not_found": 404,
    "not_found": 404,
    "no_ancestor": 404,
    "version_conflict": 409,
    "unparseable_utterance": 422,
    "invalid_intent": 422,
    "invalid_expansion": 422,
    "missing_compare_ref": 422,
    "invalid_viewspec": 422,
    "too_large": 413,
    "empty_graph": 409,
}


class SpecRejected(CodescopeError):
    code = "invalid_viewspec"

    def __init__(self, violations):
        super().__init__("view spec failed validation")
        self.violations = violations


class BadRequest(CodescopeError):
    code = "bad_request"


async def _json_body(request: Request) -> dict:
    try:
        data = await request.json()
    except Exception:
        raise BadRequest("request body must be a JSON object") from None
    if not isinstance(data, dict):
        raise BadRequest("request body must be a JSON object")
    return data


def create_app(workspace: Workspace, planner: Planner | None = None) -> FastAPI:
    app = FastAPI(title="codescope", docs_url=None, redoc_url=None)
    if planner is None:
        mode = os.environ.get("CODESCOPE_LLM_MODE", "off")
        planner = Planner(mode=mode, client=client_from_env(mode) if mode != "off" else None)

    @app.exception_handler(CodescopeError)
    async def _domain_error(request: Request, exc: CodescopeError):
        body = {"error": exc.code, "message": str(exc), "violations": []}
        if isinstance(exc, SpecRejected):
            body["violations"] = [v.to_dict() for v in exc.violations]
        return JSONResponse(status_code=_STATUS.get(exc.code, 400), content=body)

    def materialize_spec(spec):
        graph = workspace.require_graph()
        return materialize(
            graph, spec, history=workspace.history,
            compare_graphs=workspace.compare_graphs,
        )

    def respond_with_view(session: Session, prev_spec, narration="", source="",
                          suggestions=(), view=None):
        if view is None:
            view = materialize_spec(session.viewspec)
        patch = diff_viewspec(prev_spec, session.viewspec)
        return {
            "session_id": session.id,
            "version": session.version,
            "viewspec": session.viewspec.to_dict(),
            "viewgraph": view.to_dict(),
            "narration": narration,
            "source": source,
            "suggestions": [s.to_dict() for s in suggestions],
            "patch": patch.to_dict(),
        }

    def record_step(session: Session, intent: Intent | None, actor: str, new_spec) -> Session:
        updated = replace_session(session, viewspec=new_spec)
        if intent is not None:
            last_ts = updated.trace.steps[-1].timestamp if updated.trace.steps else 0
            updated.trace.append(
                TraceStep(
                    timestamp=max(int(time.time()), last_ts),
                    actor=actor,
                    intent=intent,
                    resulting_viewspec_hash=viewspec_hash(new_spec),
                )
            )
        return workspace.bump_and_save(updated)

    # --- sessions CRUD

    @app.post("/api/sessions")
    async def create_session(request: Request):
        raw = await request.body()
        data = await _json_body(request) if raw else {}
        session = workspace.create_session(
            name=str(data.get("name", "")), clone_from=data.get("clone_from")
        )
        return JSONResponse(status_code=201, content=session.to_dict())

    @app.get("/api/sessions")
    def list_sessions():
        return {
            "sessions": [
                {
                    "id": s.id,
                    "name": s.name,
                    "version": s.version,
                    "updated_at": s.updated_at,
                    "annotation_count": len(s.annotations),
                }
                for s in sorted(workspace.sessions.values(), key=lambda s: s.id)
            ]
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str, request: Request):
        session = workspace.session(session_id)
        etag = f'"{session.version}"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        return JSONResponse(content=session.to_dict(), headers={"ETag": etag})

    @app.put("/api/sessions/{session_id}")
    async def update_session(session_id: str, request: Request):
        expected = _require_if_match(request)
        data = await _json_body(request)
        with workspace.lock_for(session_id):
            session = workspace.session(session_id)
            workspace.check_version(session, expected)
            changes = {}
            if "name" in data:
                changes["name"] = str(data["name"])
            if "viewspec" in data:
                spec, violations = parse_viewspec(data["viewspec"])
                if spec is None:
                    raise SpecRejected(violations)
                violations = validate_viewspec(
                    spec, workspace.require_graph(), workspace.known_refs
                )
                if violations:
                    raise SpecRejected(violations)
                changes["viewspec"] = spec
            session = replace_session(session, **changes)
            session = workspace.bump_and_save(session)
        return session.to_dict()

    # --- the closed loop: query and intent

    @app.post("/api/sessions/{session_id}/query")
    async def query(session_id: str, request: Request):
        data = await _json_body(request)
        utterance = data.get("utterance")
        if not isinstance(utterance, str) or not utterance.strip():
            raise UnparseableUtterance(str(utterance), "utterance must be a non-empty string")
        actor = str(data.get("actor", "user"))
        with workspace.lock_for(session_id):
            session = workspace.session(session_id)
            prev_spec = session.viewspec
            graph = workspace.require_graph()
            result = planner.plan(
                utterance, session, graph, workspace.history, workspace.known_refs
            )
            view = materialize_spec(result.viewspec)  # must succeed before persisting
            session = record_step(session, result.intent, actor, result.viewspec)
            return respond_with_view(
                session, prev_spec, result.narration, result.source,
                result.suggestions, view=view,
            )

    @app.post("/api/sessions/{session_id}/intent")
    async def intent(session_id: str, request: Request):
        data = await _json_body(request)
        payload = dict(data)
        actor = str(payload.pop("actor", "user"))
        parsed = intent_from_dict(payload)
        with workspace.lock_for(session_id):
            session = workspace.session(session_id)
            prev_spec = session.viewspec
            graph = workspace.require_graph()
            result = planner.plan(parsed, session, graph, workspace.history, workspace.known_refs)
            view = materialize_spec(result.viewspec)  # must succeed before persisting
            if parsed.type == "annotate":
                session = _append_annotation(
                    session, entity=parsed.entity, author=actor, kind="note", text=parsed.text
                )
            session = record_step(session, parsed, actor, result.viewspec)
            return respond_with_view(
                session, prev_spec, result.narration, result.source,
                result.suggestions, view=view,
            )

    # --- view and export

    @app.get("/api/sessions/{session_id}/view")
    def get_view(session_id: str, request: Request):
        session = workspace.session(session_id)
        etag = f'"{session.version}"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        return JSONResponse(
            content=respond_with_view(session, session.viewspec), headers={"ETag": etag}
        )

    @app.get("/api/sessions/{session_id}/export")
    def export(session_id: str, format: str = "plantuml"):
        session = workspace.session(session_id)
        view = materialize_spec(session.viewspec)
        if format == "plantuml":
            return PlainTextResponse(export_plantuml(view))
        if format == "json":
            return Response(content=export_json(view), media_type="application/json")
        return JSONResponse(
            status_code=400,
            content={
                "error": "unsupported_format",
                "message": f"unsupported export format: {format}",
                "violations": [],
            },
        )

    # --- annotations

    @app.post("/api/sessions/{session_id}/annotations")
    async def add_annotation(session_id: str, request: Request):
        data = await _json_body(request)
        entity = data.get("entity")
        text = data.get("text", "")
        kind = data.get("kind", "note")
        author = str(data.get("author", "user"))
        if kind not in ANNOTATION_KINDS:
            raise InvalidIntent(f"annotation kind must be one of {ANNOTATION_KINDS}")
        if not isinstance(text, str) or not text:
            raise InvalidIntent("annotation text must not be empty")
        graph = workspace.require_graph()
        if not isinstance(entity, str) or not graph.has(entity):
            raise InvalidIntent(f"no such entity: {entity}")
        with workspace.lock_for(session_id):
            session = workspace.session(session_id)
            session = _append_annotation(session, entity=entity, author=author, kind=kind, text=text)
            session = workspace.bump_and_save(session)
        return JSONResponse(
            status_code=201,
            content={"annotation": session.annotations[-1].to_dict(), "version": session.version},
        )

    # --- graph and history reads

    @app.get("/api/graph")
    def graph_view(level: str = Level.PACKAGE.value, scope: str = ROOT_SCOPE):
        graph = workspace.require_graph()
        if level not in tuple(lv.value for lv in Level):
            raise InvalidIntent(f"unknown level: {level}")
        if scope != ROOT_SCOPE and not graph.has(scope):
            raise NotFound(scope)
        spec = dc_replace(default_viewspec(graph), level=level, scope=scope)
        view = materialize(graph, spec, history=workspace.history)
        return view.to_dict()

    @app.get("/api/history/heat")
    def history_heat(request: Request):
        workspace.require_graph()
        if workspace.history is None:
            return heat_overlay({}).to_dict()
        params = request.query_params
        try:
            from_ts = int(params["from"]) if "from" in params else None
            to_ts = int(params["to"]) if "to" in params else None
        except ValueError:
            raise BadRequest("from/to must be integer timestamps") from None
        counts = workspace.history.change_counts((from_ts, to_ts))
        return heat_overlay(counts, (from_ts, to_ts)).to_dict()

    @app.get("/api/history/cochange")
    def history_cochange(entity: str | None = None):
        graph = workspace.require_graph()
        if workspace.history is None:
            return {"pairs": []}
        pairs = workspace.history.cochange_pairs()
        if entity is not None:
            if not graph.has(entity):
                raise NotFound(entity)
            subtree = set(graph.descendants_or_self(entity))
            pairs = [p for p in pairs if p.a in subtree or p.b in subtree]
        return {"pairs": [p.to_dict() for p in pairs]}

    # --- embedded documentation

    @app.get("/api/docs/{doc_path:path}")
    def get_doc(doc_path: str):
        target = workspace.doc_path(doc_path)
        return PlainTextResponse(target.read_text(encoding="utf-8"))

    ui_dir = os.environ.get("CODESCOPE_UI_DIR", "")
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _append_annotation(
    session: Session, entity: str, author: str, kind: str, text: str
) -> Session:
    existing = {a.id for a in session.annotations}
    n = len(session.annotations) + 1
    while f"a{n}" in existing:
        n += 1
    session.annotations.append(
        Annotation(
            id=f"a{n}", entity=entity, author=author, kind=kind, text=text,
            created_at=int(time.time()),
        )
    )
    return session


def _require_if_match(request: Request) -> int:
    value = request.headers.get("if-match")
    if value is None:
        raise VersionConflict(-1, -1)
    try:
        return int(value.strip().strip('"'))
    except ValueError:
        raise VersionConflict(-1, -1) from None


def serve(workspace_dir: str, port: int = DEFAULT_PORT):
    import uvicorn

    workspace = Workspace.load(workspace_dir)
    app = create_app(workspace)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")

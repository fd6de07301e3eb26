"""Workspace: the on-disk artifact store and its in-memory mirror.

Layout under the workspace root:
  graph.json           reverse-engineered code graph
  history.jsonl        normalized commit log
  compare/<ref>.json   extra snapshots for version comparison
  sessions/<id>.json   shared sessions (spec + trace + annotations)
  docs/                documents served read-only by the API

Every session mutation is written through immediately, so a process restart
reloads exactly what was last acknowledged.
"""
from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .canon import canonical_dumps
from .errors import EmptyGraph, NotFound, SessionNotFound, VersionConflict
from .history import CommitLog, HistoryIndex, import_commit_log
from .model import CodeGraph
from .planner import ExplorationTrace
from .viewspec import ViewSpec, default_viewspec, parse_viewspec

GRAPH_FILE = "graph.json"
HISTORY_FILE = "history.jsonl"
COMPARE_DIR = "compare"
SESSIONS_DIR = "sessions"
DOCS_DIR = "docs"

ANNOTATION_KINDS = ("note", "doc_link")


@dataclass(frozen=True)
class Annotation:
    id: str
    entity: str
    author: str
    kind: str  # note | doc_link (text holds a workspace-relative path)
    text: str
    created_at: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "entity": self.entity,
            "author": self.author,
            "kind": self.kind,
            "text": self.text,
            "created_at": self.created_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "Annotation":
        return Annotation(
            id=d["id"],
            entity=d["entity"],
            author=d["author"],
            kind=d["kind"],
            text=d["text"],
            created_at=d["created_at"],
        )


@dataclass
class Session:
    id: str
    name: str
    viewspec: ViewSpec
    trace: ExplorationTrace = field(default_factory=ExplorationTrace)
    annotations: list[Annotation] = field(default_factory=list)
    version: int = 1
    updated_at: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "viewspec": self.viewspec.to_dict(),
            "trace": self.trace.to_dict(),
            "annotations": [a.to_dict() for a in self.annotations],
            "version": self.version,
            "updated_at": self.updated_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "Session":
        spec, violations = parse_viewspec(d["viewspec"])
        if spec is None:
            raise ValueError(f"stored session has an unreadable spec: {violations}")
        return Session(
            id=d["id"],
            name=d["name"],
            viewspec=spec,
            trace=ExplorationTrace.from_dict(d.get("trace", {})),
            annotations=[Annotation.from_dict(a) for a in d.get("annotations", [])],
            version=d["version"],
            updated_at=d.get("updated_at", 0),
        )


def _safe_ref_name(ref: str) -> str:
    return re.sub(r"[^A-Za-z0-9._\-]", "_", ref)


def _atomic_write(path: Path, data: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


class Workspace:
    """In-memory state plus write-through persistence for one project."""

    def __init__(self, root_dir: str | Path):
        self.root = Path(root_dir)
        self.graph: CodeGraph | None = None
        self.log: CommitLog = CommitLog()
        self.history: HistoryIndex | None = None
        self.compare_graphs: dict[str, CodeGraph] = {}
        self.sessions: dict[str, Session] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # --- loading

    @classmethod
    def load(cls, root_dir: str | Path) -> "Workspace":
        ws = cls(root_dir)
        graph_path = ws.root / GRAPH_FILE
        if graph_path.exists():
            ws.graph = CodeGraph.from_json(graph_path.read_text(encoding="utf-8"))
        history_path = ws.root / HISTORY_FILE
        if history_path.exists():
            ws.log = import_commit_log(history_path.read_text(encoding="utf-8"))
        if ws.graph is not None:
            ws.history = HistoryIndex(ws.log, ws.graph)
        compare_dir = ws.root / COMPARE_DIR
        if compare_dir.is_dir():
            for path in sorted(compare_dir.glob("*.json")):
                graph = CodeGraph.from_json(path.read_text(encoding="utf-8"))
                ref = graph.subject_ref or path.stem
                ws.compare_graphs[ref] = graph
        sessions_dir = ws.root / SESSIONS_DIR
        if sessions_dir.is_dir():
            for path in sorted(sessions_dir.glob("*.json")):
                session = Session.from_dict(json.loads(path.read_text(encoding="utf-8")))
                ws.sessions[session.id] = session
        return ws

    def require_graph(self) -> CodeGraph:
        if self.graph is None or not self.graph.entities:
            raise EmptyGraph(f"workspace {self.root} has no ingested graph")
        return self.graph

    @property
    def known_refs(self) -> set[str]:
        return set(self.compare_graphs)

    # --- artifact writes

    def store_graph(self, graph: CodeGraph):
        self.root.mkdir(parents=True, exist_ok=True)
        _atomic_write(self.root / GRAPH_FILE, graph.to_json() + "\n")
        self.graph = graph
        self.history = HistoryIndex(self.log, graph)

    def store_compare_graph(self, ref: str, graph: CodeGraph):
        compare_dir = self.root / COMPARE_DIR
        compare_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(compare_dir / f"{_safe_ref_name(ref)}.json", graph.to_json() + "\n")
        self.compare_graphs[ref] = graph

    def store_history(self, jsonl_text: str):
        log = import_commit_log(jsonl_text)  # validate and sort before persisting
        self.root.mkdir(parents=True, exist_ok=True)
        _atomic_write(self.root / HISTORY_FILE, log.to_jsonl())
        self.log = log
        if self.graph is not None:
            self.history = HistoryIndex(log, self.graph)

    # --- sessions

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise SessionNotFound(session_id) from None

    def _next_session_id(self) -> str:
        n = 1
        while f"s{n}" in self.sessions:
            n += 1
        return f"s{n}"

    def create_session(self, name: str = "", clone_from: str | None = None) -> Session:
        graph = self.require_graph()
        with self._registry_lock:
            sid = self._next_session_id()
            if clone_from is not None:
                base = self.session(clone_from)
                session = Session(
                    id=sid,
                    name=name or f"{base.name} (copy)",
                    viewspec=base.viewspec,
                    trace=ExplorationTrace.from_dict(base.trace.to_dict()),
                    annotations=list(base.annotations),
                    version=1,
                    updated_at=int(time.time()),
                )
            else:
                session = Session(
                    id=sid,
                    name=name or sid,
                    viewspec=default_viewspec(graph),
                    version=1,
                    updated_at=int(time.time()),
                )
            self.sessions[sid] = session
        self.save_session(session)
        return session

    def save_session(self, session: Session):
        sessions_dir = self.root / SESSIONS_DIR
        sessions_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(
            sessions_dir / f"{session.id}.json", canonical_dumps(session.to_dict()) + "\n"
        )
        self.sessions[session.id] = session

    def bump_and_save(self, session: Session) -> Session:
        updated = replace_session(session, version=session.version + 1)
        self.save_session(updated)
        return updated

    def check_version(self, session: Session, expected: int):
        if session.version != expected:
            raise VersionConflict(expected, session.version)

    # --- docs

    def doc_path(self, rel: str) -> Path:
        docs_root = (self.root / DOCS_DIR).resolve()
        target = (docs_root / rel).resolve()
        if not str(target).startswith(str(docs_root) + os.sep) and target != docs_root:
            raise NotFound(rel)
        if not target.is_file():
            raise NotFound(rel)
        return target


def replace_session(session: Session, **changes) -> Session:
    base = dict(
        id=session.id,
        name=session.name,
        viewspec=session.viewspec,
        trace=session.trace,
        annotations=session.annotations,
        version=session.version,
        updated_at=int(time.time()),
    )
    base.update(changes)
    return Session(**base)

"""Operator entry point: ingest, history import, export, query, serve.

Exit codes: 0 success, 1 usage error, 2 data error. All outputs are byte
deterministic for a fixed workspace and environment (with the model off).
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from types import SimpleNamespace

from .abstraction import export_json, export_plantuml, materialize
from .canon import canonical_dumps
from .errors import CodescopeError
from .history import import_from_git
from .ingest import ingest_project
from .llm import client_from_env
from .model import validate_graph
from .planner import ExplorationTrace, Planner
from .viewspec import default_viewspec
from .workspace import Workspace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codescope")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_workspace(p):
        p.add_argument(
            "--workspace",
            default=os.environ.get("CODESCOPE_WORKSPACE", ""),
            help="workspace directory (or CODESCOPE_WORKSPACE)",
        )

    p_ingest = sub.add_parser("ingest", help="reverse engineer a source tree")
    p_ingest.add_argument("src_dir")
    add_workspace(p_ingest)
    p_ingest.add_argument("--module-depth", type=int, default=1)
    p_ingest.add_argument("--ref", default=None, help="version label for this snapshot")
    p_ingest.add_argument(
        "--compare-ref",
        nargs=2,
        metavar=("LABEL", "SRC_DIR"),
        action="append",
        default=[],
        help="also ingest a second snapshot for version comparison",
    )
    p_ingest.set_defaults(func=cmd_ingest)

    p_history = sub.add_parser("history", help="import change history")
    hist_sub = p_history.add_subparsers(dest="history_command", required=True)
    p_git = hist_sub.add_parser("import-git", help="read history from a git repository")
    p_git.add_argument("repo")
    add_workspace(p_git)
    p_git.set_defaults(func=cmd_history_git)
    p_jsonl = hist_sub.add_parser("import", help="import a normalized JSONL log")
    p_jsonl.add_argument("jsonl")
    add_workspace(p_jsonl)
    p_jsonl.set_defaults(func=cmd_history_import)

    p_export = sub.add_parser("export", help="export a view")
    add_workspace(p_export)
    p_export.add_argument("--view", default=None, help="session id (default view otherwise)")
    p_export.add_argument("--format", choices=("plantuml", "json"), required=True)
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)

    p_query = sub.add_parser("query", help="run one utterance against the workspace")
    p_query.add_argument("utterance")
    add_workspace(p_query)
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="run the API server")
    add_workspace(p_serve)
    p_serve.add_argument(
        "--port", type=int, default=int(os.environ.get("CODESCOPE_PORT", "7420"))
    )
    p_serve.set_defaults(func=cmd_serve)
    return parser


def _require_workspace(args) -> Path:
    if not args.workspace:
        raise UsageExit("a workspace is required (--workspace or CODESCOPE_WORKSPACE)")
    return Path(args.workspace)


class UsageExit(Exception):
    pass


def cmd_ingest(args) -> int:
    ws = Workspace(_require_workspace(args))
    diagnostics: list[str] = []
    graph = ingest_project(
        args.src_dir, module_depth=args.module_depth, subject_ref=args.ref,
        diagnostics=diagnostics,
    )
    for line in diagnostics:
        print(line, file=sys.stderr)
    problems = validate_graph(graph)
    if problems:
        for p in problems:
            print(f"ERROR graph: {p}", file=sys.stderr)
        return 2
    ws.store_graph(graph)
    print(f"ingested {len(graph.entities)} entities, {len(graph.relations)} relations")
    for label, src in args.compare_ref:
        cmp_diag: list[str] = []
        cmp_graph = ingest_project(
            src, module_depth=args.module_depth, subject_ref=label, diagnostics=cmp_diag
        )
        for line in cmp_diag:
            print(line, file=sys.stderr)
        ws.store_compare_graph(label, cmp_graph)
        print(f"ingested snapshot {label}: {len(cmp_graph.entities)} entities")
    return 0


def cmd_history_git(args) -> int:
    ws = Workspace.load(_require_workspace(args))
    jsonl = import_from_git(args.repo)
    ws.store_history(jsonl)
    print(f"imported {len(ws.log)} commits")
    return 0


def cmd_history_import(args) -> int:
    ws = Workspace.load(_require_workspace(args))
    text = Path(args.jsonl).read_text(encoding="utf-8")
    ws.store_history(text)
    print(f"imported {len(ws.log)} commits")
    return 0


def cmd_export(args) -> int:
    ws = Workspace.load(_require_workspace(args))
    graph = ws.require_graph()
    if args.view is not None:
        spec = ws.session(args.view).viewspec
    else:
        spec = default_viewspec(graph)
    view = materialize(graph, spec, history=ws.history, compare_graphs=ws.compare_graphs)
    text = export_plantuml(view) if args.format == "plantuml" else export_json(view)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def cmd_query(args) -> int:
    ws = Workspace.load(_require_workspace(args))
    graph = ws.require_graph()
    mode = os.environ.get("CODESCOPE_LLM_MODE", "off")
    planner = Planner(mode=mode, client=client_from_env(mode) if mode != "off" else None)
    session = SimpleNamespace(viewspec=default_viewspec(graph), trace=ExplorationTrace())
    result = planner.plan(args.utterance, session, graph, ws.history, ws.known_refs)
    print(canonical_dumps(result.to_dict()))
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(str(_require_workspace(args)), port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CodescopeError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

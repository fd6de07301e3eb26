from __future__ import annotations

import json
from pathlib import Path

import pytest

from codescope.history import HistoryIndex, import_commit_log
from codescope.ingest import ingest_project

FIXTURES = Path(__file__).parent / "fixtures"
JAVAPROJ = FIXTURES / "javaproj"
HISTORY_JSONL = FIXTURES / "history.jsonl"
GOLDEN = FIXTURES / "golden"


@pytest.fixture(scope="session")
def manifest() -> dict:
    return json.loads((GOLDEN / "manifest.json").read_text())


@pytest.fixture(scope="session")
def fixture_graph():
    diagnostics: list[str] = []
    graph = ingest_project(JAVAPROJ, module_depth=2, diagnostics=diagnostics)
    assert diagnostics == []
    return graph


@pytest.fixture(scope="session")
def fixture_log():
    return import_commit_log(HISTORY_JSONL.read_text())


@pytest.fixture(scope="session")
def history_index(fixture_log, fixture_graph):
    return HistoryIndex(fixture_log, fixture_graph)


def make_workspace(tmp_path: Path, with_history: bool = True, module_depth: int = 2):
    """Materialize a full workspace directory from the bundled fixtures."""
    from codescope.workspace import Workspace

    ws = Workspace(tmp_path)
    graph = ingest_project(JAVAPROJ, module_depth=module_depth)
    ws.store_graph(graph)
    if with_history:
        ws.store_history(HISTORY_JSONL.read_text())
    return Workspace.load(tmp_path)

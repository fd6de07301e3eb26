"""Project ingestion: scan, parse, resolve, build. One bad file never aborts."""
from __future__ import annotations

from pathlib import Path

from .errors import ParseError
from .java_parser import RawUnit, parse_unit, scan_project
from .model import CodeGraph, build_graph
from .resolver import resolve_types


def ingest_project(
    src_dir: str | Path,
    module_depth: int = 1,
    subject_ref: str | None = None,
    diagnostics: list[str] | None = None,
) -> CodeGraph:
    """Reverse engineer a source tree into a CodeGraph.

    Files that fail to parse are skipped and reported through `diagnostics`
    as `WARN parse <path>:<line> <message>` lines.
    """
    root = Path(src_dir)
    units: list[RawUnit] = []
    for rel in scan_project(root):
        text = (root / rel).read_text(encoding="utf-8", errors="replace")
        try:
            units.append(parse_unit(text, rel))
        except ParseError as exc:
            if diagnostics is not None:
                diagnostics.append(f"WARN parse {exc.path}:{exc.line} {exc.reason}")
    resolved = resolve_types(units)
    return build_graph(resolved, subject_ref=subject_ref, module_depth=module_depth)

"""Version-control history: normalized commit logs and derived metrics.

All analysis consumes the normalized JSONL form; git itself is reached only
through the import_from_git adapter, so every metric is testable without a
repository. Heat is log-scaled and max-normalized; commit counts are heavy
tailed and a linear ramp would wash out everything but the hottest file.
"""
from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .canon import canonical_dumps
from .errors import DuplicateCommit, FormatError, ToolFailed, ToolUnavailable
from .model import TYPE_KINDS, CodeGraph, qname_of

import math


@dataclass(frozen=True)
class FileChange:
    path: str
    added: int | None = None
    deleted: int | None = None


@dataclass(frozen=True)
class Commit:
    commit_id: str
    timestamp: int
    author: str
    tags: tuple[str, ...] = ()
    files: tuple[FileChange, ...] = ()

    def to_dict(self) -> dict:
        return {
            "commit_id": self.commit_id,
            "timestamp": self.timestamp,
            "author": self.author,
            "tags": list(self.tags),
            "files": [{"path": f.path, "added": f.added, "deleted": f.deleted} for f in self.files],
        }


@dataclass
class CommitLog:
    commits: list[Commit] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.commits)

    def to_jsonl(self) -> str:
        return "".join(canonical_dumps(c.to_dict()) + "\n" for c in self.commits)

    def all_tags(self) -> list[tuple[str, Commit]]:
        """(tag, commit) pairs in log order."""
        return [(tag, c) for c in self.commits for tag in c.tags]


@dataclass(frozen=True)
class HeatOverlay:
    metric: str
    values: dict
    window: tuple[int | None, int | None]
    counts: dict

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "values": dict(sorted(self.values.items())),
            "counts": dict(sorted(self.counts.items())),
            "window": {"from_ts": self.window[0], "to_ts": self.window[1]},
        }


@dataclass(frozen=True)
class CoChangePair:
    a: str  # entity ids, a < b by qualified name
    b: str
    support: int
    confidence_a_given_b: float
    confidence_b_given_a: float

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "support": self.support,
            "confidence_a_given_b": self.confidence_a_given_b,
            "confidence_b_given_a": self.confidence_b_given_a,
        }


@dataclass(frozen=True)
class ReleaseWindow:
    from_ts: int | None  # None means unbounded
    to_ts: int | None
    no_tags: bool = False

    def to_dict(self) -> dict:
        return {"from_ts": self.from_ts, "to_ts": self.to_ts, "no_tags": self.no_tags}


def import_commit_log(stream: str) -> CommitLog:
    """Parse JSONL into a validated, (timestamp, commit_id)-sorted log."""
    commits: list[Commit] = []
    seen: set[str] = set()
    for line_no, line in enumerate(stream.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise FormatError(line_no, "expected a JSON object")
        try:
            commit_id = obj["commit_id"]
            timestamp = obj["timestamp"]
            author = obj["author"]
            tags = obj["tags"]
            files = obj["files"]
        except KeyError as exc:
            raise FormatError(line_no, f"missing field {exc.args[0]!r}") from None
        if not isinstance(commit_id, str) or not commit_id:
            raise FormatError(line_no, "commit_id must be a non-empty string")
        if not isinstance(timestamp, int):
            raise FormatError(line_no, "timestamp must be an integer")
        if not isinstance(author, str):
            raise FormatError(line_no, "author must be a string")
        if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
            raise FormatError(line_no, "tags must be a list of strings")
        if not isinstance(files, list) or not files:
            raise FormatError(line_no, "files must be a non-empty list")
        changes = []
        for f in files:
            if not isinstance(f, dict) or "path" not in f:
                raise FormatError(line_no, "each file needs a path")
            added = f.get("added")
            deleted = f.get("deleted")
            for v in (added, deleted):
                if v is not None and (not isinstance(v, int) or v < 0):
                    raise FormatError(line_no, "line counts must be null or >= 0")
            changes.append(FileChange(f["path"], added, deleted))
        if commit_id in seen:
            raise DuplicateCommit(commit_id)
        seen.add(commit_id)
        commits.append(Commit(commit_id, timestamp, author, tuple(tags), tuple(changes)))
    commits.sort(key=lambda c: (c.timestamp, c.commit_id))
    return CommitLog(commits)


def import_from_git(repo_dir: str | Path) -> str:
    """Run git log and emit the normalized JSONL. Pure adapter, no analysis."""
    sep = "\x01"
    fmt = f"{sep}%H\x02%at\x02%an\x02%D"
    try:
        proc = subprocess.run(
            ["git", "-C", str(repo_dir), "log", "--reverse", f"--pretty=format:{fmt}", "--numstat"],
            capture_output=True,
            text=True,
        )
    except FileNotFoundError:
        raise ToolUnavailable("git executable not found") from None
    if proc.returncode != 0:
        raise ToolFailed(proc.returncode, proc.stderr)

    lines_out: list[str] = []
    current: dict | None = None

    def flush():
        if current is not None and current["files"]:
            lines_out.append(canonical_dumps(current) + "\n")

    for raw in proc.stdout.splitlines():
        if raw.startswith(sep):
            flush()
            commit_id, ts, author, deco = raw[1:].split("\x02")
            tags = []
            for part in deco.split(", "):
                part = part.strip()
                if part.startswith("tag: "):
                    tags.append(part[len("tag: "):])
            current = {
                "commit_id": commit_id,
                "timestamp": int(ts),
                "author": author,
                "tags": tags,
                "files": [],
            }
        elif raw.strip() and current is not None:
            parts = raw.split("\t")
            if len(parts) != 3:
                continue
            added_s, deleted_s, path = parts
            current["files"].append(
                {
                    "path": path,
                    "added": None if added_s == "-" else int(added_s),
                    "deleted": None if deleted_s == "-" else int(deleted_s),
                }
            )
    flush()
    return "".join(lines_out)


def _normalize_path(path: str) -> str:
    p = path.replace("\\", "/")
    while p.startswith("./"):
        p = p[2:]
    return p


def map_paths_to_entities(log: CommitLog, graph: CodeGraph) -> tuple[dict, list[str]]:
    """Map each touched path to the Type entities declared in that file.

    Returns (mapping, diagnostics); unmatched paths map to an empty set and
    are reported once.
    """
    by_file: dict[str, set[str]] = {}
    for ent in graph.entities.values():
        if ent.kind in TYPE_KINDS and ent.source_location is not None:
            by_file.setdefault(_normalize_path(ent.source_location[0]), set()).add(ent.id)

    mapping: dict[str, set[str]] = {}
    diagnostics: list[str] = []
    unmatched: set[str] = set()
    for commit in log.commits:
        for change in commit.files:
            if change.path in mapping:
                continue
            hits = by_file.get(_normalize_path(change.path), set())
            mapping[change.path] = set(hits)
            if not hits and change.path not in unmatched:
                unmatched.add(change.path)
    for path in sorted(unmatched):
        diagnostics.append(f"no entity declared in {path}")
    return mapping, diagnostics


def _in_window(ts: int, window: tuple[int | None, int | None]) -> bool:
    from_ts, to_ts = window
    if from_ts is not None and ts < from_ts:
        return False
    if to_ts is not None and ts > to_ts:
        return False
    return True


def entity_commits(
    log: CommitLog, mapping: dict, window: tuple[int | None, int | None] = (None, None)
) -> dict:
    """Per-entity sets of commit ids inside the inclusive window."""
    out: dict[str, set[str]] = {}
    for commit in log.commits:
        if not _in_window(commit.timestamp, window):
            continue
        for change in commit.files:
            for eid in mapping.get(change.path, ()):
                out.setdefault(eid, set()).add(commit.commit_id)
    return {eid: frozenset(ids) for eid, ids in out.items()}


def change_counts(
    log: CommitLog, mapping: dict, window: tuple[int | None, int | None] = (None, None)
) -> dict:
    """Commits inside [from_ts, to_ts] touching each entity; multi-file
    commits count once per entity."""
    if window[0] is not None and window[1] is not None and window[0] > window[1]:
        raise ValueError("window start after end")
    sets = entity_commits(log, mapping, window)
    counts = {eid: 0 for ids in mapping.values() for eid in ids}
    counts.update({eid: len(ids) for eid, ids in sets.items()})
    return counts


def heat_overlay(
    counts: dict, window: tuple[int | None, int | None] = (None, None)
) -> HeatOverlay:
    """heat(e) = ln(1 + count) / ln(1 + max_count); all zeros when nothing moved."""
    max_count = max(counts.values(), default=0)
    if max_count <= 0:
        values = {eid: 0.0 for eid in counts}
    else:
        denom = math.log(1 + max_count)
        values = {eid: math.log(1 + c) / denom for eid, c in counts.items()}
    return HeatOverlay(metric="heat", values=values, window=window, counts=dict(counts))


def cochange_pairs(
    log: CommitLog,
    mapping: dict,
    min_support: int = 2,
    min_confidence: float = 0.5,
) -> list[CoChangePair]:
    """Pairs of entities that change in the same commits.

    support(a,b) counts shared commits; confidence(a|b) = support / commits
    touching b. A pair qualifies when support >= min_support and either
    confidence clears min_confidence. Sorted by support desc, then name.
    """
    sets = entity_commits(log, mapping)
    entities = sorted(sets.keys(), key=qname_of)
    pairs: list[CoChangePair] = []
    for i, a in enumerate(entities):
        for b in entities[i + 1 :]:
            shared = sets[a] & sets[b]
            support = len(shared)
            if support < min_support:
                continue
            conf_ab = support / len(sets[b]) if sets[b] else 0.0
            conf_ba = support / len(sets[a]) if sets[a] else 0.0
            if max(conf_ab, conf_ba) < min_confidence:
                continue
            pairs.append(CoChangePair(a, b, support, conf_ab, conf_ba))
    pairs.sort(key=lambda p: (-p.support, qname_of(p.a), qname_of(p.b)))
    return pairs


def release_window(log: CommitLog) -> ReleaseWindow:
    """Time range of commits strictly after the latest tagged commit.

    Timestamps are integer seconds, so the exclusive lower bound is encoded
    as tag_ts + 1 and windows stay inclusive everywhere else. Without tags
    the window spans the whole log and no_tags is flagged.
    """
    tagged = [c for c in log.commits if c.tags]
    if not tagged:
        return ReleaseWindow(from_ts=None, to_ts=None, no_tags=True)
    latest = max(tagged, key=lambda c: (c.timestamp, c.commit_id))
    return ReleaseWindow(from_ts=latest.timestamp + 1, to_ts=None, no_tags=False)


class HistoryIndex:
    """Bound view of one commit log against one graph.

    Precomputes the path mapping once; exposes the window helpers the
    materialization pipeline and the planner need.
    """

    def __init__(self, log: CommitLog, graph: CodeGraph):
        self.log = log
        self.graph = graph
        self.mapping, self.diagnostics = map_paths_to_entities(log, graph)
        self.release = release_window(log)

    def resolve_window(self, window) -> tuple[int | None, int | None]:
        """Accepts "last_release", (from, to) pairs, or None (whole log)."""
        if window == "last_release":
            return (self.release.from_ts, self.release.to_ts)
        if window is None:
            return (None, None)
        if isinstance(window, dict):
            return (window.get("from_ts"), window.get("to_ts"))
        from_ts, to_ts = window
        return (from_ts, to_ts)

    def entity_commits(self, from_ts: int | None, to_ts: int | None) -> dict:
        return entity_commits(self.log, self.mapping, (from_ts, to_ts))

    def change_counts(self, window=None) -> dict:
        return change_counts(self.log, self.mapping, self.resolve_window(window))

    def heat(self, window=None) -> HeatOverlay:
        resolved = self.resolve_window(window)
        return heat_overlay(change_counts(self.log, self.mapping, resolved), resolved)

    def cochange_pairs(self, min_support: int = 2, min_confidence: float = 0.5):
        return cochange_pairs(self.log, self.mapping, min_support, min_confidence)

    def latest_tags(self, n: int = 2) -> list[str]:
        """Most recent n tag names, newest first."""
        tagged = sorted(
            ((c.timestamp, c.commit_id, tag) for c in self.log.commits for tag in c.tags),
            reverse=True,
        )
        return [t for _, _, t in tagged[:n]]

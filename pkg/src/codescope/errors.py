"""Exception types shared across the package.

Every failure the API server has to report maps to one of these classes;
the server translates the class name to the wire error code.
"""
from __future__ import annotations


class CodescopeError(Exception):
    """Base class for all domain errors."""

    code = "error"


# --- code graph -------------------------------------------------------------

class NotFound(CodescopeError):
    code = "not_found"

    def __init__(self, entity_id: str):
        super().__init__(f"no such entity: {entity_id}")
        self.entity_id = entity_id


class NoAncestor(CodescopeError):
    code = "no_ancestor"

    def __init__(self, entity_id: str, level: str):
        super().__init__(f"{entity_id} has no ancestor at level {level}")
        self.entity_id = entity_id
        self.level = level


class DuplicateDeclaration(CodescopeError):
    code = "duplicate_declaration"

    def __init__(self, qualified_name: str):
        super().__init__(f"type declared more than once: {qualified_name}")
        self.qualified_name = qualified_name


class EmptyGraph(CodescopeError):
    code = "empty_graph"


# --- source frontend --------------------------------------------------------

class ParseError(CodescopeError):
    code = "parse_error"

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
        self.reason = message


class IoError(CodescopeError):
    code = "io_error"

    def __init__(self, path: str, cause: str):
        super().__init__(f"{path}: {cause}")
        self.path = path
        self.cause = cause


# --- abstraction ------------------------------------------------------------

class InvalidExpansion(CodescopeError):
    code = "invalid_expansion"

    def __init__(self, entity_id: str):
        super().__init__(f"cannot expand leaf entity: {entity_id}")
        self.entity_id = entity_id


class InvalidCut(CodescopeError):
    code = "invalid_cut"

    def __init__(self, entity_id: str):
        super().__init__(f"entity not covered by cut: {entity_id}")
        self.entity_id = entity_id


class BadGlob(CodescopeError):
    code = "bad_glob"

    def __init__(self, pattern):
        super().__init__(f"bad glob pattern: {pattern!r}")
        self.pattern = pattern


class TooLarge(CodescopeError):
    code = "too_large"

    def __init__(self, count: int, limit: int):
        super().__init__(f"view has {count} nodes, export limit is {limit}")
        self.count = count
        self.limit = limit


# --- history ----------------------------------------------------------------

class FormatError(CodescopeError):
    code = "format_error"

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateCommit(CodescopeError):
    code = "duplicate_commit"

    def __init__(self, commit_id: str):
        super().__init__(f"duplicate commit id: {commit_id}")
        self.commit_id = commit_id


class ToolUnavailable(CodescopeError):
    code = "tool_unavailable"


class ToolFailed(CodescopeError):
    code = "tool_failed"

    def __init__(self, exit_code: int, stderr: str):
        super().__init__(f"git exited {exit_code}: {stderr.strip()[:200]}")
        self.exit_code = exit_code
        self.stderr = stderr


# --- view protocol ----------------------------------------------------------

class InvalidIntent(CodescopeError):
    code = "invalid_intent"

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class VersionMismatch(CodescopeError):
    code = "version_mismatch"


# --- planner ----------------------------------------------------------------

class UnparseableUtterance(CodescopeError):
    code = "unparseable_utterance"

    def __init__(self, utterance: str, hint: str):
        super().__init__(f"could not interpret: {utterance!r}. {hint}")
        self.utterance = utterance
        self.hint = hint


class LLMUnavailable(CodescopeError):
    code = "llm_unavailable"


class InvalidAfterRepair(CodescopeError):
    code = "invalid_after_repair"

    def __init__(self, violations):
        super().__init__(f"proposal still invalid after repair round: {violations}")
        self.violations = violations


# --- service ----------------------------------------------------------------

class SessionNotFound(CodescopeError):
    code = "session_not_found"

    def __init__(self, session_id: str):
        super().__init__(f"no such session: {session_id}")
        self.session_id = session_id


class VersionConflict(CodescopeError):
    code = "version_conflict"

    def __init__(self, expected: int, actual: int):
        super().__init__(f"session version is {actual}, request based on {expected}")
        self.expected = expected
        self.actual = actual


class MissingCompareRef(CodescopeError):
    code = "missing_compare_ref"

    def __init__(self, ref: str):
        super().__init__(f"no ingested snapshot for ref: {ref}")
        self.ref = ref

"""The view protocol: declarative view specifications and typed intents.

A ViewSpec is one canonical JSON document describing a rendered view; an
Intent is a typed user action that transforms it. Parsing is strict: unknown
fields are rejected rather than dropped, so a hallucinated field from a
language model proposal surfaces as a violation instead of vanishing.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .canon import canonical_dumps, content_hash
from .errors import EmptyGraph, InvalidIntent, VersionMismatch
from .model import CodeGraph, EntityKind, Level, ROOT_SCOPE

SCHEMA_VERSION = 1
DIAGRAM_KINDS = ("class", "package", "containment_tree")
LEVELS = tuple(level.value for level in Level)
OVERLAY_NAMES = ("heat", "cochange", "diff")
ENTITY_KIND_NAMES = tuple(k.value for k in EntityKind)
EXPORT_FORMATS = ("plantuml", "json")


@dataclass(frozen=True)
class Violation:
    path: str
    reason: str

    def to_dict(self) -> dict:
        return {"path": self.path, "reason": self.reason}


@dataclass(frozen=True)
class FilterSet:
    include_globs: tuple[str, ...] = ()
    exclude_globs: tuple[str, ...] = ()
    kinds: tuple[str, ...] | None = None
    min_heat: float | None = None
    changed_since: object = None  # "last_release" | (from_ts, to_ts) | None

    def to_dict(self) -> dict:
        return {
            "include_globs": list(self.include_globs),
            "exclude_globs": list(self.exclude_globs),
            "kinds": list(self.kinds) if self.kinds is not None else None,
            "min_heat": self.min_heat,
            "changed_since": _window_to_json(self.changed_since),
        }

    def is_empty(self) -> bool:
        return self == FilterSet()


@dataclass(frozen=True)
class LayoutHints:
    direction: str = "TB"  # TB | LR
    group_by_package: bool = True

    def to_dict(self) -> dict:
        return {"direction": self.direction, "group_by_package": self.group_by_package}


@dataclass(frozen=True)
class ViewSpec:
    schema_version: int = SCHEMA_VERSION
    view_id: str = ""
    diagram_kind: str = "package"
    scope: str = ROOT_SCOPE
    level: str = Level.ROOT_PACKAGE.value
    expanded: frozenset[str] = frozenset()
    collapsed: frozenset[str] = frozenset()
    filters: FilterSet = FilterSet()
    overlays: frozenset[str] = frozenset()
    overlay_params: dict = field(default_factory=dict)
    highlights: tuple[str, ...] = ()
    focus: tuple[str, int] | None = None
    layout_hints: LayoutHints = LayoutHints()
    summary_panel: tuple[tuple[str, str], ...] = ()  # (text, "derived"|"llm")
    show_annotations: bool = True

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "view_id": self.view_id,
            "diagram_kind": self.diagram_kind,
            "scope": self.scope,
            "level": self.level,
            "expanded": sorted(self.expanded),
            "collapsed": sorted(self.collapsed),
            "filters": self.filters.to_dict(),
            "overlays": sorted(self.overlays),
            "overlay_params": _params_to_json(self.overlay_params),
            "highlights": list(self.highlights),
            "focus": {"entity": self.focus[0], "hops": self.focus[1]} if self.focus else None,
            "layout_hints": self.layout_hints.to_dict(),
            "summary_panel": [{"text": t, "provenance": p} for t, p in self.summary_panel],
            "show_annotations": self.show_annotations,
        }

    def to_json(self) -> str:
        return canonical_dumps(self.to_dict())


def viewspec_hash(spec: ViewSpec) -> str:
    return content_hash(spec.to_dict())


def _window_to_json(window):
    if window is None or window == "last_release":
        return window
    from_ts, to_ts = window
    return {"from_ts": from_ts, "to_ts": to_ts}


def _window_from_json(value, path: str, violations: list[Violation]):
    if value is None or value == "last_release":
        return value
    if isinstance(value, dict):
        extra = set(value) - {"from_ts", "to_ts"}
        if extra:
            violations.append(Violation(path, f"unknown keys: {sorted(extra)}"))
            return None
        from_ts, to_ts = value.get("from_ts"), value.get("to_ts")
        for name, v in (("from_ts", from_ts), ("to_ts", to_ts)):
            if v is not None and not isinstance(v, int):
                violations.append(Violation(f"{path}.{name}", "must be an integer or null"))
                return None
        return (from_ts, to_ts)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return (value[0], value[1])
    violations.append(Violation(path, "expected null, \"last_release\" or a time range"))
    return None


def _params_to_json(params: dict) -> dict:
    out = {}
    for key, value in params.items():
        if key == "window":
            out[key] = _window_to_json(value)
        else:
            out[key] = value
    return out


_TOP_FIELDS = {
    "schema_version", "view_id", "diagram_kind", "scope", "level", "expanded",
    "collapsed", "filters", "overlays", "overlay_params", "highlights", "focus",
    "layout_hints", "summary_panel", "show_annotations",
}
_FILTER_FIELDS = {"include_globs", "exclude_globs", "kinds", "min_heat", "changed_since"}
_LAYOUT_FIELDS = {"direction", "group_by_package"}


def parse_viewspec(data) -> tuple[ViewSpec | None, list[Violation]]:
    """Strictly parse a dict or JSON text into a ViewSpec.

    Structural problems are returned as violations; a None spec means the
    document was not usable at all.
    """
    violations: list[Violation] = []
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            return None, [Violation("$", f"invalid JSON: {exc.msg}")]
    if not isinstance(data, dict):
        return None, [Violation("$", "expected a JSON object")]

    unknown = set(data) - _TOP_FIELDS
    for key in sorted(unknown):
        violations.append(Violation(key, "unknown field"))
    missing = _TOP_FIELDS - set(data)
    for key in sorted(missing):
        violations.append(Violation(key, "missing field"))
    if violations:
        return None, violations

    def str_list(key: str) -> tuple[str, ...]:
        value = data[key]
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            violations.append(Violation(key, "must be a list of strings"))
            return ()
        return tuple(value)

    if not isinstance(data["schema_version"], int):
        violations.append(Violation("schema_version", "must be an integer"))
    if not isinstance(data["view_id"], str):
        violations.append(Violation("view_id", "must be a string"))
    if not isinstance(data["diagram_kind"], str):
        violations.append(Violation("diagram_kind", "must be a string"))
    if not isinstance(data["scope"], str):
        violations.append(Violation("scope", "must be a string"))
    if not isinstance(data["level"], str):
        violations.append(Violation("level", "must be a string"))
    if not isinstance(data["show_annotations"], bool):
        violations.append(Violation("show_annotations", "must be a boolean"))

    expanded = frozenset(str_list("expanded"))
    collapsed = frozenset(str_list("collapsed"))
    overlays = frozenset(str_list("overlays"))
    highlights = str_list("highlights")

    filters = FilterSet()
    fdata = data["filters"]
    if not isinstance(fdata, dict):
        violations.append(Violation("filters", "must be an object"))
    else:
        extra = set(fdata) - _FILTER_FIELDS
        for key in sorted(extra):
            violations.append(Violation(f"filters.{key}", "unknown field"))
        kinds = fdata.get("kinds")
        if kinds is not None and (
            not isinstance(kinds, list) or not all(isinstance(k, str) for k in kinds)
        ):
            violations.append(Violation("filters.kinds", "must be null or a list of strings"))
            kinds = None
        min_heat = fdata.get("min_heat")
        if min_heat is not None and not isinstance(min_heat, (int, float)):
            violations.append(Violation("filters.min_heat", "must be a number or null"))
            min_heat = None
        inc = fdata.get("include_globs", [])
        exc_ = fdata.get("exclude_globs", [])
        for name, val in (("include_globs", inc), ("exclude_globs", exc_)):
            if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
                violations.append(Violation(f"filters.{name}", "must be a list of strings"))
        changed = _window_from_json(fdata.get("changed_since"), "filters.changed_since", violations)
        filters = FilterSet(
            include_globs=tuple(inc) if isinstance(inc, list) else (),
            exclude_globs=tuple(exc_) if isinstance(exc_, list) else (),
            kinds=tuple(kinds) if kinds is not None else None,
            min_heat=float(min_heat) if min_heat is not None else None,
            changed_since=changed,
        )

    focus = None
    fval = data["focus"]
    if fval is not None:
        if not isinstance(fval, dict) or set(fval) - {"entity", "hops"}:
            violations.append(Violation("focus", "must be null or {entity, hops}"))
        else:
            ent, hops = fval.get("entity"), fval.get("hops")
            if not isinstance(ent, str) or not isinstance(hops, int) or hops < 0:
                violations.append(Violation("focus", "entity must be a string, hops an int >= 0"))
            else:
                focus = (ent, hops)

    hints = LayoutHints()
    ldata = data["layout_hints"]
    if not isinstance(ldata, dict) or set(ldata) - _LAYOUT_FIELDS:
        violations.append(Violation("layout_hints", "must be {direction, group_by_package}"))
    else:
        direction = ldata.get("direction", "TB")
        group = ldata.get("group_by_package", True)
        if direction not in ("TB", "LR"):
            violations.append(Violation("layout_hints.direction", "must be TB or LR"))
        if not isinstance(group, bool):
            violations.append(Violation("layout_hints.group_by_package", "must be a boolean"))
        else:
            hints = LayoutHints(direction=direction, group_by_package=group)

    panel: list[tuple[str, str]] = []
    pdata = data["summary_panel"]
    if not isinstance(pdata, list):
        violations.append(Violation("summary_panel", "must be a list"))
    else:
        for i, item in enumerate(pdata):
            if (
                not isinstance(item, dict)
                or set(item) != {"text", "provenance"}
                or not isinstance(item.get("text"), str)
                or item.get("provenance") not in ("derived", "llm")
            ):
                violations.append(
                    Violation(f"summary_panel[{i}]", "must be {text, provenance: derived|llm}")
                )
            else:
                panel.append((item["text"], item["provenance"]))

    params = data["overlay_params"]
    if not isinstance(params, dict):
        violations.append(Violation("overlay_params", "must be an object"))
        params = {}
    else:
        params = dict(params)
        if "window" in params:
            params["window"] = _window_from_json(params["window"], "overlay_params.window", violations)

    if violations:
        return None, violations

    spec = ViewSpec(
        schema_version=data["schema_version"],
        view_id=data["view_id"],
        diagram_kind=data["diagram_kind"],
        scope=data["scope"],
        level=data["level"],
        expanded=expanded,
        collapsed=collapsed,
        filters=filters,
        overlays=overlays,
        overlay_params=params,
        highlights=highlights,
        focus=focus,
        layout_hints=hints,
        summary_panel=tuple(panel),
        show_annotations=data["show_annotations"],
    )
    return spec, []


def default_viewspec(graph: CodeGraph) -> ViewSpec:
    """Top-down entry point: root-package overview, no filters or overlays."""
    if not graph.entities:
        raise EmptyGraph("cannot build a view over an empty graph")
    return ViewSpec(view_id=f"v-{graph.graph_hash()}")


def validate_viewspec(
    spec: ViewSpec, graph: CodeGraph, known_refs: set[str] | None = None
) -> list[Violation]:
    """Semantic validation against a graph. Empty list means renderable."""
    violations: list[Violation] = []
    if spec.schema_version != SCHEMA_VERSION:
        violations.append(
            Violation("schema_version", f"unsupported version {spec.schema_version}")
        )
    if not spec.view_id:
        violations.append(Violation("view_id", "must not be empty"))
    if spec.diagram_kind not in DIAGRAM_KINDS:
        violations.append(
            Violation("diagram_kind", f"must be one of {', '.join(DIAGRAM_KINDS)}")
        )
    if spec.level not in LEVELS:
        violations.append(Violation("level", f"must be one of {', '.join(LEVELS)}"))
    if spec.scope != ROOT_SCOPE and not graph.has(spec.scope):
        violations.append(Violation("scope", f"no such entity: {spec.scope}"))
    for name, ids in (("expanded", spec.expanded), ("collapsed", spec.collapsed)):
        for eid in sorted(ids):
            if not graph.has(eid):
                violations.append(Violation(name, f"no such entity: {eid}"))
    overlap = spec.expanded & spec.collapsed
    if overlap:
        violations.append(
            Violation("expanded", f"ids both expanded and collapsed: {sorted(overlap)}")
        )
    for eid in spec.highlights:
        if not graph.has(eid):
            violations.append(Violation("highlights", f"no such entity: {eid}"))
    if spec.focus is not None:
        ent, hops = spec.focus
        if not graph.has(ent):
            violations.append(Violation("focus.entity", f"no such entity: {ent}"))
        if hops < 0:
            violations.append(Violation("focus.hops", "must be >= 0"))
    for name in sorted(spec.overlays):
        if name not in OVERLAY_NAMES:
            violations.append(Violation("overlays", f"unknown overlay: {name}"))
    if spec.filters.min_heat is not None and not (0.0 <= spec.filters.min_heat <= 1.0):
        violations.append(Violation("filters.min_heat", "must be within [0, 1]"))
    if spec.filters.kinds is not None:
        for kind in spec.filters.kinds:
            if kind not in ENTITY_KIND_NAMES:
                violations.append(Violation("filters.kinds", f"unknown kind: {kind}"))
    cs = spec.filters.changed_since
    if cs is not None and cs != "last_release":
        if not (isinstance(cs, tuple) and len(cs) == 2):
            violations.append(Violation("filters.changed_since", "malformed time range"))

    # overlay parameter completeness
    if "heat" in spec.overlays and "window" not in spec.overlay_params:
        violations.append(Violation("overlay_params.window", "required by heat overlay"))
    if "cochange" in spec.overlays:
        seed = spec.overlay_params.get("seed")
        if not isinstance(seed, str) or not seed:
            violations.append(Violation("overlay_params.seed", "required by cochange overlay"))
        elif not graph.has(seed):
            violations.append(Violation("overlay_params.seed", f"no such entity: {seed}"))
    if "diff" in spec.overlays:
        ref = spec.overlay_params.get("ref_before")
        if not isinstance(ref, str) or not ref:
            violations.append(Violation("overlay_params.ref_before", "required by diff overlay"))
        elif known_refs is not None and ref not in known_refs:
            violations.append(Violation("overlay_params.ref_before", f"unknown snapshot: {ref}"))
    return violations


# --- intents ------------------------------------------------------------

INTENT_FIELDS: dict[str, tuple[str, ...]] = {
    "focus": ("entity", "hops"),
    "expand": ("entity",),
    "collapse": ("entity",),
    "set_level": ("level",),
    "filter_changed": ("window_kind",),
    "overlay_heat": ("window",),
    "show_cochange": ("entity",),
    "compare_versions": ("ref_before", "ref_after"),
    "summarize": ("scope",),
    "annotate": ("entity", "text"),
    "reset_view": (),
    "export_view": ("format",),
}


@dataclass(frozen=True)
class Intent:
    type: str
    entity: str | None = None
    hops: int | None = None
    level: str | None = None
    window_kind: str | None = None
    window: object = None
    ref_before: str | None = None
    ref_after: str | None = None
    scope: str | None = None
    text: str | None = None
    format: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"type": self.type}
        for f in INTENT_FIELDS.get(self.type, ()):
            value = getattr(self, f)
            out[f] = _window_to_json(value) if f == "window" else value
        return out


def intent_from_dict(data: dict) -> Intent:
    if not isinstance(data, dict) or "type" not in data:
        raise InvalidIntent("intent must be an object with a type")
    itype = data["type"]
    if itype not in INTENT_FIELDS:
        raise InvalidIntent(f"unknown intent type: {itype}")
    fields_ = INTENT_FIELDS[itype]
    extra = set(data) - set(fields_) - {"type"}
    if extra:
        raise InvalidIntent(f"unexpected intent fields: {sorted(extra)}")
    kwargs = {}
    for f in fields_:
        if f not in data:
            raise InvalidIntent(f"intent {itype} requires field {f!r}")
        value = data[f]
        if f == "window":
            errs: list[Violation] = []
            value = _window_from_json(value, "window", errs)
            if errs:
                raise InvalidIntent(errs[0].reason)
        elif f == "hops":
            if not isinstance(value, int) or value < 0:
                raise InvalidIntent("hops must be an integer >= 0")
        elif not isinstance(value, str) or not value:
            raise InvalidIntent(f"intent field {f!r} must be a non-empty string")
        kwargs[f] = value
    return Intent(type=itype, **kwargs)


def apply_intent(spec: ViewSpec, intent: Intent, graph: CodeGraph) -> ViewSpec:
    """Pure transformation of a spec by one intent; output always validates."""
    from .model import children  # here to keep module init acyclic

    def need_entity(eid: str | None) -> str:
        if not eid:
            raise InvalidIntent("intent requires an entity")
        if not graph.has(eid):
            raise InvalidIntent(f"no such entity: {eid}")
        return eid

    t = intent.type
    if t == "focus":
        ent = need_entity(intent.entity)
        return replace(spec, focus=(ent, intent.hops or 0))
    if t == "expand":
        ent = need_entity(intent.entity)
        if not children(graph, ent):
            raise InvalidIntent(f"cannot expand leaf entity: {ent}")
        return replace(
            spec, expanded=spec.expanded | {ent}, collapsed=spec.collapsed - {ent}
        )
    if t == "collapse":
        ent = need_entity(intent.entity)
        return replace(
            spec, collapsed=spec.collapsed | {ent}, expanded=spec.expanded - {ent}
        )
    if t == "set_level":
        if intent.level not in LEVELS:
            raise InvalidIntent(f"unknown level: {intent.level}")
        return replace(spec, level=intent.level, expanded=frozenset(), collapsed=frozenset())
    if t == "filter_changed":
        if intent.window_kind != "last_release":
            raise InvalidIntent(f"unknown change window: {intent.window_kind}")
        params = dict(spec.overlay_params)
        params["window"] = "last_release"
        return replace(
            spec,
            filters=replace(spec.filters, changed_since="last_release"),
            overlays=spec.overlays | {"heat"},
            overlay_params=params,
        )
    if t == "overlay_heat":
        window = intent.window if intent.window is not None else "last_release"
        params = dict(spec.overlay_params)
        params["window"] = window
        return replace(spec, overlays=spec.overlays | {"heat"}, overlay_params=params)
    if t == "show_cochange":
        ent = need_entity(intent.entity)
        params = dict(spec.overlay_params)
        params["seed"] = ent
        highlights = spec.highlights if ent in spec.highlights else spec.highlights + (ent,)
        return replace(
            spec, overlays=spec.overlays | {"cochange"}, overlay_params=params,
            highlights=highlights,
        )
    if t == "compare_versions":
        if not intent.ref_before or not intent.ref_after:
            raise InvalidIntent("compare_versions requires two refs")
        params = dict(spec.overlay_params)
        params["ref_before"] = intent.ref_before
        params["ref_after"] = intent.ref_after
        return replace(spec, overlays=spec.overlays | {"diff"}, overlay_params=params)
    if t == "summarize":
        scope = intent.scope
        if scope != ROOT_SCOPE:
            need_entity(scope)
        return spec  # panel text is produced by the planner, geometry untouched
    if t == "annotate":
        need_entity(intent.entity)
        if not intent.text:
            raise InvalidIntent("annotation text must not be empty")
        return spec  # annotations live in the session store
    if t == "reset_view":
        return default_viewspec(graph)
    if t == "export_view":
        if intent.format not in EXPORT_FORMATS:
            raise InvalidIntent(f"unsupported export format: {intent.format}")
        return spec
    raise InvalidIntent(f"unknown intent type: {t}")


# --- natural-language intent rules ---------------------------------------

_WORD = re.compile(r"[A-Za-z0-9_$.\-]+")


def _resolve_name(token: str, graph: CodeGraph) -> str | None:
    """Unique case-insensitive suffix match on qualified names."""
    tok = token.lower().strip(".")
    if not tok:
        return None
    hits = []
    for ent in graph.entities.values():
        if ent.is_external:
            continue
        lq = ent.qualified_name.lower()
        if lq == tok or lq.endswith("." + tok):
            hits.append(ent.id)
    return hits[0] if len(hits) == 1 else None


def parse_intent_nl(utterance: str, graph: CodeGraph) -> Intent | None:
    """Deterministic rule patterns over lowercased text; None when nothing fires."""
    low = utterance.lower()
    words = _WORD.findall(utterance)
    lower_words = [w.lower() for w in words]

    def entity_after(*keywords: str) -> str | None:
        for kw in keywords:
            kw_parts = kw.split()
            for i in range(len(lower_words) - len(kw_parts) + 1):
                if lower_words[i : i + len(kw_parts)] == kw_parts:
                    for tok in words[i + len(kw_parts):]:
                        hit = _resolve_name(tok, graph)
                        if hit is not None:
                            return hit
        return None

    if ("modified" in low or "changed" in low) and "release" in low:
        return Intent(type="filter_changed", window_kind="last_release")

    if any(k in lower_words for k in ("expand", "open", "inside")):
        ent = entity_after("expand", "open", "inside")
        if ent is not None:
            return Intent(type="expand", entity=ent)

    if "collapse" in lower_words:
        ent = entity_after("collapse")
        if ent is not None:
            return Intent(type="collapse", entity=ent)

    if "history of" in low or "summarize" in lower_words:
        ent = entity_after("history of", "summarize")
        if ent is not None:
            return Intent(type="summarize", scope=ent)

    if "co-change" in low or "cochange" in low or "changes with" in low:
        ent = entity_after("co-change", "cochange", "changes with", "of", "for", "with")
        if ent is not None:
            return Intent(type="show_cochange", entity=ent)

    if "compare" in lower_words:
        idx = lower_words.index("compare")
        skip = {"and", "with", "to", "vs", "versus", "against"}
        refs = [w for w in words[idx + 1 :] if w.lower() not in skip]
        if len(refs) >= 2:
            return Intent(type="compare_versions", ref_before=refs[0], ref_after=refs[1])

    if "reset" in lower_words:
        return Intent(type="reset_view")

    return None


# --- spec patches ---------------------------------------------------------

_RECURSE_FIELDS = ("filters", "layout_hints")


@dataclass(frozen=True)
class ViewSpecPatch:
    changed_fields: tuple[tuple[str, object, object], ...]  # (path, old, new)

    def is_empty(self) -> bool:
        return not self.changed_fields

    def to_dict(self) -> dict:
        return {
            "changed_fields": {
                path: {"old": old, "new": new} for path, old, new in self.changed_fields
            }
        }


def diff_viewspec(old: ViewSpec, new: ViewSpec) -> ViewSpecPatch:
    """Minimal field-path patch; applying it to `old` reproduces `new`."""
    if old.schema_version != new.schema_version:
        raise VersionMismatch("view specs have different schema versions")
    od, nd = old.to_dict(), new.to_dict()
    changes: list[tuple[str, object, object]] = []
    for key in sorted(od):
        if key in _RECURSE_FIELDS:
            for sub in sorted(od[key]):
                if od[key][sub] != nd[key][sub]:
                    changes.append((f"{key}.{sub}", od[key][sub], nd[key][sub]))
        elif od[key] != nd[key]:
            changes.append((key, od[key], nd[key]))
    return ViewSpecPatch(tuple(changes))


def apply_viewspec_patch(old: ViewSpec, patch: ViewSpecPatch) -> ViewSpec:
    data = old.to_dict()
    for path, _old, new in patch.changed_fields:
        if "." in path:
            head, sub = path.split(".", 1)
            data[head][sub] = new
        else:
            data[path] = new
    spec, violations = parse_viewspec(data)
    if spec is None:
        raise VersionMismatch(f"patch produced an unparseable spec: {violations}")
    return spec

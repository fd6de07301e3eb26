"""Turns utterances and intents into validated view specs plus narration.

The model-backed path is gated: a proposal must parse strictly and pass the
same validator as every other input. One repair round-trip re-sends the
violations; after that the deterministic rule path takes over. The model
never mutates state directly and facts shown to users are always computed
locally.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .canon import canonical_dumps
from .errors import InvalidAfterRepair, UnparseableUtterance
from .history import HistoryIndex
from .llm import LLMClient
from .model import TYPE_KINDS, CodeGraph, Level, MEMBER_KINDS, ROOT_SCOPE, children, qname_of
from .viewspec import (
    Intent,
    ViewSpec,
    apply_intent,
    parse_intent_nl,
    parse_viewspec,
    validate_viewspec,
)

DIGEST_BYTE_BUDGET = 8192
_CHILD_CAP = 20
_HOT_CAP = 20
_RECENT_STEPS = 5

UTTERANCE_HINT = (
    "Try for example: 'show all modules modified in the last release', "
    "'expand <name>', 'collapse <name>', 'summarize <name>', "
    "'co-change of <name>', 'compare <ref> and <ref>', or 'reset'."
)


@dataclass(frozen=True)
class TraceStep:
    timestamp: int
    actor: str
    intent: Intent
    resulting_viewspec_hash: str

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "actor": self.actor,
            "intent": self.intent.to_dict(),
            "resulting_viewspec_hash": self.resulting_viewspec_hash,
        }


@dataclass
class ExplorationTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def append(self, step: TraceStep):
        if self.steps and step.timestamp < self.steps[-1].timestamp:
            raise ValueError("trace timestamps must be non-decreasing")
        self.steps.append(step)

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps]}

    @staticmethod
    def from_dict(d: dict) -> "ExplorationTrace":
        from .viewspec import intent_from_dict

        trace = ExplorationTrace()
        for sd in d.get("steps", []):
            trace.steps.append(
                TraceStep(
                    timestamp=sd["timestamp"],
                    actor=sd["actor"],
                    intent=intent_from_dict(sd["intent"]),
                    resulting_viewspec_hash=sd["resulting_viewspec_hash"],
                )
            )
        return trace


@dataclass
class ContextDigest:
    current_spec: dict
    scope_children: list  # [(name, kind)], capped
    top_hot: list  # [(name, heat)], capped
    recent_steps: list  # last trace steps as dicts
    release_notice: bool

    def to_json(self) -> str:
        data = {
            "current_spec": self.current_spec,
            "scope_children": [list(x) for x in self.scope_children],
            "top_hot": [list(x) for x in self.top_hot],
            "recent_steps": self.recent_steps,
            "release_notice": self.release_notice,
        }
        return canonical_dumps(data)


@dataclass(frozen=True)
class PlanResult:
    viewspec: ViewSpec
    narration: str
    source: str  # rule | llm | llm_repaired | fallback
    suggestions: tuple[Intent, ...] = ()
    intent: Intent | None = None  # the typed action this plan applied, when one exists

    def to_dict(self) -> dict:
        return {
            "viewspec": self.viewspec.to_dict(),
            "narration": self.narration,
            "source": self.source,
            "suggestions": [s.to_dict() for s in self.suggestions],
        }


def build_context_digest(session, graph: CodeGraph, history: HistoryIndex | None) -> ContextDigest:
    """Deterministic, bounded summary of session state for the proposal prompt.

    `session` is anything with .viewspec and .trace. Lists are truncated until
    the serialization fits the byte budget; fields are never dropped.
    """
    spec: ViewSpec = session.viewspec
    if spec.scope == ROOT_SCOPE:
        child_ids = list(graph.roots)
    else:
        child_ids = children(graph, spec.scope) if graph.has(spec.scope) else []
    scope_children = [
        (graph.entities[c].qualified_name, graph.entities[c].kind.value)
        for c in child_ids[:_CHILD_CAP]
    ]

    top_hot: list = []
    release_notice = False
    if history is not None:
        release_notice = history.release.no_tags
        overlay = history.heat(None)
        ranked = sorted(
            ((eid, v) for eid, v in overlay.values.items() if v > 0),
            key=lambda kv: (-kv[1], qname_of(kv[0])),
        )
        top_hot = [(qname_of(eid), round(v, 4)) for eid, v in ranked[:_HOT_CAP]]

    recent = [s.to_dict() for s in session.trace.steps[-_RECENT_STEPS:]]
    digest = ContextDigest(
        current_spec=spec.to_dict(),
        scope_children=scope_children,
        top_hot=top_hot,
        recent_steps=recent,
        release_notice=release_notice,
    )
    while len(digest.to_json().encode("utf-8")) > DIGEST_BYTE_BUDGET:
        lists = [digest.scope_children, digest.top_hot, digest.recent_steps]
        longest = max(lists, key=len)
        if not longest:
            break
        longest.pop()
    return digest


_SCHEMA_HINT = """\
Respond with exactly one JSON object: a view specification, optionally with an
extra "narration" string field. Fields (all required except narration):
  schema_version: 1
  view_id: string
  diagram_kind: "class" | "package" | "containment_tree"
  scope: entity id or "root"
  level: "Member" | "Type" | "Package" | "RootPackage"
  expanded, collapsed, highlights: lists of entity ids
  filters: {include_globs: [..], exclude_globs: [..], kinds: null|[..],
            min_heat: null|0..1, changed_since: null|"last_release"|{from_ts,to_ts}}
  overlays: subset of ["heat","cochange","diff"]
  overlay_params: object (heat needs "window"; cochange needs "seed";
                  diff needs "ref_before" and "ref_after")
  focus: null | {entity, hops}
  layout_hints: {direction: "TB"|"LR", group_by_package: bool}
  summary_panel: [{text, provenance: "derived"|"llm"}]
  show_annotations: bool
Unknown fields are rejected. Entity ids must come from the digest."""


def llm_propose_viewspec(
    digest: ContextDigest,
    utterance: str,
    client: LLMClient,
    graph: CodeGraph,
    known_refs: set[str] | None = None,
) -> tuple[ViewSpec, str, bool]:
    """One proposal round plus at most one repair round.

    Returns (spec, narration, repaired). Raises LLMUnavailable or
    InvalidAfterRepair; callers fall back to the rule path.
    """
    prompt = (
        "You adjust a code-exploration view to satisfy a request.\n\n"
        + _SCHEMA_HINT
        + "\n\nSession digest:\n"
        + digest.to_json()
        + "\n\nRequest: "
        + utterance
    )
    violations = None
    for attempt in range(2):
        if attempt == 0:
            response = client.complete(prompt)
        else:
            repair = (
                prompt
                + "\n\nYour previous answer was rejected. Violations:\n"
                + canonical_dumps([v.to_dict() for v in violations])
                + "\nReturn a corrected JSON object."
            )
            response = client.complete(repair)
        spec, narration, violations = _parse_proposal(response, graph, known_refs)
        if spec is not None:
            return spec, narration, attempt > 0
    raise InvalidAfterRepair([v.to_dict() for v in violations or []])


def _parse_proposal(response: str, graph, known_refs):
    from .viewspec import Violation

    try:
        data = json.loads(response)
    except json.JSONDecodeError as exc:
        return None, "", [Violation("$", f"invalid JSON: {exc.msg}")]
    narration = ""
    if isinstance(data, dict) and "narration" in data:
        narration = data.pop("narration")
        if not isinstance(narration, str):
            narration = ""
    spec, violations = parse_viewspec(data)
    if spec is None:
        return None, "", violations
    violations = validate_viewspec(spec, graph, known_refs)
    if violations:
        return None, "", violations
    return spec, narration, []


def summarize(
    scope: str,
    graph: CodeGraph,
    history: HistoryIndex | None,
    client: LLMClient | None = None,
) -> tuple[str, str]:
    """Deterministic fact block about a scope; optionally paraphrased.

    Facts (counts, hot spots, coupling) always come from local computation;
    the model only rewords them. Returns (text, provenance tag).
    """
    if scope == ROOT_SCOPE:
        name = "the whole project"
        under = [e.id for e in graph.entities.values() if not e.is_external]
    else:
        ent = graph.entity(scope)
        name = ent.qualified_name
        under = graph.descendants_or_self(scope)
    under_set = set(under)
    type_ids = [i for i in under if graph.entities[i].kind in TYPE_KINDS]
    member_count = sum(1 for i in under if graph.entities[i].kind in MEMBER_KINDS)

    parts = [f"{name}: {len(type_ids)} types, {member_count} members."]
    if history is not None:
        commits: set[str] = set()
        per_type = history.entity_commits(None, None)
        for tid in type_ids:
            commits |= per_type.get(tid, frozenset())
        if commits:
            parts.append(f"{len(commits)} commits touched it.")
        else:
            parts.append("It has no recorded changes.")
        counts = {tid: len(per_type.get(tid, ())) for tid in type_ids}
        from .history import heat_overlay

        overlay = heat_overlay(counts)
        hot = sorted(
            ((tid, v) for tid, v in overlay.values.items() if v > 0),
            key=lambda kv: (-kv[1], qname_of(kv[0])),
        )[:3]
        if hot:
            listed = ", ".join(f"{qname_of(t)} ({v:.2f})" for t, v in hot)
            parts.append(f"Hottest: {listed}.")
        pairs = [
            p for p in history.cochange_pairs() if p.a in under_set and p.b in under_set
        ]
        if pairs:
            p = pairs[0]
            conf = max(p.confidence_a_given_b, p.confidence_b_given_a)
            parts.append(
                f"Strongest co-change: {qname_of(p.a)} and {qname_of(p.b)} "
                f"(support {p.support}, confidence {conf:.2f})."
            )
    facts = " ".join(parts)

    if client is not None:
        try:
            reply = client.complete(
                "Paraphrase this code summary for an engineer. Keep every number "
                "and every name exactly as written:\n" + facts
            )
            if reply.strip():
                return reply.strip(), "llm"
        except Exception:
            pass
    return facts, "derived"


def suggest_next_steps(
    trace: ExplorationTrace,
    spec: ViewSpec,
    graph: CodeGraph,
    history: HistoryIndex | None,
) -> list[Intent]:
    """Up to three ranked follow-up intents, skipping recently used targets."""
    recent_targets: set = set()
    for step in trace.steps[-_RECENT_STEPS:]:
        for f in ("entity", "scope"):
            value = getattr(step.intent, f, None)
            if value:
                recent_targets.add(value)
        if step.intent.type == "compare_versions":
            recent_targets.add((step.intent.ref_before, step.intent.ref_after))

    suggestions: list[Intent] = []

    if history is not None:
        from .abstraction import cut_for_level

        try:
            cut = cut_for_level(
                graph, Level(spec.level), frozenset(spec.expanded), frozenset(spec.collapsed)
            )
            per_type = history.entity_commits(None, None)
            best: tuple[int, str, str] | None = None  # (count, qname, id)
            for member in cut.members:
                if member in spec.expanded or member in recent_targets:
                    continue
                if not children(graph, member):
                    continue
                commits: set[str] = set()
                for desc in graph.descendants_or_self(member):
                    commits |= per_type.get(desc, frozenset())
                if not commits:
                    continue
                key = (-len(commits), graph.entities[member].qualified_name)
                if best is None or key < (best[0], best[1]):
                    best = (key[0], key[1], member)
            if best is not None:
                suggestions.append(Intent(type="expand", entity=best[2]))
        except Exception:
            pass  # suggestions are best-effort; a broken cut yields none

    if history is not None and spec.focus is not None:
        focus_entity = spec.focus[0]
        if focus_entity not in recent_targets and graph.has(focus_entity):
            subtree = {
                d for d in graph.descendants_or_self(focus_entity)
                if graph.entities[d].kind in TYPE_KINDS
            }
            for pair in history.cochange_pairs():
                if pair.a in subtree or pair.b in subtree:
                    suggestions.append(Intent(type="show_cochange", entity=focus_entity))
                    break

    if history is not None:
        tags = history.latest_tags(2)
        if len(tags) == 2 and (tags[1], tags[0]) not in recent_targets:
            suggestions.append(
                Intent(type="compare_versions", ref_before=tags[1], ref_after=tags[0])
            )

    unique: list[Intent] = []
    for s in suggestions:
        if s not in unique:
            unique.append(s)
    return unique[:3]


class Planner:
    """Per-workspace planning front: rule-based with optional model backing."""

    def __init__(self, mode: str = "off", client: LLMClient | None = None):
        self.mode = mode
        self.client = client

    def plan(
        self,
        utterance_or_intent,
        session,
        graph: CodeGraph,
        history: HistoryIndex | None,
        known_refs: set[str] | None = None,
    ) -> PlanResult:
        """Produce a validated spec, narration, provenance and suggestions.

        Text input goes to the model when enabled, with validate-repair and a
        deterministic fallback; structured intents never touch the model.
        """
        spec: ViewSpec = session.viewspec
        if isinstance(utterance_or_intent, Intent):
            intent = utterance_or_intent
            new_spec, narration = self._apply(spec, intent, graph, history)
            return self._finish(new_spec, narration, "rule", session, graph, history, intent)

        utterance = str(utterance_or_intent)
        if self.mode in ("mock", "live") and self.client is not None:
            digest = build_context_digest(session, graph, history)
            try:
                new_spec, narration, repaired = llm_propose_viewspec(
                    digest, utterance, self.client, graph, known_refs
                )
                if not narration:
                    narration = "View updated."
                source = "llm_repaired" if repaired else "llm"
                # best-effort typing of the step for the trace
                typed = parse_intent_nl(utterance, graph)
                return self._finish(new_spec, narration, source, session, graph, history, typed)
            except Exception:
                intent = parse_intent_nl(utterance, graph)
                if intent is None:
                    raise UnparseableUtterance(utterance, UTTERANCE_HINT) from None
                new_spec, narration = self._apply(spec, intent, graph, history)
                return self._finish(
                    new_spec, narration, "fallback", session, graph, history, intent
                )

        intent = parse_intent_nl(utterance, graph)
        if intent is None:
            raise UnparseableUtterance(utterance, UTTERANCE_HINT)
        new_spec, narration = self._apply(spec, intent, graph, history)
        return self._finish(new_spec, narration, "rule", session, graph, history, intent)

    def _apply(self, spec, intent, graph, history) -> tuple[ViewSpec, str]:
        new_spec = apply_intent(spec, intent, graph)
        if intent.type == "summarize":
            text, tag = summarize(
                intent.scope, graph, history,
                self.client if self.mode in ("mock", "live") else None,
            )
            new_spec = replace(new_spec, summary_panel=new_spec.summary_panel + ((text, tag),))
            return new_spec, text
        return new_spec, self._narrate(intent, graph)

    def _finish(self, spec, narration, source, session, graph, history, intent=None) -> PlanResult:
        suggestions = suggest_next_steps(session.trace, spec, graph, history)
        return PlanResult(
            viewspec=spec,
            narration=narration,
            source=source,
            suggestions=tuple(suggestions),
            intent=intent,
        )

    def _narrate(self, intent: Intent, graph: CodeGraph) -> str:
        def name(eid):
            return graph.entities[eid].qualified_name if eid and graph.has(eid) else eid

        t = intent.type
        if t == "expand":
            return f"Expanded {name(intent.entity)}."
        if t == "collapse":
            return f"Collapsed {name(intent.entity)}."
        if t == "focus":
            return f"Focused on {name(intent.entity)} within {intent.hops or 0} hops."
        if t == "set_level":
            return f"Switched to {intent.level} level."
        if t == "filter_changed":
            return "Showing entities modified in the last release, with change heat."
        if t == "overlay_heat":
            return "Change-frequency heat overlay enabled."
        if t == "show_cochange":
            return f"Showing co-change partners of {name(intent.entity)}."
        if t == "compare_versions":
            return f"Comparing {intent.ref_before} against {intent.ref_after}."
        if t == "annotate":
            return f"Noted annotation on {name(intent.entity)}."
        if t == "reset_view":
            return "View reset to the project overview."
        if t == "export_view":
            return f"Exported the current view as {intent.format}."
        return "View updated."

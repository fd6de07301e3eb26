"""Structural reduction: hierarchy cuts, edge lifting, filters, and exports.

A cut is an antichain-ish set of hierarchy nodes covering every type; a view
is the base graph projected onto cut representatives with multiplicities
summed. Self-loops created by lifting are folded into per-node internal
counts, so total multiplicity is conserved.
"""
from __future__ import annotations

import fnmatch
import re
from dataclasses import dataclass, field

from .canon import canonical_dumps
from .errors import BadGlob, InvalidCut, InvalidExpansion, MissingCompareRef, NotFound, TooLarge
from .model import (
    TYPE_KINDS,
    CodeGraph,
    EntityKind,
    Level,
    RelationKind,
    ancestor_at_level,
    children,
    diff_graphs,
)

EXPORT_NODE_LIMIT = 500


@dataclass(frozen=True)
class Cut:
    members: frozenset[str]

    def __contains__(self, eid: str) -> bool:
        return eid in self.members

    def sorted_members(self, graph: CodeGraph) -> list[str]:
        return sorted(self.members, key=lambda i: graph._sort_key(i))


@dataclass(frozen=True)
class ViewNode:
    id: str
    kind: EntityKind
    label: str
    metrics: tuple[tuple[str, float], ...] = ()
    badge: str | None = None  # added | removed | changed

    def metric(self, name: str, default: float = 0.0) -> float:
        for k, v in self.metrics:
            if k == name:
                return v
        return default

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "label": self.label,
            "metrics": {k: v for k, v in self.metrics},
            "badge": self.badge,
        }


@dataclass(frozen=True)
class ViewEdge:
    source: str
    target: str
    kind: RelationKind
    multiplicity: int

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "kind": self.kind.value,
            "multiplicity": self.multiplicity,
        }


@dataclass(frozen=True)
class ViewGraph:
    nodes: tuple[ViewNode, ...]
    edges: tuple[ViewEdge, ...]
    internal_counts: tuple[tuple[str, int], ...] = ()
    provenance: str = ""

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def find(self, eid: str) -> ViewNode | None:
        for n in self.nodes:
            if n.id == eid:
                return n
        return None

    def to_dict(self) -> dict:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "edges": [e.to_dict() for e in self.edges],
            "internal_counts": {k: v for k, v in self.internal_counts},
            "provenance": self.provenance,
        }

    @staticmethod
    def from_dict(d: dict) -> "ViewGraph":
        nodes = tuple(
            ViewNode(
                id=nd["id"],
                kind=EntityKind(nd["kind"]),
                label=nd["label"],
                metrics=tuple(sorted(nd.get("metrics", {}).items())),
                badge=nd.get("badge"),
            )
            for nd in d["nodes"]
        )
        edges = tuple(
            ViewEdge(ed["source"], ed["target"], RelationKind(ed["kind"]), ed["multiplicity"])
            for ed in d["edges"]
        )
        return ViewGraph(
            nodes=nodes,
            edges=edges,
            internal_counts=tuple(sorted(d.get("internal_counts", {}).items())),
            provenance=d.get("provenance", ""),
        )


@dataclass
class FilterSpec:
    """Filter settings as the abstraction layer consumes them."""

    include_globs: list[str] = field(default_factory=list)
    exclude_globs: list[str] = field(default_factory=list)
    kinds: list[str] | None = None
    min_heat: float | None = None
    changed_since: object = None  # "last_release" | (from_ts, to_ts) | None


# --- cuts ---------------------------------------------------------------


def representative(graph: CodeGraph, cut: Cut, eid: str) -> str:
    """Nearest ancestor-or-self in the cut; externals represent themselves."""
    ent = graph.entity(eid)
    if ent.kind is EntityKind.EXTERNAL_TYPE:
        return eid
    for cur in graph.ancestors_or_self(eid):
        if cur in cut.members:
            return cur
    raise InvalidCut(eid)


def validate_cut(graph: CodeGraph, cut: Cut) -> list[str]:
    """Empty iff every type has a representative and all members exist."""
    problems = []
    for m in cut.members:
        if not graph.has(m):
            problems.append(f"cut member missing from graph: {m}")
    for tid in graph.type_ids():
        if graph.entities[tid].is_external:
            continue
        try:
            representative(graph, cut, tid)
        except InvalidCut:
            problems.append(f"type not covered by cut: {tid}")
    return problems


def uniform_cut(graph: CodeGraph, level: Level) -> Cut:
    members: set[str] = set()
    if level is Level.MEMBER:
        for ent in graph.entities.values():
            if ent.is_external:
                continue
            if ent.kind in TYPE_KINDS or ent.kind in (EntityKind.METHOD, EntityKind.FIELD):
                members.add(ent.id)
        return Cut(frozenset(members))
    for tid in graph.type_ids():
        ent = graph.entities[tid]
        if ent.is_external:
            continue
        if level is Level.TYPE:
            # outermost enclosing type
            rep = tid
            for cur in graph.ancestors_or_self(tid):
                if graph.entities[cur].kind in TYPE_KINDS:
                    rep = cur
            members.add(rep)
        else:
            members.add(ancestor_at_level(graph, tid, level))
    return Cut(frozenset(members))


def cut_for_level(
    graph: CodeGraph,
    level: Level,
    expanded: frozenset[str] | set[str] = frozenset(),
    collapsed: frozenset[str] | set[str] = frozenset(),
) -> Cut:
    """Uniform cut at `level`, refined by expansions and collapses.

    Expanding a package swaps it for its children; expanding a type keeps the
    type and adds its children (the type itself must stay covered). Collapsing
    replaces any cut descendants with the collapsed node.
    """
    for eid in sorted(expanded) + sorted(collapsed):
        graph.entity(eid)
    for eid in expanded:
        if not children(graph, eid):
            raise InvalidExpansion(eid)

    members = set(uniform_cut(graph, level).members)

    pending = True
    while pending:
        pending = False
        for eid in sorted(expanded):
            if eid in members:
                kids = children(graph, eid)
                if graph.entities[eid].kind is EntityKind.PACKAGE:
                    members.discard(eid)
                    members.update(kids)
                    pending = True
                else:
                    added = [k for k in kids if k not in members]
                    if added:
                        members.update(added)
                        pending = True

    for eid in sorted(collapsed):
        descendants = set(graph.descendants_or_self(eid)) - {eid}
        inside = members & descendants
        if inside:
            members -= inside
            members.add(eid)

    cut = Cut(frozenset(members))
    problems = validate_cut(graph, cut)
    if problems:
        raise InvalidCut(problems[0])
    return cut


# --- lifting ------------------------------------------------------------


def lift_edges(graph: CodeGraph, cut: Cut, provenance: str = "") -> ViewGraph:
    """Project base relations onto cut representatives.

    Parallel lifted edges of one kind sum multiplicities; edges whose endpoints
    meet fold into internal_counts. Conservation holds: lifted multiplicities
    plus internal counts equal the base total.
    """
    rep_cache: dict[str, str] = {}

    def rep(eid: str) -> str:
        got = rep_cache.get(eid)
        if got is None:
            got = representative(graph, cut, eid)
            rep_cache[eid] = got
        return got

    edge_mult: dict[tuple[str, str, RelationKind], int] = {}
    internal: dict[str, int] = {}
    external_nodes: set[str] = set()
    for relation in graph.relations:
        rs, rt = rep(relation.source), rep(relation.target)
        if rs == rt:
            internal[rs] = internal.get(rs, 0) + relation.multiplicity
            continue
        for end in (rs, rt):
            if graph.entities[end].is_external:
                external_nodes.add(end)
        key = (rs, rt, relation.kind)
        edge_mult[key] = edge_mult.get(key, 0) + relation.multiplicity

    node_ids = set(cut.members) | external_nodes
    nodes = tuple(
        ViewNode(
            id=eid,
            kind=graph.entities[eid].kind,
            label=graph.entities[eid].qualified_name,
        )
        for eid in sorted(node_ids, key=lambda i: graph._sort_key(i))
    )
    edges = tuple(
        ViewEdge(s, t, k, m)
        for (s, t, k), m in sorted(edge_mult.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value))
    )
    return ViewGraph(
        nodes=nodes,
        edges=edges,
        internal_counts=tuple(sorted(internal.items())),
        provenance=provenance,
    )


def _induced(view: ViewGraph, keep: set[str]) -> ViewGraph:
    nodes = tuple(n for n in view.nodes if n.id in keep)
    edges = tuple(e for e in view.edges if e.source in keep and e.target in keep)
    internal = tuple((k, v) for k, v in view.internal_counts if k in keep)
    return ViewGraph(nodes, edges, internal, view.provenance)


def focus_neighborhood(view: ViewGraph, focus: str, hops: int) -> ViewGraph:
    """Subgraph induced by nodes within `hops` undirected hops of focus."""
    if hops < 0:
        raise ValueError("hops must be >= 0")
    if view.find(focus) is None:
        raise NotFound(focus)
    adjacency: dict[str, set[str]] = {}
    for e in view.edges:
        adjacency.setdefault(e.source, set()).add(e.target)
        adjacency.setdefault(e.target, set()).add(e.source)
    frontier = {focus}
    reached = {focus}
    for _ in range(hops):
        frontier = {n for cur in frontier for n in adjacency.get(cur, ()) if n not in reached}
        if not frontier:
            break
        reached |= frontier
    return _induced(view, reached)


# --- filters --------------------------------------------------------------


def _glob_matches(label: str, pattern: str) -> bool:
    if not isinstance(pattern, str) or not pattern:
        raise BadGlob(pattern)
    try:
        regex = re.compile(fnmatch.translate(pattern))
    except re.error:
        raise BadGlob(pattern) from None
    if regex.match(label):
        return True
    # subtree patterns also keep the subtree root itself: "a.*" matches "a"
    return pattern.endswith(".*") and label == pattern[:-2]


def apply_filters(view: ViewGraph, filters: FilterSpec) -> ViewGraph:
    """Name, kind, heat and change filters. Conservation does not survive
    filtering: dropped nodes take their edges and internal counts with them.
    """
    keep: set[str] = set()
    for node in view.nodes:
        if filters.include_globs:
            if not any(_glob_matches(node.label, g) for g in filters.include_globs):
                continue
        if filters.exclude_globs:
            if any(_glob_matches(node.label, g) for g in filters.exclude_globs):
                continue
        if filters.kinds is not None and node.kind.value not in filters.kinds:
            continue
        if filters.min_heat is not None and node.metric("heat") < filters.min_heat:
            continue
        if filters.changed_since is not None:
            # requires overlays to have run: recently changed means nonzero
            # heat in the window, or a diff badge
            if node.metric("heat") <= 0.0 and node.badge not in ("added", "changed"):
                continue
        keep.add(node.id)
    return _induced(view, keep)


# --- exports ----------------------------------------------------------------

_ARROWS = {
    RelationKind.ASSOCIATION: "-->",
    RelationKind.DEPENDENCY: "..>",
}
_KEYWORD = {
    EntityKind.CLASS: "class",
    EntityKind.INTERFACE: "interface",
    EntityKind.ENUM: "enum",
    EntityKind.EXTERNAL_TYPE: "class",
}


def export_plantuml(view: ViewGraph, limit: int = EXPORT_NODE_LIMIT) -> str:
    """Deterministic PlantUML class-diagram text for a view."""
    if len(view.nodes) > limit:
        raise TooLarge(len(view.nodes), limit)

    type_labels = [n.label for n in view.nodes if n.kind in TYPE_KINDS or n.kind is EntityKind.EXTERNAL_TYPE]

    def owner_of(member_label: str) -> str | None:
        best = None
        for t in type_labels:
            if member_label.startswith(t + ".") and (best is None or len(t) > len(best)):
                best = t
        return best

    member_lines: dict[str, list[str]] = {}
    loose_members: list[ViewNode] = []
    for node in view.nodes:
        if node.kind in (EntityKind.METHOD, EntityKind.FIELD):
            owner = owner_of(node.label)
            if owner is None:
                loose_members.append(node)
                continue
            simple = node.label[len(owner) + 1 :]
            marker = "{method}" if node.kind is EntityKind.METHOD else "{field}"
            member_lines.setdefault(owner, []).append(f"  {marker} {simple}")

    lines = ["@startuml"]
    for node in view.nodes:
        badge = f" <<{node.badge}>>" if node.badge else ""
        if node.kind is EntityKind.PACKAGE:
            lines.append(f'package "{node.label}"{badge} {{')
            lines.append("}")
        elif node.kind in _KEYWORD:
            stereo = " <<external>>" if node.kind is EntityKind.EXTERNAL_TYPE else badge
            inner = member_lines.get(node.label)
            head = f'{_KEYWORD[node.kind]} "{node.label}"{stereo}'
            if inner:
                lines.append(head + " {")
                lines.extend(sorted(inner))
                lines.append("}")
            else:
                lines.append(head)
    for node in loose_members:
        marker = "method" if node.kind is EntityKind.METHOD else "field"
        lines.append(f'class "{node.label}" <<{marker}>>')

    label_of = {n.id: n.label for n in view.nodes}
    for edge in view.edges:
        s, t = label_of[edge.source], label_of[edge.target]
        mult = f" : x{edge.multiplicity}" if edge.multiplicity > 1 else ""
        if edge.kind is RelationKind.EXTENDS:
            lines.append(f'"{t}" <|-- "{s}"{mult}')
        elif edge.kind is RelationKind.IMPLEMENTS:
            lines.append(f'"{t}" <|.. "{s}"{mult}')
        else:
            lines.append(f'"{s}" {_ARROWS[edge.kind]} "{t}"{mult}')
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


def export_json(view: ViewGraph) -> str:
    """Canonical JSON of the view: sorted keys, stable across runs."""
    return canonical_dumps(view.to_dict())


def viewgraph_from_json(text: str) -> ViewGraph:
    import json

    return ViewGraph.from_dict(json.loads(text))


# --- the materialization pipeline -------------------------------------------


def materialize(graph: CodeGraph, spec, history=None, compare_graphs=None) -> ViewGraph:
    """cut -> lift -> scope -> overlays -> filters -> focus.

    `spec` is a view specification (see the view protocol); `history` an
    optional HistoryIndex; `compare_graphs` a ref->CodeGraph map for diff
    badges.
    """
    from .viewspec import viewspec_hash  # local import: protocol sits above this layer

    cut = cut_for_level(
        graph, Level(spec.level), frozenset(spec.expanded), frozenset(spec.collapsed)
    )
    view = lift_edges(graph, cut, provenance=viewspec_hash(spec))

    if spec.scope and spec.scope != "root":
        graph.entity(spec.scope)
        in_scope = {
            n.id
            for n in view.nodes
            if not graph.entities[n.id].is_external
            and spec.scope in set(graph.ancestors_or_self(n.id))
        }
        adjacent_ext = {
            end
            for e in view.edges
            for end in (e.source, e.target)
            if (e.source in in_scope or e.target in in_scope)
            and graph.entities[end].is_external
        }
        view = _induced(view, in_scope | adjacent_ext)

    overlays = set(spec.overlays)
    params = dict(spec.overlay_params)

    node_metrics: dict[str, dict[str, float]] = {n.id: {} for n in view.nodes}
    node_badges: dict[str, str | None] = {n.id: None for n in view.nodes}

    if "heat" in overlays and history is not None:
        window = params.get("window")
        if window is None and spec.filters.changed_since is not None:
            window = spec.filters.changed_since
        from_ts, to_ts = history.resolve_window(window)
        per_type = history.entity_commits(from_ts, to_ts)
        counts: dict[str, int] = {}
        for node in view.nodes:
            if graph.entities[node.id].is_external:
                continue
            commits: set[str] = set()
            for desc in graph.descendants_or_self(node.id):
                commits |= per_type.get(desc, frozenset())
            counts[node.id] = len(commits)
        from .history import heat_overlay

        overlay = heat_overlay(counts, window=(from_ts, to_ts))
        for nid, value in overlay.values.items():
            node_metrics[nid]["heat"] = value

    if "diff" in overlays:
        ref = params.get("ref_before")
        if compare_graphs is None or ref not in compare_graphs:
            raise MissingCompareRef(str(ref))
        after_ref = params.get("ref_after")
        after_graph = graph
        if after_ref and compare_graphs and after_ref in compare_graphs:
            after_graph = compare_graphs[after_ref]
        delta = diff_graphs(compare_graphs[ref], after_graph)
        touched = delta.added | delta.removed | delta.changed
        for node in view.nodes:
            qname = graph.entities[node.id].qualified_name
            if qname in delta.added:
                node_badges[node.id] = "added"
            elif qname in delta.changed:
                node_badges[node.id] = "changed"
            elif any(t.startswith(qname + ".") for t in touched):
                node_badges[node.id] = "changed"

    if "cochange" in overlays and history is not None:
        seed = params.get("seed")
        if seed and graph.has(seed):
            seed_types = {
                d for d in graph.descendants_or_self(seed)
                if graph.entities[d].kind in TYPE_KINDS
            }
            pairs = history.cochange_pairs()
            for node in view.nodes:
                if graph.entities[node.id].is_external:
                    continue
                node_types = {
                    d for d in graph.descendants_or_self(node.id)
                    if graph.entities[d].kind in TYPE_KINDS
                }
                best = 0.0
                for pair in pairs:
                    ends = {pair.a, pair.b}
                    if ends & seed_types and ends & node_types and not ends <= seed_types:
                        best = max(best, pair.confidence_a_given_b, pair.confidence_b_given_a)
                if best > 0:
                    node_metrics[node.id]["cochange"] = best

    view = ViewGraph(
        nodes=tuple(
            ViewNode(
                id=n.id,
                kind=n.kind,
                label=n.label,
                metrics=tuple(sorted(node_metrics.get(n.id, {}).items())),
                badge=node_badges.get(n.id),
            )
            for n in view.nodes
        ),
        edges=view.edges,
        internal_counts=view.internal_counts,
        provenance=view.provenance,
    )

    filt = FilterSpec(
        include_globs=list(spec.filters.include_globs),
        exclude_globs=list(spec.filters.exclude_globs),
        kinds=list(spec.filters.kinds) if spec.filters.kinds is not None else None,
        min_heat=spec.filters.min_heat,
        changed_since=spec.filters.changed_since,
    )
    view = apply_filters(view, filt)

    if spec.focus is not None:
        focus_entity, hops = spec.focus
        target = None
        if graph.has(focus_entity):
            node_ids = set(view.node_ids())
            for cur in graph.ancestors_or_self(focus_entity):
                if cur in node_ids:
                    target = cur
                    break
        if target is not None:
            view = focus_neighborhood(view, target, hops)

    return view

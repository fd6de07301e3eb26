import json
import random

import pytest

from codescope.abstraction import (
    Cut,
    FilterSpec,
    ViewGraph,
    apply_filters,
    cut_for_level,
    export_json,
    export_plantuml,
    focus_neighborhood,
    lift_edges,
    materialize,
    representative,
    uniform_cut,
    validate_cut,
    viewgraph_from_json,
)
from codescope.errors import BadGlob, InvalidExpansion, NotFound, TooLarge
from codescope.java_parser import parse_unit
from codescope.model import EntityKind, Level, build_graph, children, entity_id
from codescope.resolver import resolve_types
from codescope.viewspec import default_viewspec

from conftest import GOLDEN
from graphgen import random_cut_inputs, random_graph


def graph_from_sources(sources, module_depth=1):
    units = [parse_unit(text, path) for path, text in sources.items()]
    return build_graph(resolve_types(units), module_depth=module_depth)


NESTED_PKG_SOURCES = {
    "a/TopOne.java": "package a; class TopOne { }",
    "a/b/Deep.java": "package a.b; class Deep { }",
    "a/b/Deeper.java": "package a.b; class Deeper extends Deep { }",
}


def test_uniform_package_cut_contains_nested_packages():
    # both a and a.b directly contain types, so both sit in the cut
    graph = graph_from_sources(NESTED_PKG_SOURCES)
    cut = cut_for_level(graph, Level.PACKAGE)
    assert cut.members == {
        entity_id("a", EntityKind.PACKAGE),
        entity_id("a.b", EntityKind.PACKAGE),
    }
    assert validate_cut(graph, cut) == []
    # each type's representative is its directly containing package
    top = entity_id("a.TopOne", EntityKind.CLASS)
    deep = entity_id("a.b.Deep", EntityKind.CLASS)
    assert representative(graph, cut, top) == entity_id("a", EntityKind.PACKAGE)
    assert representative(graph, cut, deep) == entity_id("a.b", EntityKind.PACKAGE)


def test_expand_package_replaces_it_with_children(fixture_graph):
    pkg = entity_id("shop.catalog", EntityKind.PACKAGE)
    cut = cut_for_level(fixture_graph, Level.PACKAGE, expanded={pkg})
    assert pkg not in cut.members
    for kid in children(fixture_graph, pkg):
        assert kid in cut.members
    assert validate_cut(fixture_graph, cut) == []


def test_expand_type_keeps_type_in_cut(fixture_graph):
    clazz = entity_id("shop.orders.Order", EntityKind.CLASS)
    pkg = entity_id("shop.orders", EntityKind.PACKAGE)
    cut = cut_for_level(fixture_graph, Level.PACKAGE, expanded={pkg, clazz})
    assert clazz in cut.members  # the type must stay covered
    for kid in children(fixture_graph, clazz):
        assert kid in cut.members
    assert validate_cut(fixture_graph, cut) == []


def test_expand_leaf_rejected(fixture_graph):
    leaf = entity_id("shop.orders.Order.total", EntityKind.METHOD)
    with pytest.raises(InvalidExpansion):
        cut_for_level(fixture_graph, Level.PACKAGE, expanded={leaf})


def test_collapse_pulls_descendants_up(fixture_graph):
    pkg = entity_id("shop.orders", EntityKind.PACKAGE)
    cut = cut_for_level(fixture_graph, Level.TYPE, collapsed={pkg})
    assert pkg in cut.members
    assert not any(
        m != pkg and pkg in set(fixture_graph.ancestors_or_self(m))
        for m in cut.members
    )
    assert validate_cut(fixture_graph, cut) == []


def test_member_level_cut_covers_types_and_members(fixture_graph):
    cut = cut_for_level(fixture_graph, Level.MEMBER)
    assert validate_cut(fixture_graph, cut) == []
    method = entity_id("shop.orders.Order.total", EntityKind.METHOD)
    assert method in cut.members


def _brute_force_lift(graph, cut):
    """Independent oracle: group base relations by walked-up representatives."""
    def rep(eid):
        ent = graph.entities[eid]
        if ent.is_external:
            return eid
        cur = eid
        while cur is not None:
            if cur in cut.members:
                return cur
            cur = graph.entities[cur].parent
        raise AssertionError(f"no representative for {eid}")

    edges = {}
    internal = {}
    for rel in graph.relations:
        rs, rt = rep(rel.source), rep(rel.target)
        if rs == rt:
            internal[rs] = internal.get(rs, 0) + rel.multiplicity
        else:
            key = (rs, rt, rel.kind)
            edges[key] = edges.get(key, 0) + rel.multiplicity
    return edges, internal


def test_lift_single_class_no_relations():
    graph = graph_from_sources({"p/A.java": "package p; class A { }"})
    cut = cut_for_level(graph, Level.TYPE)
    view = lift_edges(graph, cut)
    assert len(view.nodes) == 1
    assert view.edges == ()
    assert view.internal_counts == ()


def test_lift_groups_parallel_edges():
    graph = graph_from_sources(
        {
            "a/A.java": "package a; import b.B; class A { void m(B x, B y) { } }",
            "a/C.java": "package a; import b.B; class C { void m(B x) { } }",
            "b/B.java": "package b; class B { }",
        }
    )
    cut = cut_for_level(graph, Level.PACKAGE)
    view = lift_edges(graph, cut)
    dep_edges = [e for e in view.edges if e.kind.value == "Dependency"]
    assert len(dep_edges) == 1
    assert dep_edges[0].multiplicity == 3
    assert dep_edges[0].source == entity_id("a", EntityKind.PACKAGE)
    assert dep_edges[0].target == entity_id("b", EntityKind.PACKAGE)


def test_lift_self_loop_becomes_internal_count():
    graph = graph_from_sources(
        {"a/A.java": "package a; class A { C c; } class C { }"}
    )
    cut = cut_for_level(graph, Level.PACKAGE)
    view = lift_edges(graph, cut)
    assert view.edges == ()
    assert dict(view.internal_counts) == {entity_id("a", EntityKind.PACKAGE): 1}


def test_lift_conservation_random_graphs():
    rng = random.Random(2024)
    for _ in range(40):
        graph = random_graph(rng, max_entities=80, max_relations=120)
        level, expanded, collapsed = random_cut_inputs(rng, graph)
        cut = cut_for_level(graph, level, expanded, collapsed)
        assert validate_cut(graph, cut) == []
        view = lift_edges(graph, cut)
        base_total = sum(r.multiplicity for r in graph.relations)
        lifted_total = sum(e.multiplicity for e in view.edges)
        internal_total = sum(v for _, v in view.internal_counts)
        assert lifted_total + internal_total == base_total
        oracle_edges, oracle_internal = _brute_force_lift(graph, cut)
        got_edges = {(e.source, e.target, e.kind): e.multiplicity for e in view.edges}
        assert got_edges == oracle_edges
        assert dict(view.internal_counts) == oracle_internal


def test_projection_consistency(fixture_graph):
    cut = cut_for_level(fixture_graph, Level.PACKAGE)
    view = lift_edges(fixture_graph, cut)
    for edge in view.edges:
        witnesses = [
            r for r in fixture_graph.relations
            if r.kind is edge.kind
            and representative(fixture_graph, cut, r.source) == edge.source
            and representative(fixture_graph, cut, r.target) == edge.target
        ]
        assert witnesses, f"lifted edge without base witness: {edge}"


def test_monotone_drilldown(fixture_graph):
    pkg = entity_id("shop.billing", EntityKind.PACKAGE)
    before = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.PACKAGE))
    after = lift_edges(
        fixture_graph, cut_for_level(fixture_graph, Level.PACKAGE, expanded={pkg})
    )
    subtree = set(fixture_graph.descendants_or_self(pkg))

    def unrelated(view):
        return {
            (e.source, e.target, e.kind, e.multiplicity)
            for e in view.edges
            if e.source not in subtree | {pkg} and e.target not in subtree | {pkg}
        }

    assert unrelated(before) == unrelated(after)


def test_focus_zero_hops(fixture_graph):
    view = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.TYPE))
    focus = entity_id("shop.orders.Order", EntityKind.CLASS)
    got = focus_neighborhood(view, focus, 0)
    assert got.node_ids() == [focus]
    assert got.edges == ()


def test_focus_path_one_hop():
    graph = graph_from_sources(
        {
            "p/X.java": "package p; class X { Y y; }",
            "p/Y.java": "package p; class Y { Z z; }",
            "p/Z.java": "package p; class Z { }",
        }
    )
    view = lift_edges(graph, cut_for_level(graph, Level.TYPE))
    got = focus_neighborhood(view, entity_id("p.Y", EntityKind.CLASS), 1)
    assert set(got.node_ids()) == {
        entity_id("p.X", EntityKind.CLASS),
        entity_id("p.Y", EntityKind.CLASS),
        entity_id("p.Z", EntityKind.CLASS),
    }


def test_focus_matches_bfs_oracle(fixture_graph):
    view = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.TYPE))
    focus = entity_id("shop.orders.Order", EntityKind.CLASS)
    for hops in range(4):
        got = set(focus_neighborhood(view, focus, hops).node_ids())
        # breadth-first search oracle over the undirected edge set
        adj = {}
        for e in view.edges:
            adj.setdefault(e.source, set()).add(e.target)
            adj.setdefault(e.target, set()).add(e.source)
        frontier, reached = {focus}, {focus}
        for _ in range(hops):
            frontier = {n for c in frontier for n in adj.get(c, ()) if n not in reached}
            reached |= frontier
        assert got == reached
    with pytest.raises(NotFound):
        focus_neighborhood(view, "class:ghost.G", 1)


def test_filters_identity(fixture_graph):
    view = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.PACKAGE))
    assert apply_filters(view, FilterSpec()) == view


def test_filter_min_heat():
    nodes = lift_edges(
        graph_from_sources({"a/A.java": "package a; class A { } class B { }"}),
        Cut(frozenset({entity_id("a.A", EntityKind.CLASS), entity_id("a.B", EntityKind.CLASS)})),
    )
    from codescope.abstraction import ViewNode

    heated = ViewGraph(
        nodes=tuple(
            ViewNode(n.id, n.kind, n.label, (("heat", 1.0 if "A" in n.label else 0.5),))
            for n in nodes.nodes
        ),
        edges=nodes.edges,
        internal_counts=nodes.internal_counts,
    )
    got = apply_filters(heated, FilterSpec(min_heat=0.6))
    assert [n.label for n in got.nodes] == ["a.A"]


def test_filter_globs(fixture_graph):
    view = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.PACKAGE))
    got = apply_filters(view, FilterSpec(include_globs=["shop.orders.*"]))
    assert [n.label for n in got.nodes] == ["shop.orders"]
    got = apply_filters(view, FilterSpec(exclude_globs=["shop.*", "java.*"]))
    assert got.nodes == ()
    with pytest.raises(BadGlob):
        apply_filters(view, FilterSpec(include_globs=[""]))


def test_filter_kinds(fixture_graph):
    view = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.TYPE))
    got = apply_filters(view, FilterSpec(kinds=["Interface"]))
    assert {n.kind for n in got.nodes} == {EntityKind.INTERFACE}


def test_export_plantuml_empty():
    assert export_plantuml(ViewGraph(nodes=(), edges=())) == "@startuml\n@enduml\n"


def test_export_plantuml_extends_arrow():
    graph = graph_from_sources(
        {"x/A.java": "package x; class A extends B { } class B { }"}
    )
    view = lift_edges(graph, cut_for_level(graph, Level.TYPE))
    text = export_plantuml(view)
    assert '"x.B" <|-- "x.A"' in text


def test_export_plantuml_golden(fixture_graph):
    spec = default_viewspec(fixture_graph)
    view = materialize(fixture_graph, spec)
    golden = (GOLDEN / "package_view.puml").read_text()
    assert export_plantuml(view) == golden


def test_export_too_large():
    rng = random.Random(5)
    graph = random_graph(rng, max_entities=60, max_relations=10)
    view = lift_edges(graph, uniform_cut(graph, Level.MEMBER))
    with pytest.raises(TooLarge):
        export_plantuml(view, limit=2)


def test_export_json_empty():
    got = export_json(ViewGraph(nodes=(), edges=(), provenance="x"))
    assert got == '{"edges":[],"internal_counts":{},"nodes":[],"provenance":"x"}'


def test_export_json_round_trip(fixture_graph):
    view = lift_edges(fixture_graph, cut_for_level(fixture_graph, Level.PACKAGE), "prov")
    text = export_json(view)
    assert viewgraph_from_json(text) == view
    assert export_json(viewgraph_from_json(text)) == text
    assert json.loads(text)["provenance"] == "prov"


def test_materialize_deterministic(fixture_graph, history_index):
    from codescope.viewspec import Intent, apply_intent

    spec = default_viewspec(fixture_graph)
    spec = apply_intent(spec, Intent(type="filter_changed", window_kind="last_release"), fixture_graph)
    one = export_json(materialize(fixture_graph, spec, history=history_index))
    two = export_json(materialize(fixture_graph, spec, history=history_index))
    assert one == two


def test_default_package_type_is_its_own_representative():
    graph = graph_from_sources({"Lone.java": "class Lone { Helper h; }"})
    cut = cut_for_level(graph, Level.PACKAGE)
    lone = entity_id("Lone", EntityKind.CLASS)
    assert lone in cut.members
    assert representative(graph, cut, lone) == lone
    view = lift_edges(graph, cut)
    assert lone in view.node_ids()


def test_export_plantuml_member_blocks(fixture_graph):
    clazz = entity_id("shop.common.Money", EntityKind.CLASS)
    cut = cut_for_level(fixture_graph, Level.TYPE, expanded={clazz})
    text = export_plantuml(lift_edges(fixture_graph, cut))
    assert 'class "shop.common.Money" {' in text
    assert "  {field} currency" in text
    assert "  {method} plus" in text


def test_materialize_focus_restricts_neighborhood(fixture_graph):
    from dataclasses import replace

    spec = default_viewspec(fixture_graph)
    spec = replace(
        spec,
        level="Type",
        focus=(entity_id("shop.orders.Validator", EntityKind.CLASS), 1),
    )
    view = materialize(fixture_graph, spec)
    labels = {n.label for n in view.nodes}
    # undirected hops: Validator's dependencies plus OrderService pointing at it
    assert labels == {
        "shop.orders.Validator", "shop.orders.Order", "shop.common.Result",
        "shop.orders.OrderService",
    }


def test_materialize_focus_skipped_when_filtered_out(fixture_graph):
    from dataclasses import replace
    from codescope.viewspec import FilterSet

    spec = default_viewspec(fixture_graph)
    spec = replace(
        spec,
        level="Type",
        filters=FilterSet(include_globs=["shop.billing.*"]),
        focus=(entity_id("shop.orders.Validator", EntityKind.CLASS), 1),
    )
    view = materialize(fixture_graph, spec)
    assert all(n.label.startswith("shop.billing") for n in view.nodes)


def test_changed_since_filter_direct(fixture_graph, history_index):
    from dataclasses import replace
    from codescope.viewspec import FilterSet, Intent, apply_intent

    spec = apply_intent(
        default_viewspec(fixture_graph),
        Intent(type="filter_changed", window_kind="last_release"),
        fixture_graph,
    )
    view = materialize(fixture_graph, spec, history=history_index)
    # without history the same spec keeps nothing: no heat, no badges
    bare = materialize(fixture_graph, spec, history=None)
    assert view.nodes and not bare.nodes

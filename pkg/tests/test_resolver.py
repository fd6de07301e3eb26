from codescope.java_parser import parse_unit
from codescope.model import RelationKind
from codescope.resolver import ResolutionEvent, resolve_types


def resolve_sources(sources: dict[str, str], trace=None):
    units = [parse_unit(text, path) for path, text in sources.items()]
    return resolve_types(units, trace=trace)


def refs_of(resolved, source_qname):
    out = {}
    for unit in resolved:
        for ref in unit.references:
            if ref.source == source_qname:
                out[(ref.target, ref.kind)] = (ref.target_external, ref.count)
    return out


def test_same_package_beats_import():
    # a local p.B and `import q.B` both match: the package-local type wins
    resolved = resolve_sources(
        {
            "p/A.java": "package p; import q.B; class A { B b; }",
            "p/B.java": "package p; class B { }",
            "q/B.java": "package q; class B { }",
        }
    )
    refs = refs_of(resolved, "p.A")
    assert ("p.B", RelationKind.ASSOCIATION) in refs
    assert refs[("p.B", RelationKind.ASSOCIATION)][0] is False


def test_unknown_ref_becomes_bare_external():
    resolved = resolve_sources({"p/A.java": "package p; class A { List l; }"})
    refs = refs_of(resolved, "p.A")
    assert refs == {("List", RelationKind.ASSOCIATION): (True, 1)}


def test_rule_matrix_trace_monotone():
    """Each removal of a higher-priority candidate moves resolution down
    exactly one rule; the instrumented trace proves the precedence order."""
    scenarios = [
        # rule 1: declared in the same unit
        (
            {"p/A.java": "package p; class A { B b; } class B { }"},
            ("p.B", False, 1),
        ),
        # rule 2: same package, different unit
        (
            {
                "p/A.java": "package p; class A { B b; }",
                "p/B.java": "package p; class B { }",
            },
            ("p.B", False, 2),
        ),
        # rule 3: single-type import of a declared type
        (
            {
                "p/A.java": "package p; import q.B; class A { B b; }",
                "q/B.java": "package q; class B { }",
            },
            ("q.B", False, 3),
        ),
        # rule 4: on-demand import matching a declared type
        (
            {
                "p/A.java": "package p; import q.*; class A { B b; }",
                "q/B.java": "package q; class B { }",
            },
            ("q.B", False, 4),
        ),
        # rule 5: java.lang allowlist (use String since B is not in it)
        (
            {"p/A.java": "package p; class A { String b; }"},
            ("java.lang.String", True, 5),
        ),
        # rule 6: external, using the import path when one matches
        (
            {"p/A.java": "package p; import q.B; class A { B b; }"},
            ("q.B", True, 6),
        ),
    ]
    rules_seen = []
    for sources, (target, external, rule) in scenarios:
        trace: list[ResolutionEvent] = []
        resolve_sources(sources, trace=trace)
        events = [e for e in trace if e.source == "p.A"]
        assert len(events) == 1, "exactly one rule fires per reference"
        event = events[0]
        assert (event.target, event.external, event.rule) == (target, external, rule)
        rules_seen.append(event.rule)
    assert rules_seen == sorted(rules_seen) == [1, 2, 3, 4, 5, 6]


def test_rule6_without_import_is_bare_name():
    trace: list[ResolutionEvent] = []
    resolve_sources({"p/A.java": "package p; class A { Widget w; }"}, trace=trace)
    (event,) = trace
    assert (event.rule, event.target, event.external) == (6, "Widget", True)


def test_nested_scope_beats_package():
    resolved = resolve_sources(
        {
            "p/Outer.java": "package p; class Outer { class Helper { } Helper h; }",
            "p/Helper.java": "package p; class Helper { }",
        }
    )
    refs = refs_of(resolved, "p.Outer")
    assert ("p.Outer.Helper", RelationKind.ASSOCIATION) in refs


def test_relation_kind_mapping():
    resolved = resolve_sources(
        {
            "p/A.java": (
                "package p; class A extends Base implements Face {"
                " Other field;"
                " Other make(Param x) { return new Built(); }"
                " }"
                " class Base { } interface Face { } class Other { }"
                " class Param { } class Built { }"
            )
        }
    )
    refs = refs_of(resolved, "p.A")
    assert ("p.Base", RelationKind.EXTENDS) in refs
    assert ("p.Face", RelationKind.IMPLEMENTS) in refs
    assert ("p.Other", RelationKind.ASSOCIATION) in refs
    # return type, parameter and body token all map to dependencies
    assert refs[("p.Other", RelationKind.DEPENDENCY)][1] == 1
    assert ("p.Param", RelationKind.DEPENDENCY) in refs
    assert ("p.Built", RelationKind.DEPENDENCY) in refs


def test_self_references_dropped():
    resolved = resolve_sources(
        {"p/A.java": "package p; class A { A next; A copy() { return new A(); } }"}
    )
    assert refs_of(resolved, "p.A") == {}


def test_occurrences_accumulate_multiplicity():
    resolved = resolve_sources(
        {
            "p/A.java": (
                "package p; class A { void m(B x, B y) { B z = new B(); } } class B { }"
            )
        }
    )
    refs = refs_of(resolved, "p.A")
    # two parameters + two body tokens (decl and new)
    assert refs[("p.B", RelationKind.DEPENDENCY)] == (False, 4)


def test_dotted_reference_to_declared_type():
    resolved = resolve_sources(
        {
            "p/A.java": "package p; class A { q.B b; }",
            "q/B.java": "package q; class B { }",
        }
    )
    refs = refs_of(resolved, "p.A")
    assert refs[("q.B", RelationKind.ASSOCIATION)] == (False, 1)

import random

import pytest

from codescope.errors import IoError, ParseError
from codescope.java_parser import MemberKind, TypeKind, parse_unit, scan_project

from conftest import JAVAPROJ


def test_scan_empty_dir(tmp_path):
    assert scan_project(tmp_path) == []


def test_scan_sorted_relative(tmp_path):
    (tmp_path / "src" / "b").mkdir(parents=True)
    (tmp_path / "src" / "A.java").write_text("class A {}")
    (tmp_path / "src" / "b" / "B.java").write_text("class B {}")
    assert scan_project(tmp_path) == ["src/A.java", "src/b/B.java"]


def test_scan_excludes(tmp_path):
    (tmp_path / "target").mkdir()
    (tmp_path / ".hidden").mkdir()
    (tmp_path / "target" / "Gen.java").write_text("class Gen {}")
    (tmp_path / ".hidden" / "Hid.java").write_text("class Hid {}")
    (tmp_path / "Keep.java").write_text("class Keep {}")
    assert scan_project(tmp_path) == ["Keep.java"]


def test_scan_missing_dir(tmp_path):
    with pytest.raises(IoError):
        scan_project(tmp_path / "nope")


def test_parse_empty_text():
    unit = parse_unit("", "Empty.java")
    assert unit.package_name == ""
    assert unit.declarations == []


def test_parse_reference_snippet():
    unit = parse_unit(
        "package p; import q.B; class A extends B { B b; void m(List<C> x) {} }",
        "p/A.java",
    )
    assert unit.package_name == "p"
    assert unit.imports == [("q.B", False)]
    (a,) = unit.declarations
    assert a.kind is TypeKind.CLASS
    assert a.extends_refs == ["B"]
    field_b, method_m = a.members
    assert field_b.kind is MemberKind.FIELD and field_b.type_refs == ["B"]
    assert method_m.kind is MemberKind.METHOD and method_m.type_refs == ["List", "C"]


def test_body_harvest_capitalized():
    unit = parse_unit("class A { void m() { Helper.run(); } }", "A.java")
    assert unit.declarations[0].members[0].body_refs == ["Helper"]


def test_body_harvest_skips_constant_access():
    unit = parse_unit("class A { void m() { x = Status.OPEN; } }", "A.java")
    assert unit.declarations[0].members[0].body_refs == ["Status"]


def test_comments_and_strings_stripped():
    text = (
        "package p; // import fake.X;\n"
        "/* class Ghost { } */\n"
        'class A { String s = "new Phantom()"; void m() { /* Nope */ } }\n'
    )
    unit = parse_unit(text, "p/A.java")
    (a,) = unit.declarations
    assert [m.name for m in a.members] == ["s", "m"]
    assert a.members[0].body_refs == []  # string literal content is invisible


def test_constructor_recorded_as_init():
    unit = parse_unit("class A { A(int x) { } }", "A.java")
    (ctor,) = unit.declarations[0].members
    assert ctor.kind is MemberKind.METHOD
    assert ctor.name == "<init>"


def test_on_demand_import_and_static_import():
    unit = parse_unit(
        "package p; import java.util.*; import static java.lang.Math.max; class A { }",
        "p/A.java",
    )
    assert ("java.util", True) in unit.imports
    assert ("java.lang.Math.max", False) in unit.imports


def test_generic_flattening_and_arrays():
    unit = parse_unit(
        "class A { Map<String, Foo> m; int[] nums; Foo[] foos; void g(List<? extends Bar> l) {} }",
        "A.java",
    )
    members = unit.declarations[0].members
    assert members[0].type_refs == ["Map", "String", "Foo"]
    assert members[1].type_refs == []  # primitives contribute nothing
    assert members[2].type_refs == ["Foo"]
    assert members[3].type_refs == ["List", "Bar"]


def test_enum_constants_are_not_members():
    unit = parse_unit(
        "enum E { A, B(1), C { void x() { } }; int f; void m() { } }", "E.java"
    )
    (e,) = unit.declarations
    assert e.kind is TypeKind.ENUM
    assert [m.name for m in e.members] == ["f", "m"]


def test_nested_types_and_interface_extends():
    unit = parse_unit(
        "package p; interface I extends A, B { } class Outer { class Inner { } }",
        "p/I.java",
    )
    iface, outer = unit.declarations
    assert iface.extends_refs == ["A", "B"]
    assert iface.implements_refs == []
    assert [n.name for n in outer.nested] == ["Inner"]


def test_annotations_records_tolerated():
    text = (
        "package p;\n"
        "@Deprecated @SuppressWarnings(\"x\")\n"
        "class A { @Override void m() { } }\n"
        "record Point(int x, int y) { }\n"
        "@interface Marker { String value(); }\n"
    )
    unit = parse_unit(text, "p/A.java")
    assert [t.name for t in unit.declarations] == ["A"]


def test_multi_declarator_fields():
    unit = parse_unit("class A { int a = 1, b = 2; Foo x, y; }", "A.java")
    names = [m.name for m in unit.declarations[0].members]
    assert names == ["a", "b", "x", "y"]


def test_generic_initializer_comma_not_a_declarator():
    unit = parse_unit(
        "class A { Map<String, Integer> stock = new HashMap<String, Integer>(); }",
        "A.java",
    )
    (field,) = unit.declarations[0].members
    assert field.name == "stock"
    assert field.type_refs == ["Map", "String", "Integer"]
    assert field.body_refs == ["HashMap", "String", "Integer"]


def test_declaration_text_is_header_only():
    unit = parse_unit(
        "public final class A<T> extends B implements C, D { int x; }", "A.java"
    )
    (a,) = unit.declarations
    assert a.declaration_text == "public final class A<T> extends B implements C,D"
    # bodies and whitespace do not leak into member headers either
    unit2 = parse_unit("class A { int   x\n=\n3; }", "A.java")
    assert unit2.declarations[0].members[0].declaration_text == "int x"


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as err:
        parse_unit("package p;\nclass A {\n  int = broken;\n}\n", "p/A.java")
    assert err.value.path == "p/A.java"
    assert err.value.line >= 1


def test_unterminated_body_is_parse_error():
    with pytest.raises(ParseError):
        parse_unit("class A { void m() { ", "A.java")


def test_parse_deterministic():
    text = (JAVAPROJ / "shop" / "orders" / "Order.java").read_text()
    a = parse_unit(text, "Order.java").to_dict()
    b = parse_unit(text, "Order.java").to_dict()
    assert a == b


def test_per_file_golden_type_counts(manifest):
    for rel, expected in manifest["types_per_file"].items():
        text = (JAVAPROJ / rel).read_text()
        unit = parse_unit(text, rel)
        assert unit.type_count() == expected, rel


def test_mutation_fuzz_small():
    """Deleting any single character yields RawUnit or ParseError, never a crash."""
    rng = random.Random(42)
    corpus = [(p, (JAVAPROJ / p).read_text()) for p in sorted(manifest_paths())]
    for _ in range(120):
        path, text = corpus[rng.randrange(len(corpus))]
        pos = rng.randrange(len(text))
        mutated = text[:pos] + text[pos + 1 :]
        try:
            parse_unit(mutated, path)
        except ParseError:
            pass


def manifest_paths():
    import json

    from conftest import GOLDEN

    return json.loads((GOLDEN / "manifest.json").read_text())["types_per_file"].keys()

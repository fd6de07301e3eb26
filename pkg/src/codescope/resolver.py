"""Type reference resolution across parsed units.

Each reference string resolves by a fixed precedence:
  1. a type declared in the same unit (innermost nesting scope first)
  2. a type in the same package
  3. a single-type import naming a declared type
  4. an on-demand import matching a declared type
  5. the java.lang allowlist (external)
  6. otherwise an external type under its best-known qualified name

Resolution is total: rule 6 always fires when nothing else does. Exactly one
rule fires per reference; pass a trace list to record which.
"""
from __future__ import annotations

from dataclasses import dataclass

from .java_parser import MemberKind, RawType, RawUnit
from .model import (
    EntityKind,
    RelationKind,
    ResolvedMember,
    ResolvedReference,
    ResolvedType,
    ResolvedUnit,
)

JAVA_LANG = frozenset(
    {
        "Object", "String", "Exception", "RuntimeException", "Thread", "Iterable",
        "Comparable", "Integer", "Long", "Double", "Boolean", "Character", "Byte",
        "Short", "Float", "Void", "Math", "System",
    }
)

_TYPE_KIND = {
    "Class": EntityKind.CLASS,
    "Interface": EntityKind.INTERFACE,
    "Enum": EntityKind.ENUM,
}


@dataclass(frozen=True)
class ResolutionEvent:
    """One resolved reference, for the precedence trace."""

    path: str
    source: str  # declaring type qname
    ref: str
    rule: int  # 1..6
    target: str
    external: bool


@dataclass(frozen=True)
class _Resolution:
    target: str
    external: bool
    rule: int


class _Scope:
    """Name lookup context for one declared type."""

    def __init__(self, unit: RawUnit, chain: list[RawType], unit_types: dict[str, str]):
        self.unit = unit
        self.chain = chain  # outermost..innermost
        self.unit_types = unit_types  # simple name -> qname, unit-wide

    @property
    def qname(self) -> str:
        prefix = self.unit.package_name + "." if self.unit.package_name else ""
        return prefix + ".".join(t.name for t in self.chain)

    def lookup_local(self, name: str) -> str | None:
        """Innermost nesting scope first, then the whole unit."""
        for i in range(len(self.chain), 0, -1):
            enclosing = self.chain[:i]
            # the enclosing type itself
            if enclosing[-1].name == name:
                return self._qname_of(enclosing)
            # its directly nested types
            for nested in enclosing[-1].nested:
                if nested.name == name:
                    return self._qname_of(enclosing + [nested])
        return self.unit_types.get(name)

    def _qname_of(self, chain: list[RawType]) -> str:
        prefix = self.unit.package_name + "." if self.unit.package_name else ""
        return prefix + ".".join(t.name for t in chain)


def resolve_types(
    units: list[RawUnit], trace: list[ResolutionEvent] | None = None
) -> list[ResolvedUnit]:
    """Resolve all references and map them to relations.

    extends -> Extends, implements -> Implements, field types -> Association,
    method types and body tokens -> Dependency. Self-references are dropped.
    """
    declared: dict[str, RawType] = {}
    by_package: dict[str, dict[str, str]] = {}

    def register(unit: RawUnit, chain: list[RawType]):
        prefix = unit.package_name + "." if unit.package_name else ""
        qname = prefix + ".".join(t.name for t in chain)
        declared[qname] = chain[-1]
        by_package.setdefault(unit.package_name, {}).setdefault(chain[-1].name, qname)
        for nested in chain[-1].nested:
            register(unit, chain + [nested])

    for unit in units:
        for rtype in unit.declarations:
            register(unit, [rtype])

    results: list[ResolvedUnit] = []
    for unit in sorted(units, key=lambda u: u.path):
        unit_types: dict[str, str] = {}

        def collect(chain: list[RawType]):
            prefix = unit.package_name + "." if unit.package_name else ""
            qname = prefix + ".".join(t.name for t in chain)
            # top-level names win over equally named nested ones
            unit_types.setdefault(chain[-1].name, qname)
            for nested in chain[-1].nested:
                collect(chain + [nested])

        for rtype in unit.declarations:
            collect([rtype])

        rtypes: list[ResolvedType] = []
        counts: dict[tuple[str, str, bool, RelationKind], int] = {}

        def visit(chain: list[RawType], parent_qname: str | None):
            scope = _Scope(unit, chain, unit_types)
            rtype = chain[-1]
            qname = scope.qname
            members = []
            seen_members = set()
            for mem in rtype.members:
                kind = EntityKind.FIELD if mem.kind is MemberKind.FIELD else EntityKind.METHOD
                members.append(ResolvedMember(kind, mem.name, mem.declaration_text))
                seen_members.add((mem.name, kind))
            rtypes.append(
                ResolvedType(
                    kind=_TYPE_KIND[rtype.kind.value],
                    qualified_name=qname,
                    simple_name=rtype.name,
                    declaration_text=rtype.declaration_text,
                    line=rtype.line,
                    parent_qname=parent_qname,
                    members=tuple(members),
                )
            )

            def add(ref: str, rel: RelationKind):
                res = _resolve_one(ref, scope, by_package, declared)
                if trace is not None:
                    trace.append(
                        ResolutionEvent(unit.path, qname, ref, res.rule, res.target, res.external)
                    )
                if not res.external and res.target == qname:
                    return  # self-reference
                key = (qname, res.target, res.external, rel)
                counts[key] = counts.get(key, 0) + 1

            for ref in rtype.extends_refs:
                add(ref, RelationKind.EXTENDS)
            for ref in rtype.implements_refs:
                add(ref, RelationKind.IMPLEMENTS)
            for mem in rtype.members:
                rel = (
                    RelationKind.ASSOCIATION
                    if mem.kind is MemberKind.FIELD
                    else RelationKind.DEPENDENCY
                )
                for ref in mem.type_refs:
                    add(ref, rel)
                for ref in mem.body_refs:
                    add(ref, RelationKind.DEPENDENCY)
            for nested in rtype.nested:
                visit(chain + [nested], qname)

        for rtype in unit.declarations:
            visit([rtype], None)

        references = tuple(
            ResolvedReference(src, tgt, ext, rel, n)
            for (src, tgt, ext, rel), n in sorted(
                counts.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][3].value)
            )
        )
        results.append(
            ResolvedUnit(
                path=unit.path,
                package_name=unit.package_name,
                types=tuple(rtypes),
                references=references,
            )
        )
    return results


def _resolve_one(
    ref: str,
    scope: _Scope,
    by_package: dict[str, dict[str, str]],
    declared: dict[str, RawType],
) -> _Resolution:
    if "." in ref:
        # qualified reference: exact declared name, else external as written
        if ref in declared:
            return _Resolution(ref, False, 2)
        return _Resolution(ref, True, 6)

    # rule 1: same unit, innermost scope first
    local = scope.lookup_local(ref)
    if local is not None:
        return _Resolution(local, False, 1)

    # rule 2: same package
    in_pkg = by_package.get(scope.unit.package_name, {}).get(ref)
    if in_pkg is not None:
        return _Resolution(in_pkg, False, 2)

    single_import = None
    for path, on_demand in scope.unit.imports:
        if not on_demand and path.rsplit(".", 1)[-1] == ref:
            single_import = path
            break

    # rule 3: single-type import naming a declared type
    if single_import is not None and single_import in declared:
        return _Resolution(single_import, False, 3)

    # rule 4: on-demand import matching a declared type
    for path, on_demand in scope.unit.imports:
        if on_demand:
            candidate = f"{path}.{ref}"
            if candidate in declared:
                return _Resolution(candidate, False, 4)

    # rule 5: java.lang allowlist
    if ref in JAVA_LANG:
        return _Resolution(f"java.lang.{ref}", True, 5)

    # rule 6: external, best-known name
    if single_import is not None:
        return _Resolution(single_import, True, 6)
    return _Resolution(ref, True, 6)

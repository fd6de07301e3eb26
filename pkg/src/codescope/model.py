"""The typed code graph: entities, relations, containment, and diffing.

A CodeGraph is the immutable product of reverse engineering one source
snapshot. Entities carry a stable identity derived from qualified name and
kind, so the same sources always produce the same graph bytes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .canon import canonical_dumps, content_hash, hash64
from .errors import DuplicateDeclaration, NoAncestor, NotFound

ROOT_SCOPE = "root"


class EntityKind(str, Enum):
    PACKAGE = "Package"
    CLASS = "Class"
    INTERFACE = "Interface"
    ENUM = "Enum"
    METHOD = "Method"
    FIELD = "Field"
    EXTERNAL_TYPE = "ExternalType"


TYPE_KINDS = frozenset({EntityKind.CLASS, EntityKind.INTERFACE, EntityKind.ENUM})
MEMBER_KINDS = frozenset({EntityKind.METHOD, EntityKind.FIELD})

_ID_TOKEN = {
    EntityKind.PACKAGE: "pkg",
    EntityKind.CLASS: "class",
    EntityKind.INTERFACE: "iface",
    EntityKind.ENUM: "enum",
    EntityKind.METHOD: "method",
    EntityKind.FIELD: "field",
    EntityKind.EXTERNAL_TYPE: "ext",
}
_KIND_BY_TOKEN = {v: k for k, v in _ID_TOKEN.items()}


def entity_id(qualified_name: str, kind: EntityKind) -> str:
    """Stable identifier for an entity. Treat the result as opaque."""
    return f"{_ID_TOKEN[kind]}:{qualified_name}"


def qname_of(eid: str) -> str:
    """Qualified name embedded in an entity id (internal helper)."""
    return eid.split(":", 1)[1]


class RelationKind(str, Enum):
    EXTENDS = "Extends"
    IMPLEMENTS = "Implements"
    ASSOCIATION = "Association"
    DEPENDENCY = "Dependency"


class Level(str, Enum):
    MEMBER = "Member"
    TYPE = "Type"
    PACKAGE = "Package"
    ROOT_PACKAGE = "RootPackage"


@dataclass(frozen=True)
class Entity:
    id: str
    kind: EntityKind
    qualified_name: str
    simple_name: str
    parent: str | None = None
    source_location: tuple[str, int] | None = None  # (file path, line)
    signature_hash: str = ""
    is_external: bool = False

    def to_dict(self) -> dict:
        loc = None
        if self.source_location is not None:
            loc = {"file": self.source_location[0], "line": self.source_location[1]}
        return {
            "id": self.id,
            "kind": self.kind.value,
            "qualified_name": self.qualified_name,
            "simple_name": self.simple_name,
            "parent": self.parent,
            "source_location": loc,
            "signature_hash": self.signature_hash,
            "is_external": self.is_external,
        }

    @staticmethod
    def from_dict(d: dict) -> "Entity":
        loc = d.get("source_location")
        return Entity(
            id=d["id"],
            kind=EntityKind(d["kind"]),
            qualified_name=d["qualified_name"],
            simple_name=d["simple_name"],
            parent=d.get("parent"),
            source_location=(loc["file"], loc["line"]) if loc else None,
            signature_hash=d.get("signature_hash", ""),
            is_external=bool(d.get("is_external", False)),
        )


@dataclass(frozen=True)
class Relation:
    source: str
    target: str
    kind: RelationKind
    multiplicity: int = 1

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "kind": self.kind.value,
            "multiplicity": self.multiplicity,
        }

    @staticmethod
    def from_dict(d: dict) -> "Relation":
        return Relation(d["source"], d["target"], RelationKind(d["kind"]), d["multiplicity"])


# --- resolved units: the contract between reference resolution and the graph builder

@dataclass(frozen=True)
class ResolvedMember:
    kind: EntityKind  # METHOD or FIELD
    name: str
    declaration_text: str


@dataclass(frozen=True)
class ResolvedType:
    kind: EntityKind  # CLASS, INTERFACE or ENUM
    qualified_name: str
    simple_name: str
    declaration_text: str
    line: int
    parent_qname: str | None  # enclosing type qname, or None for top level
    members: tuple[ResolvedMember, ...] = ()


@dataclass(frozen=True)
class ResolvedReference:
    source: str  # qualified name of the declaring type
    target: str  # qualified name of the referenced type (best known)
    target_external: bool
    kind: RelationKind
    count: int = 1


@dataclass(frozen=True)
class ResolvedUnit:
    path: str
    package_name: str
    types: tuple[ResolvedType, ...] = ()
    references: tuple[ResolvedReference, ...] = ()


@dataclass
class CodeGraph:
    """Immutable after build_graph; safe for concurrent readers."""

    entities: dict[str, Entity]
    relations: list[Relation]
    roots: list[str]
    subject_ref: str | None = None
    module_depth: int = 1
    _children: dict[str, list[str]] = field(default_factory=dict, repr=False)
    _by_qname: dict[str, list[str]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._children = {}
        self._by_qname = {}
        for eid, ent in self.entities.items():
            self._by_qname.setdefault(ent.qualified_name, []).append(eid)
            if ent.parent is not None:
                self._children.setdefault(ent.parent, []).append(eid)
        for kids in self._children.values():
            kids.sort(key=lambda i: self._sort_key(i))

    def _sort_key(self, eid: str):
        ent = self.entities[eid]
        return (ent.qualified_name, ent.kind.value)

    def entity(self, eid: str) -> Entity:
        try:
            return self.entities[eid]
        except KeyError:
            raise NotFound(eid) from None

    def ids_for_qname(self, qname: str) -> list[str]:
        return list(self._by_qname.get(qname, []))

    def type_ids(self) -> list[str]:
        return [e.id for e in self.entities.values() if e.kind in TYPE_KINDS]

    def has(self, eid: str) -> bool:
        return eid in self.entities

    def ancestors_or_self(self, eid: str):
        """Yield eid, then each parent up to a root."""
        cur: str | None = eid
        seen = set()
        while cur is not None and cur not in seen:
            seen.add(cur)
            yield cur
            cur = self.entities[cur].parent if cur in self.entities else None

    def descendants_or_self(self, eid: str) -> list[str]:
        out = [eid]
        stack = [eid]
        while stack:
            for kid in self._children.get(stack.pop(), ()):
                out.append(kid)
                stack.append(kid)
        return out

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "subject_ref": self.subject_ref,
            "module_depth": self.module_depth,
            "entities": [e.to_dict() for e in self.entities.values()],
            "relations": [r.to_dict() for r in self.relations],
        }

    def to_json(self) -> str:
        return canonical_dumps(self.to_dict())

    def graph_hash(self) -> str:
        return content_hash(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "CodeGraph":
        entities = {}
        for ed in d["entities"]:
            ent = Entity.from_dict(ed)
            entities[ent.id] = ent
        relations = [Relation.from_dict(rd) for rd in d["relations"]]
        roots = sorted(
            (e.id for e in entities.values() if e.parent is None and not e.is_external),
            key=lambda i: (entities[i].qualified_name, entities[i].kind.value),
        )
        return CodeGraph(
            entities=entities,
            relations=relations,
            roots=roots,
            subject_ref=d.get("subject_ref"),
            module_depth=int(d.get("module_depth", 1)),
        )

    @staticmethod
    def from_json(text: str) -> "CodeGraph":
        import json

        return CodeGraph.from_dict(json.loads(text))


@dataclass(frozen=True)
class GraphDiff:
    added: frozenset[str]
    removed: frozenset[str]
    changed: frozenset[str]
    relation_added: frozenset[tuple[str, str, str]]
    relation_removed: frozenset[tuple[str, str, str]]

    def is_empty(self) -> bool:
        return not (
            self.added or self.removed or self.changed
            or self.relation_added or self.relation_removed
        )

    def to_dict(self) -> dict:
        return {
            "added": sorted(self.added),
            "removed": sorted(self.removed),
            "changed": sorted(self.changed),
            "relation_added": sorted(list(t) for t in self.relation_added),
            "relation_removed": sorted(list(t) for t in self.relation_removed),
        }


def build_graph(
    units: list[ResolvedUnit],
    subject_ref: str | None = None,
    module_depth: int = 1,
) -> CodeGraph:
    """Assemble a CodeGraph from resolved units.

    Deterministic: entity iteration order is sorted by (qualified_name, kind)
    regardless of unit order. Raises DuplicateDeclaration if two units declare
    the same qualified type name.
    """
    declared: dict[str, tuple[ResolvedUnit, ResolvedType]] = {}
    for unit in units:
        for rtype in unit.types:
            if rtype.qualified_name in declared:
                raise DuplicateDeclaration(rtype.qualified_name)
            declared[rtype.qualified_name] = (unit, rtype)

    staging: dict[str, Entity] = {}

    def put(ent: Entity):
        staging[ent.id] = ent

    # package chains
    for unit in units:
        if not unit.package_name:
            continue
        parts = unit.package_name.split(".")
        for depth in range(1, len(parts) + 1):
            qname = ".".join(parts[:depth])
            eid = entity_id(qname, EntityKind.PACKAGE)
            if eid not in staging:
                parent = (
                    entity_id(".".join(parts[: depth - 1]), EntityKind.PACKAGE)
                    if depth > 1
                    else None
                )
                put(Entity(eid, EntityKind.PACKAGE, qname, parts[depth - 1], parent))

    # declared types and their members
    member_texts: dict[str, list[str]] = {}
    member_meta: dict[str, tuple[EntityKind, str, str, str]] = {}
    for unit in units:
        for rtype in unit.types:
            if rtype.parent_qname is not None:
                parent_rt = declared[rtype.parent_qname][1]
                parent_eid = entity_id(rtype.parent_qname, parent_rt.kind)
            elif unit.package_name:
                parent_eid = entity_id(unit.package_name, EntityKind.PACKAGE)
            else:
                parent_eid = None  # default package: type stands on its own
            put(
                Entity(
                    id=entity_id(rtype.qualified_name, rtype.kind),
                    kind=rtype.kind,
                    qualified_name=rtype.qualified_name,
                    simple_name=rtype.simple_name,
                    parent=parent_eid,
                    source_location=(unit.path, rtype.line),
                    signature_hash=hash64(rtype.declaration_text),
                )
            )
            for mem in rtype.members:
                mq = f"{rtype.qualified_name}.{mem.name}"
                mid = entity_id(mq, mem.kind)
                # overloads collapse to one entity; hash all their headers
                member_texts.setdefault(mid, []).append(mem.declaration_text)
                member_meta[mid] = (
                    mem.kind,
                    mq,
                    mem.name,
                    entity_id(rtype.qualified_name, rtype.kind),
                )
    for mid, (kind, mq, name, parent_eid) in member_meta.items():
        texts = "\n".join(sorted(set(member_texts[mid])))
        put(
            Entity(
                id=mid,
                kind=kind,
                qualified_name=mq,
                simple_name=name,
                parent=parent_eid,
                source_location=staging[parent_eid].source_location,
                signature_hash=hash64(texts),
            )
        )

    # relations, creating external targets on demand
    counts: dict[tuple[str, str, RelationKind], int] = {}
    for unit in units:
        for ref in unit.references:
            src_rt = declared[ref.source][1]
            src_id = entity_id(ref.source, src_rt.kind)
            if ref.target_external:
                tgt_id = entity_id(ref.target, EntityKind.EXTERNAL_TYPE)
                if tgt_id not in staging:
                    simple = ref.target.rsplit(".", 1)[-1]
                    put(
                        Entity(
                            id=tgt_id,
                            kind=EntityKind.EXTERNAL_TYPE,
                            qualified_name=ref.target,
                            simple_name=simple,
                            is_external=True,
                        )
                    )
            else:
                tgt_rt = declared[ref.target][1]
                tgt_id = entity_id(ref.target, tgt_rt.kind)
            if src_id == tgt_id:
                continue
            key = (src_id, tgt_id, ref.kind)
            counts[key] = counts.get(key, 0) + ref.count

    ordered = dict(
        sorted(staging.items(), key=lambda kv: (kv[1].qualified_name, kv[1].kind.value))
    )
    relations = [
        Relation(s, t, k, m)
        for (s, t, k), m in sorted(counts.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value))
    ]
    roots = sorted(
        (e.id for e in ordered.values() if e.parent is None and not e.is_external),
        key=lambda i: (ordered[i].qualified_name, ordered[i].kind.value),
    )
    return CodeGraph(
        entities=ordered,
        relations=relations,
        roots=roots,
        subject_ref=subject_ref,
        module_depth=module_depth,
    )


def ancestor_at_level(graph: CodeGraph, eid: str, level: Level) -> str:
    """Nearest ancestor-or-self matching the level.

    ExternalType entities represent themselves at every level, as do types in
    the default package when asked for a package-level representative.
    """
    ent = graph.entity(eid)
    if ent.kind is EntityKind.EXTERNAL_TYPE:
        return eid

    if level is Level.MEMBER:
        if ent.kind in MEMBER_KINDS:
            return eid
        raise NoAncestor(eid, level.value)

    if level is Level.TYPE:
        for cur in graph.ancestors_or_self(eid):
            if graph.entities[cur].kind in TYPE_KINDS:
                return cur
        raise NoAncestor(eid, level.value)

    # package chain, nearest first
    packages = [
        cur for cur in graph.ancestors_or_self(eid)
        if graph.entities[cur].kind is EntityKind.PACKAGE
    ]
    if not packages:
        # default-package type (or its member): the type stands in for its package
        if level in (Level.PACKAGE, Level.ROOT_PACKAGE):
            for cur in graph.ancestors_or_self(eid):
                if graph.entities[cur].kind in TYPE_KINDS and graph.entities[cur].parent is None:
                    return cur
        raise NoAncestor(eid, level.value)

    if level is Level.PACKAGE:
        return packages[0]

    # RootPackage: the package whose dotted depth equals module_depth,
    # or the shallowest one when the chain is shorter.
    chain = list(reversed(packages))  # root first
    idx = min(graph.module_depth, len(chain)) - 1
    return chain[idx]


def children(graph: CodeGraph, eid: str) -> list[str]:
    """Direct containment children, sorted by qualified name."""
    graph.entity(eid)
    return list(graph._children.get(eid, []))


def _diff_index(graph: CodeGraph) -> dict[str, set[tuple[str, str]]]:
    index: dict[str, set[tuple[str, str]]] = {}
    for ent in graph.entities.values():
        if ent.is_external:
            continue
        index.setdefault(ent.qualified_name, set()).add((ent.kind.value, ent.signature_hash))
    return index


def diff_graphs(before: CodeGraph, after: CodeGraph) -> GraphDiff:
    """Set-semantic diff, keyed by qualified name.

    Entities present in both snapshots with identical (kind, signature_hash)
    appear nowhere in the diff. External types are excluded: they track
    references, not declarations, and show up in the relation diff instead.
    """
    b = _diff_index(before)
    a = _diff_index(after)
    added = frozenset(a.keys() - b.keys())
    removed = frozenset(b.keys() - a.keys())
    changed = frozenset(q for q in a.keys() & b.keys() if a[q] != b[q])

    def rel_set(g: CodeGraph) -> frozenset[tuple[str, str, str]]:
        return frozenset(
            (
                g.entities[r.source].qualified_name,
                g.entities[r.target].qualified_name,
                r.kind.value,
            )
            for r in g.relations
        )

    rb, ra = rel_set(before), rel_set(after)
    return GraphDiff(
        added=added,
        removed=removed,
        changed=changed,
        relation_added=frozenset(ra - rb),
        relation_removed=frozenset(rb - ra),
    )


def validate_graph(graph: CodeGraph) -> list[str]:
    """Check every structural invariant; empty list means the graph is sound."""
    violations: list[str] = []
    ents = graph.entities

    for eid, ent in ents.items():
        if ent.id != entity_id(ent.qualified_name, ent.kind):
            violations.append(f"identity mismatch: {eid}")
        if ent.is_external:
            if ent.parent is not None:
                violations.append(f"external entity has parent: {eid}")
            if ent.source_location is not None:
                violations.append(f"external entity has source location: {eid}")
            if ent.kind is not EntityKind.EXTERNAL_TYPE:
                violations.append(f"is_external on non-external kind: {eid}")
            continue
        if ent.kind is EntityKind.EXTERNAL_TYPE:
            violations.append(f"external kind without is_external: {eid}")
        if ent.parent is not None:
            if ent.parent not in ents:
                violations.append(f"parent missing: {eid} -> {ent.parent}")
            else:
                par = ents[ent.parent]
                expected = f"{par.qualified_name}.{ent.simple_name}"
                if ent.qualified_name != expected:
                    violations.append(
                        f"qualified name not parent-composed: {eid} "
                        f"(got {ent.qualified_name}, want {expected})"
                    )
                if ent.kind in MEMBER_KINDS and par.kind not in TYPE_KINDS:
                    violations.append(f"member parent is not a type: {eid}")
                if ent.kind in TYPE_KINDS and par.kind not in TYPE_KINDS | {EntityKind.PACKAGE}:
                    violations.append(f"type parent is neither package nor type: {eid}")
                if ent.kind is EntityKind.PACKAGE and par.kind is not EntityKind.PACKAGE:
                    violations.append(f"package parent is not a package: {eid}")
        else:
            if ent.qualified_name != ent.simple_name:
                violations.append(f"root with dotted qualified name: {eid}")
            if eid not in graph.roots:
                violations.append(f"parentless entity missing from roots: {eid}")
        if ent.kind in MEMBER_KINDS and ent.parent is None:
            violations.append(f"member without parent: {eid}")

    # containment cycles
    for eid in ents:
        seen = set()
        cur: str | None = eid
        while cur is not None:
            if cur in seen:
                violations.append(f"containment cycle: {eid}")
                break
            seen.add(cur)
            cur = ents[cur].parent if cur in ents else None

    for rid in graph.roots:
        if rid not in ents:
            violations.append(f"root missing from entities: {rid}")
        elif ents[rid].parent is not None:
            violations.append(f"root has a parent: {rid}")

    seen_triples: set[tuple[str, str, RelationKind]] = set()
    for rel in graph.relations:
        triple = (rel.source, rel.target, rel.kind)
        if triple in seen_triples:
            violations.append(
                f"duplicate relation triple: {rel.source} -> {rel.target} ({rel.kind.value})"
            )
        seen_triples.add(triple)
        if rel.source not in ents:
            violations.append(f"relation endpoint missing: {rel.source}")
            continue
        if rel.target not in ents:
            violations.append(f"relation endpoint missing: {rel.target}")
            continue
        if rel.multiplicity < 1:
            violations.append(
                f"relation multiplicity below 1: {rel.source} -> {rel.target}"
            )
        if rel.kind in (RelationKind.EXTENDS, RelationKind.IMPLEMENTS):
            if rel.source == rel.target:
                violations.append(f"self inheritance: {rel.source}")
            for end in (rel.source, rel.target):
                if ents[end].kind not in TYPE_KINDS | {EntityKind.EXTERNAL_TYPE}:
                    violations.append(
                        f"inheritance endpoint is not a type: {end} in "
                        f"{rel.source} -> {rel.target}"
                    )
    return violations

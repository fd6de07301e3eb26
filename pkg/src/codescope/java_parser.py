"""Java subset parser: project scanning and single-unit parsing.

The grammar recognizes the architecturally relevant subset: package and
import declarations, class/interface/enum declarations with modifiers, type
parameters and extends/implements clauses, fields, methods and constructors.
Comments and string/char literals are stripped up front. Method bodies are
skipped with balanced-brace matching while harvesting capitalized identifier
tokens as body references. Annotations, lambdas, records and modules are
tolerated but contribute no model elements.

One malformed file raises ParseError and is skipped by ingestion; a parse
never aborts the whole project.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import IoError, ParseError

DEFAULT_EXCLUDES = ("target", "build", "out", ".git")

PRIMITIVES = frozenset(
    {"boolean", "byte", "short", "int", "long", "char", "float", "double", "void", "var"}
)

MODIFIERS = frozenset(
    {
        "public", "protected", "private", "static", "final", "abstract",
        "default", "native", "synchronized", "transient", "volatile",
        "strictfp", "sealed",
    }
)


class TypeKind(str, Enum):
    CLASS = "Class"
    INTERFACE = "Interface"
    ENUM = "Enum"


class MemberKind(str, Enum):
    FIELD = "Field"
    METHOD = "Method"
    CONSTRUCTOR = "Constructor"


@dataclass
class RawMember:
    kind: MemberKind
    name: str
    declaration_text: str
    type_refs: list[str] = field(default_factory=list)
    body_refs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "name": self.name,
            "declaration_text": self.declaration_text,
            "type_refs": list(self.type_refs),
            "body_refs": list(self.body_refs),
        }


@dataclass
class RawType:
    kind: TypeKind
    name: str
    declaration_text: str
    line: int
    extends_refs: list[str] = field(default_factory=list)
    implements_refs: list[str] = field(default_factory=list)
    members: list[RawMember] = field(default_factory=list)
    nested: list["RawType"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "name": self.name,
            "declaration_text": self.declaration_text,
            "line": self.line,
            "extends_refs": list(self.extends_refs),
            "implements_refs": list(self.implements_refs),
            "members": [m.to_dict() for m in self.members],
            "nested": [t.to_dict() for t in self.nested],
        }


@dataclass
class RawUnit:
    path: str
    package_name: str = ""
    imports: list[tuple[str, bool]] = field(default_factory=list)  # (path, on_demand)
    declarations: list[RawType] = field(default_factory=list)

    def type_count(self) -> int:
        def count(types: list[RawType]) -> int:
            return sum(1 + count(t.nested) for t in types)

        return count(self.declarations)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "package_name": self.package_name,
            "imports": [[p, od] for p, od in self.imports],
            "declarations": [t.to_dict() for t in self.declarations],
        }


def scan_project(root_dir: str | Path, excludes: tuple[str, ...] = DEFAULT_EXCLUDES) -> list[str]:
    """All .java files under root, as sorted relative POSIX paths.

    Hidden directories and the exclude list are skipped.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise IoError(str(root), "not a readable directory")
    found: list[str] = []
    try:
        for dirpath, dirnames, filenames in os.walk(root):
            dirnames[:] = sorted(
                d for d in dirnames if not d.startswith(".") and d not in excludes
            )
            for name in filenames:
                if name.endswith(".java"):
                    rel = Path(dirpath, name).relative_to(root)
                    found.append(rel.as_posix())
    except OSError as exc:
        raise IoError(str(root), str(exc)) from exc
    return sorted(found)


_IDENT_START = re.compile(r"[A-Za-z_$]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_$]")


def _strip_comments_and_literals(text: str) -> str:
    """Blank out comments and string/char literal contents, preserving lines."""
    out = list(text)
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
        elif c == "/" and i + 1 < n and text[i + 1] == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (text[i] == "*" and i + 1 < n and text[i + 1] == "/"):
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                if i + 1 < n:
                    out[i + 1] = " "
                i += 2
        elif c == '"' or c == "'":
            quote = c
            # text blocks (\"\"\") behave like long strings
            block = quote == '"' and text[i : i + 3] == '"""'
            i += 3 if block else 1
            closing = '"""' if block else quote
            while i < n:
                if text[i] == "\\" and not block:
                    if text[i] != "\n":
                        out[i] = " "
                    if i + 1 < n and text[i + 1] != "\n":
                        out[i + 1] = " "
                    i += 2
                    continue
                if text.startswith(closing, i):
                    i += len(closing)
                    break
                if text[i] != "\n":
                    out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | num | punct | eof
    value: str
    line: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n, line = 0, len(text), 1
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c.isspace():
            i += 1
        elif _IDENT_START.match(c):
            j = i + 1
            while j < n and _IDENT_BODY.match(text[j]):
                j += 1
            tokens.append(_Token("ident", text[i:j], line))
            i = j
        elif c.isdigit():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "._"):
                j += 1
            tokens.append(_Token("num", text[i:j], line))
            i = j
        else:
            tokens.append(_Token("punct", c, line))
            i += 1
    tokens.append(_Token("eof", "", line))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], path: str):
        self.tokens = tokens
        self.pos = 0
        self.path = path

    # --- token helpers

    def peek(self, offset: int = 0) -> _Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def next(self) -> _Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind != "eof" and tok.value == value

    def at_ident(self, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and (value is None or tok.value == value)

    def expect(self, value: str) -> _Token:
        tok = self.peek()
        if tok.kind == "eof":
            self.fail(f"expected {value!r}, found end of input")
        if tok.value != value:
            self.fail(f"expected {value!r}, found {tok.value!r}")
        return self.next()

    def expect_ident(self) -> _Token:
        tok = self.peek()
        if tok.kind != "ident":
            found = "end of input" if tok.kind == "eof" else repr(tok.value)
            self.fail(f"expected identifier, found {found}")
        return self.next()

    def fail(self, message: str):
        raise ParseError(self.path, self.peek().line, message)

    # --- skip helpers

    def skip_balanced(self, open_ch: str, close_ch: str, harvest: list[str] | None = None):
        """Consume from an already-seen opener to its matching closer.

        With `harvest`, capitalized identifiers are collected as type
        references, except directly after a dot: `Status.OPEN` reads the
        constant OPEN off a type, it does not reference a type named OPEN.
        """
        depth = 1
        prev = open_ch
        while depth > 0:
            tok = self.next()
            if tok.kind == "eof":
                self.fail(f"unterminated {open_ch}...{close_ch} block")
            if tok.value == open_ch:
                depth += 1
            elif tok.value == close_ch:
                depth -= 1
            elif (
                harvest is not None
                and tok.kind == "ident"
                and tok.value[0].isupper()
                and prev != "."
            ):
                harvest.append(tok.value)
            prev = tok.value

    def skip_annotations(self):
        while self.at("@"):
            if self.peek(1).value == "interface":
                return  # annotation type declaration, not an annotation use
            self.next()
            self.expect_ident()
            while self.at("."):
                self.next()
                self.expect_ident()
            if self.at("("):
                self.next()
                self.skip_balanced("(", ")")

    def collect_modifiers(self) -> list[str]:
        mods = []
        while True:
            self.skip_annotations()
            tok = self.peek()
            if tok.kind == "ident" and tok.value in MODIFIERS:
                mods.append(self.next().value)
            elif (
                tok.kind == "ident"
                and tok.value == "non"
                and self.peek(1).value == "-"
                and self.peek(2).value == "sealed"
            ):
                self.next(), self.next(), self.next()
                mods.append("non-sealed")
            else:
                return mods

    # --- type expressions

    def parse_type_params_text(self) -> tuple[str, set[str]]:
        """Capture a balanced <...> clause verbatim; returns (text, param names)."""
        parts = ["<"]
        names: set[str] = set()
        self.expect("<")
        depth = 1
        expect_name = True
        while depth > 0:
            tok = self.next()
            if tok.kind == "eof":
                self.fail("unterminated type parameter list")
            if tok.value == "<":
                depth += 1
            elif tok.value == ">":
                depth -= 1
                if depth == 0:
                    parts.append(">")
                    break
            if expect_name and depth == 1 and tok.kind == "ident":
                names.add(tok.value)
                expect_name = False
            if tok.value == "," and depth == 1:
                expect_name = True
            parts.append(tok.value)
        return "".join(parts), names

    def parse_type_expr(self, refs: list[str], type_params: set[str]) -> str:
        """Parse one type reference expression; returns its compact text.

        Dotted names are recorded in refs as written; generic arguments are
        flattened; array suffixes stripped; primitives, `void` and in-scope
        type parameters contribute no refs.
        """
        tok = self.peek()
        if tok.kind != "ident":
            found = "end of input" if tok.kind == "eof" else repr(tok.value)
            self.fail(f"expected type, found {found}")
        name_parts = [self.next().value]
        while self.at(".") and self.peek(1).kind == "ident":
            self.next()
            name_parts.append(self.next().value)
        name = ".".join(name_parts)
        text = name
        if name_parts[0] not in PRIMITIVES and name not in type_params:
            refs.append(name)
        if self.at("<"):
            text += self._parse_type_args(refs, type_params)
        while self.at("[") and self.peek(1).value == "]":
            self.next(), self.next()
            text += "[]"
        if self.at(".") and self.peek(1).value == "." and self.peek(2).value == ".":
            self.next(), self.next(), self.next()  # varargs ellipsis
            text += "..."
        return text

    def _parse_type_args(self, refs: list[str], type_params: set[str]) -> str:
        parts = ["<"]
        self.expect("<")
        if self.at(">"):  # diamond
            self.next()
            return "<>"
        while True:
            if self.at("?"):
                self.next()
                parts.append("?")
                if self.at_ident("extends") or self.at_ident("super"):
                    kw = self.next().value
                    parts.append(f" {kw} ")
                    parts.append(self.parse_type_expr(refs, type_params))
            else:
                parts.append(self.parse_type_expr(refs, type_params))
            while self.at("&"):  # intersection bound
                self.next()
                parts.append("&")
                parts.append(self.parse_type_expr(refs, type_params))
            if self.at(","):
                self.next()
                parts.append(",")
                continue
            self.expect(">")
            parts.append(">")
            return "".join(parts)

    def parse_ref_list(self, refs_out: list[str], type_params: set[str]) -> list[str]:
        """Comma-separated type references (extends/implements clauses)."""
        names: list[str] = []
        while True:
            before = len(refs_out)
            self.parse_type_expr(refs_out, type_params)
            if len(refs_out) > before:
                names.append(refs_out[before])  # head name; flattened generics follow
            if self.at(","):
                self.next()
                continue
            return names


def parse_unit(text: str, path: str) -> RawUnit:
    """Parse one compilation unit. Raises ParseError; never crashes or hangs."""
    try:
        return _parse_unit_inner(text, path)
    except ParseError:
        raise
    except RecursionError:
        raise ParseError(path, 0, "nesting too deep") from None
    except Exception as exc:  # totality guard: malformed input must not escape as a crash
        raise ParseError(path, 0, f"unrecognized construct ({exc.__class__.__name__})") from exc


def _parse_unit_inner(text: str, path: str) -> RawUnit:
    clean = _strip_comments_and_literals(text)
    p = _Parser(_tokenize(clean), path)
    unit = RawUnit(path=path)

    p.skip_annotations()
    if p.at_ident("package"):
        p.next()
        parts = [p.expect_ident().value]
        while p.at("."):
            p.next()
            parts.append(p.expect_ident().value)
        p.expect(";")
        unit.package_name = ".".join(parts)

    while True:
        p.skip_annotations()
        if p.at_ident("import"):
            p.next()
            if p.at_ident("static"):
                p.next()
            parts = [p.expect_ident().value]
            on_demand = False
            while p.at("."):
                p.next()
                if p.at("*"):
                    p.next()
                    on_demand = True
                    break
                parts.append(p.expect_ident().value)
            p.expect(";")
            unit.imports.append((".".join(parts), on_demand))
        else:
            break

    while p.peek().kind != "eof":
        if p.at(";"):
            p.next()
            continue
        mods = p.collect_modifiers()
        decl = _parse_type_decl(p, mods)
        if decl is not None:
            unit.declarations.append(decl)
    return unit


def _skip_non_model_decl(p: _Parser) -> bool:
    """Consume a tolerated declaration (record, annotation type); True if one was seen."""
    if p.at("@") and p.peek(1).value == "interface":
        p.next(), p.next()
        p.expect_ident()
        p.expect("{")
        p.skip_balanced("{", "}")
        return True
    if p.at_ident("record"):
        p.next()
        p.expect_ident()
        if p.at("<"):
            p.parse_type_params_text()
        p.expect("(")
        p.skip_balanced("(", ")")
        while not p.at("{"):
            if p.peek().kind == "eof":
                p.fail("expected record body")
            p.next()
        p.next()
        p.skip_balanced("{", "}")
        return True
    return False


def _parse_type_decl(p: _Parser, mods: list[str]) -> RawType | None:
    """Parse a type declaration whose modifiers are already consumed."""
    if _skip_non_model_decl(p):
        return None

    kw = p.peek()
    if kw.kind != "ident" or kw.value not in ("class", "interface", "enum"):
        found = "end of input" if kw.kind == "eof" else repr(kw.value)
        p.fail(f"expected type declaration, found {found}")
    p.next()
    kind = {"class": TypeKind.CLASS, "interface": TypeKind.INTERFACE, "enum": TypeKind.ENUM}[
        kw.value
    ]
    name = p.expect_ident().value

    type_params: set[str] = set()
    tp_text = ""
    if p.at("<"):
        tp_text, type_params = p.parse_type_params_text()

    extends_refs: list[str] = []
    implements_refs: list[str] = []
    header_tail: list[str] = []
    if p.at_ident("extends"):
        p.next()
        names = p.parse_ref_list(extends_refs, type_params)
        header_tail.append("extends " + ",".join(names))
    if p.at_ident("implements"):
        p.next()
        names = p.parse_ref_list(implements_refs, type_params)
        header_tail.append("implements " + ",".join(names))
    if p.at_ident("permits"):  # sealed hierarchy: tolerated, no model element
        p.next()
        p.parse_ref_list([], type_params)
    if kind is TypeKind.INTERFACE:
        # an interface's `extends` list already landed in extends_refs
        implements_refs = []

    rtype = RawType(
        kind=kind,
        name=name,
        declaration_text=" ".join(mods + [kw.value, name + tp_text] + header_tail),
        line=kw.line,
        extends_refs=extends_refs,
        implements_refs=implements_refs,
    )

    p.expect("{")
    if kind is TypeKind.ENUM:
        _parse_enum_constants(p)
    while not p.at("}"):
        if p.peek().kind == "eof":
            p.fail("unterminated type body")
        if p.at(";"):
            p.next()
            continue
        _parse_member(p, rtype, type_params)
    p.expect("}")
    return rtype


def _parse_enum_constants(p: _Parser):
    """Consume the constant list; constants are values, not model members."""
    while True:
        p.skip_annotations()
        if p.at(";"):
            p.next()
            return
        if p.at("}"):
            return
        p.expect_ident()
        if p.at("("):
            p.next()
            p.skip_balanced("(", ")")
        if p.at("{"):  # constant with a body
            p.next()
            p.skip_balanced("{", "}")
        if p.at(","):
            p.next()
            continue
        if p.at(";"):
            p.next()
            return
        if p.at("}"):
            return
        p.fail(f"unexpected token in enum constants: {p.peek().value!r}")


def _parse_member(p: _Parser, rtype: RawType, outer_params: set[str]):
    mods = p.collect_modifiers()

    nxt = p.peek()
    if (nxt.kind == "ident" and nxt.value in ("class", "interface", "enum", "record")) or (
        p.at("@") and p.peek(1).value == "interface"
    ):
        nested = _parse_type_decl(p, mods)
        if nested is not None:
            rtype.nested.append(nested)
        return

    if p.at("{"):  # static or instance initializer
        p.next()
        p.skip_balanced("{", "}")
        return

    method_params: set[str] = set(outer_params)
    tp_text = ""
    if p.at("<"):
        tp_text, extra = p.parse_type_params_text()
        method_params |= extra

    # constructor: the enclosing type's simple name directly followed by "("
    if p.at_ident(rtype.name) and p.peek(1).value == "(":
        p.next()
        member = RawMember(kind=MemberKind.METHOD, name="<init>", declaration_text="")
        params_text = _parse_params(p, member.type_refs, method_params)
        member.declaration_text = _join_decl(mods, tp_text, "", rtype.name, params_text)
        _finish_method(p, member, method_params)
        rtype.members.append(member)
        return

    type_refs: list[str] = []
    type_text = p.parse_type_expr(type_refs, method_params)
    name_tok = p.expect_ident()

    if p.at("("):
        member = RawMember(
            kind=MemberKind.METHOD, name=name_tok.value, declaration_text="", type_refs=type_refs
        )
        params_text = _parse_params(p, member.type_refs, method_params)
        member.declaration_text = _join_decl(mods, tp_text, type_text, name_tok.value, params_text)
        _finish_method(p, member, method_params)
        rtype.members.append(member)
        return

    # field declaration, possibly with several declarators
    names = [name_tok.value]
    suffix = ""
    while p.at("[") and p.peek(1).value == "]":
        p.next(), p.next()
        suffix = "[]"
    body_refs: list[str] = []
    while True:
        if p.at("="):
            p.next()
            _skip_initializer(p, body_refs)
        if p.at(","):
            p.next()
            names.append(p.expect_ident().value)
            while p.at("[") and p.peek(1).value == "]":
                p.next(), p.next()
            continue
        p.expect(";")
        break
    for n in names:
        rtype.members.append(
            RawMember(
                kind=MemberKind.FIELD,
                name=n,
                declaration_text=_join_decl(mods, "", type_text + suffix, n, None),
                type_refs=list(type_refs),
                body_refs=list(body_refs),
            )
        )


def _parse_params(p: _Parser, refs: list[str], type_params: set[str]) -> str:
    p.expect("(")
    texts: list[str] = []
    if p.at(")"):
        p.next()
        return "()"
    while True:
        p.skip_annotations()
        if p.at_ident("final"):
            p.next()
        t = p.parse_type_expr(refs, type_params)
        p.expect_ident()
        while p.at("[") and p.peek(1).value == "]":
            p.next(), p.next()
            t += "[]"
        texts.append(t)
        if p.at(","):
            p.next()
            continue
        p.expect(")")
        return "(" + ",".join(texts) + ")"


def _finish_method(p: _Parser, member: RawMember, type_params: set[str]):
    while p.at("[") and p.peek(1).value == "]":
        p.next(), p.next()
    if p.at_ident("throws"):
        # recognized but not modeled: thrown types are neither signature nor dependency
        p.next()
        p.parse_ref_list([], type_params)
    if p.at(";"):
        p.next()
        return
    if p.at_ident("default"):  # annotation-member default: tolerated
        while not p.at(";"):
            if p.peek().kind == "eof":
                p.fail("unterminated default clause")
            p.next()
        p.next()
        return
    p.expect("{")
    p.skip_balanced("{", "}", harvest=member.body_refs)


def _skip_initializer(p: _Parser, harvest: list[str]):
    """Consume an initializer expression up to `,` or `;` at bracket depth 0.

    `new Type<...>` is consumed as a type expression so that commas inside
    generic arguments cannot be mistaken for declarator separators.
    """
    depth = 0
    prev = "="
    while True:
        tok = p.peek()
        if tok.kind == "eof":
            p.fail("unterminated initializer")
        if depth == 0 and tok.value in (",", ";"):
            return
        if tok.kind == "ident" and tok.value == "new" and p.peek(1).kind == "ident":
            p.next()
            _consume_new_type(p, harvest)
            prev = ">"
            continue
        p.next()
        if tok.value in "({[":
            depth += 1
        elif tok.value in ")}]":
            depth -= 1
            if depth < 0:
                p.fail("unbalanced initializer")
        elif tok.kind == "ident" and tok.value[0].isupper() and prev != ".":
            harvest.append(tok.value)
        prev = tok.value


def _consume_new_type(p: _Parser, harvest: list[str]):
    """Consume the type after `new`, harvesting with body-token semantics."""
    head = p.expect_ident()
    if head.value[0].isupper():
        harvest.append(head.value)
    while p.at(".") and p.peek(1).kind == "ident":
        p.next(), p.next()  # qualified segments read members off the head token
    if p.at("<"):
        p.next()
        angle = 1
        prev = "<"
        while angle > 0:
            tok = p.next()
            if tok.kind == "eof":
                p.fail("unterminated type arguments")
            if tok.value == "<":
                angle += 1
            elif tok.value == ">":
                angle -= 1
            elif tok.kind == "ident" and tok.value[0].isupper() and prev != ".":
                harvest.append(tok.value)
            prev = tok.value


def _join_decl(mods: list[str], tp_text: str, type_text: str, name: str, params: str | None) -> str:
    parts = list(mods)
    if tp_text:
        parts.append(tp_text)
    if type_text:
        parts.append(type_text)
    parts.append(name + (params or ""))
    return " ".join(parts)

"""Conceptual schema model: fact types, object types, roles, subtyping.

A schema is a set of types split into object types and relationship (fact)
types, a partition of roles over the fact types, a player function from
roles to types, and two subtyping predicates (spec, poly) over object
types.  From the subtyping edges we materialize two closures:

* ``idf_by`` -- the transitive closure of spec and poly edges (property
  inheritance between object types).
* ``type_related`` -- the equivalence closure of ``idf_by``: reflexive over
  all types, symmetric and transitive.  Two types are related iff they may
  share instances; this gates every path-step and associative link.

Schemas are parsed from a small line-oriented DSL (see ``parse_schema``)
and are immutable once constructed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = [
    "Diagnostic",
    "DiagnosticError",
    "NamingEntry",
    "Schema",
    "parse_schema",
    "serialize_schema",
    "default_naming",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")


@dataclass(frozen=True)
class Diagnostic:
    """One parse or validation finding.  ``code`` is stable across releases."""

    severity: str  # "error" | "warning"
    code: str
    message: str
    line: int | None = None
    col: int | None = None

    def render(self) -> str:
        loc = f"{self.line}:{self.col}: " if self.line is not None else ""
        return f"{loc}{self.severity}: [{self.code}] {self.message}"


class DiagnosticError(Exception):
    """Parse or validation failure carrying every collected diagnostic."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.render() for d in self.diagnostics))


@dataclass(frozen=True)
class NamingEntry:
    """Display text for a type or role.

    For roles, ``fwd`` is the connective used when entering the role
    (player side to fact side) and ``rev`` when exiting it.  A phrase may
    contain a single ``|`` marking where the supertype-hop annotation is
    inserted; it renders as a space otherwise.
    """

    display: str | None = None
    fwd: str | None = None
    rev: str | None = None


class _UnionFind:
    """Disjoint sets over type identifiers, with path compression."""

    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _transitive_closure(edges: frozenset[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    succ: dict[str, set[str]] = {}
    for x, y in edges:
        succ.setdefault(x, set()).add(y)
    closed: set[tuple[str, str]] = set()
    for start in succ:
        seen: set[str] = set()
        stack = list(succ[start])
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(succ.get(node, ()))
        closed.update((start, y) for y in seen)
    return frozenset(closed)


@dataclass
class Schema:
    """A validated, fully indexed conceptual schema.

    ``types`` keeps declaration order; all derived enumerations downstream
    (navigation alternatives, serialization) lean on that order for
    determinism.  Construction validates every structural invariant and
    raises ``DiagnosticError`` if any is broken.
    """

    types: tuple[str, ...]
    obj_types: frozenset[str]
    rel_types: frozenset[str]
    roles_partition: dict[str, tuple[str, ...]]
    player: dict[str, str]
    spec_edges: frozenset[tuple[str, str]]
    poly_edges: frozenset[tuple[str, str]]
    naming: dict[str, NamingEntry] = field(default_factory=dict)
    contractions: dict[tuple[str, str], str] = field(default_factory=dict)

    # Derived indexes, filled in __post_init__.
    roles: tuple[str, ...] = field(init=False, repr=False, compare=False, default=())
    _rel_of: dict[str, str] = field(init=False, repr=False, compare=False, default_factory=dict)
    _idf_by: frozenset[tuple[str, str]] = field(init=False, repr=False, compare=False, default=frozenset())
    _component: dict[str, str] = field(init=False, repr=False, compare=False, default_factory=dict)
    _undirected: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        problems = self._validate()
        if problems:
            raise DiagnosticError(problems)
        self._index()

    def _validate(self) -> list[Diagnostic]:
        out: list[Diagnostic] = []

        def err(code: str, message: str) -> None:
            out.append(Diagnostic("error", code, message))

        type_set = set(self.types)
        if len(type_set) != len(self.types):
            err("duplicate-id", "duplicate type identifier in declaration list")
        if type_set != self.obj_types | self.rel_types:
            err("unknown-type", "obj_types and rel_types must cover exactly the declared types")

        seen_roles: set[str] = set()
        for f, block in self.roles_partition.items():
            if f not in self.rel_types:
                err("unknown-type", f"role block declared for non-relationship type {f!r}")
            if not block:
                err("empty-fact", f"relationship type {f!r} declares no roles")
            for r in block:
                if r in seen_roles:
                    err("duplicate-id", f"role {r!r} appears in more than one relationship type")
                if r in type_set:
                    err("duplicate-id", f"identifier {r!r} used for both a type and a role")
                seen_roles.add(r)
        if set(self.rel_types) - set(self.roles_partition):
            err("empty-fact", "every relationship type needs a role block")

        if set(self.player) != seen_roles:
            err("unknown-player", "player mapping must be total on the declared roles")
        for r, t in self.player.items():
            if t not in type_set:
                err("unknown-player", f"role {r!r} names unknown player {t!r}")

        for name, edges in (("spec", self.spec_edges), ("poly", self.poly_edges)):
            for x, y in edges:
                for end in (x, y):
                    if end not in type_set:
                        err("unknown-type", f"{name} edge names unknown type {end!r}")
                    elif end not in self.obj_types:
                        err("non-object-type", f"{name} edge endpoint {end!r} is not an object type")

        closure = _transitive_closure(self.spec_edges | self.poly_edges)
        cyclic = sorted({x for x, y in closure if x != y and (y, x) in closure})
        if cyclic:
            err("cyclic-hierarchy", f"subtype hierarchy has a cycle through {', '.join(cyclic)}")

        for ident, entry in self.naming.items():
            if ident not in type_set and ident not in seen_roles:
                err("unknown-type", f"naming entry for unknown identifier {ident!r}")
            for text in (entry.display, entry.fwd, entry.rev):
                if text is not None and not text.strip():
                    err("empty-name", f"blank naming text for {ident!r}")

        for (r_in, r_out), phrase in self.contractions.items():
            if r_in not in seen_roles or r_out not in seen_roles:
                err("unknown-role", f"contraction names unknown role {r_in!r}/{r_out!r}")
            elif r_in == r_out:
                err("contract-invalid", f"contraction must join two distinct roles, got {r_in!r} twice")
            elif self._owner(r_in) != self._owner(r_out):
                err("contract-invalid", f"contraction roles {r_in!r} and {r_out!r} belong to different fact types")
            if not phrase.strip():
                err("empty-name", f"blank contraction phrase for {r_in!r}/{r_out!r}")
        return out

    def _owner(self, role: str) -> str | None:
        for f, block in self.roles_partition.items():
            if role in block:
                return f
        return None

    def _index(self) -> None:
        roles: list[str] = []
        for f in self.types:
            if f in self.roles_partition:
                for r in self.roles_partition[f]:
                    roles.append(r)
                    self._rel_of[r] = f
        self.roles = tuple(roles)

        self._idf_by = _transitive_closure(self.spec_edges | self.poly_edges)

        uf = _UnionFind(self.types)
        undirected: dict[str, list[str]] = {t: [] for t in self.types}
        for x, y in self.spec_edges | self.poly_edges:
            uf.union(x, y)
            if y not in undirected[x]:
                undirected[x].append(y)
            if x not in undirected[y]:
                undirected[y].append(x)
        order = {t: i for i, t in enumerate(self.types)}
        self._undirected = {t: tuple(sorted(ns, key=order.__getitem__)) for t, ns in undirected.items()}
        self._component = {t: uf.find(t) for t in self.types}

    # -- queries -----------------------------------------------------------

    def has_type(self, t: str) -> bool:
        return t in self._component

    def has_role(self, r: str) -> bool:
        return r in self._rel_of

    def rel_of(self, role: str) -> str:
        """The relationship type owning ``role``."""
        if role not in self._rel_of:
            raise KeyError(f"unknown role {role!r}")
        return self._rel_of[role]

    def player_of(self, role: str) -> str:
        if role not in self.player:
            raise KeyError(f"unknown role {role!r}")
        return self.player[role]

    def arity(self, rel_type: str) -> int:
        if rel_type not in self.roles_partition:
            raise KeyError(f"unknown relationship type {rel_type!r}")
        return len(self.roles_partition[rel_type])

    def idf_by(self) -> frozenset[tuple[str, str]]:
        """Transitive closure of the spec and poly edges."""
        return self._idf_by

    def type_related(self, x: str, y: str) -> bool:
        """Whether ``x`` and ``y`` may share instances (equivalence closure)."""
        for t in (x, y):
            if t not in self._component:
                raise KeyError(f"unknown type {t!r}")
        return x == y or self._component[x] == self._component[y]

    def related_types(self, x: str) -> tuple[str, ...]:
        """All types related to ``x`` but distinct from it, nearest first.

        Nearness is breadth-first distance in the undirected subtype graph;
        ties keep declaration order.  This puts a direct supertype ahead of
        a transitive one when associations are listed.
        """
        if x not in self._component:
            raise KeyError(f"unknown type {x!r}")
        out: list[str] = []
        seen = {x}
        frontier = [x]
        while frontier:
            nxt: list[str] = []
            for t in frontier:
                for n in self._undirected[t]:
                    if n not in seen:
                        seen.add(n)
                        out.append(n)
                        nxt.append(n)
            frontier = nxt
        return tuple(out)

    def display(self, ident: str) -> str:
        entry = self.naming.get(ident)
        if entry is not None and entry.display is not None:
            return entry.display
        return ident.lower()


def default_naming(schema: Schema) -> Schema:
    """Fill in missing display names and role phrases from identifiers.

    Types default to their lowercased identifier; roles get templated
    connectives (``with as <role>`` forward, ``being <role> of`` reverse).
    A fully named schema comes back unchanged.
    """
    naming = dict(schema.naming)
    changed = False
    for t in schema.types:
        entry = naming.get(t, NamingEntry())
        if entry.display is None:
            naming[t] = NamingEntry(display=t.lower(), fwd=entry.fwd, rev=entry.rev)
            changed = True
    for f, block in schema.roles_partition.items():
        for r in block:
            entry = naming.get(r, NamingEntry())
            display = entry.display if entry.display is not None else r.lower()
            fwd = entry.fwd if entry.fwd is not None else f"with as {r.lower()}"
            rev = entry.rev if entry.rev is not None else f"being {r.lower()} of"
            if (display, fwd, rev) != (entry.display, entry.fwd, entry.rev):
                naming[r] = NamingEntry(display=display, fwd=fwd, rev=rev)
                changed = True
    if not changed:
        return schema
    return Schema(
        types=schema.types,
        obj_types=schema.obj_types,
        rel_types=schema.rel_types,
        roles_partition=schema.roles_partition,
        player=schema.player,
        spec_edges=schema.spec_edges,
        poly_edges=schema.poly_edges,
        naming=naming,
        contractions=schema.contractions,
    )


# -- DSL parsing -------------------------------------------------------------
#
#   object <Id> ["display name"]
#   fact <Id> [objectified] ["display name"] {
#     role <Id> player <TypeId> [fwd "phrase"] [rev "phrase"]
#   }
#   spec <SubId> <SuperId>
#   poly <Id1> <Id2>
#   contract <RoleIdA> <RoleIdB> "phrase"
#
# Lines are independent apart from fact blocks; `#` starts a comment.

_TOKEN = re.compile(r'"([^"]*)"|(\S+)')


@dataclass(frozen=True)
class _Tok:
    text: str
    quoted: bool
    line: int
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks: list[_Tok] = []
    for m in _TOKEN.finditer(line):
        if m.group(1) is not None:
            toks.append(_Tok(m.group(1), True, lineno, m.start() + 1))
        else:
            word = m.group(2)
            if word.startswith("#"):
                break
            toks.append(_Tok(word, False, lineno, m.start() + 1))
    return toks


class _LineParser:
    """Cursor over one line's tokens with diagnostic-producing accessors."""

    def __init__(self, toks: list[_Tok], diags: list[Diagnostic]):
        self.toks = toks
        self.i = 0
        self.diags = diags

    def error(self, code: str, message: str) -> None:
        anchor = self.toks[min(self.i, len(self.toks) - 1)]
        self.diags.append(Diagnostic("error", code, message, anchor.line, anchor.col))

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def ident(self, what: str) -> str | None:
        tok = self.peek()
        if tok is None or tok.quoted or not _IDENT.match(tok.text):
            self.error("syntax", f"expected {what} identifier")
            return None
        self.i += 1
        return tok.text

    def keyword(self, word: str) -> bool:
        tok = self.peek()
        if tok is None or tok.quoted or tok.text != word:
            self.error("syntax", f"expected keyword {word!r}")
            return False
        self.i += 1
        return True

    def quoted(self, what: str) -> str | None:
        tok = self.peek()
        if tok is None or not tok.quoted:
            self.error("syntax", f"expected quoted {what}")
            return None
        self.i += 1
        return tok.text

    def opt_quoted(self) -> str | None:
        tok = self.peek()
        if tok is not None and tok.quoted:
            self.i += 1
            return tok.text
        return None

    def opt_word(self, word: str) -> bool:
        tok = self.peek()
        if tok is not None and not tok.quoted and tok.text == word:
            self.i += 1
            return True
        return False

    def expect_end(self) -> None:
        if not self.done():
            self.error("syntax", "unexpected trailing tokens")


def parse_schema(source: str) -> Schema:
    """Parse the schema DSL.  Raises ``DiagnosticError`` on any error.

    The parser recovers per line so one bad declaration does not hide the
    next; all diagnostics come back together.  Forward references are fine:
    names are resolved after the whole source has been read.
    """
    diags: list[Diagnostic] = []
    types: list[str] = []
    obj_types: set[str] = set()
    rel_types: set[str] = set()
    partition: dict[str, list[str]] = {}
    player_refs: list[tuple[str, str, _Tok]] = []  # (role, player, token)
    edge_refs: list[tuple[str, str, str, _Tok]] = []  # (kind, a, b, token)
    contract_refs: list[tuple[str, str, str, _Tok]] = []
    naming: dict[str, NamingEntry] = {}
    declared: dict[str, _Tok] = {}

    def declare(name: str, tok: _Tok) -> bool:
        if name in declared:
            diags.append(
                Diagnostic("error", "duplicate-id", f"identifier {name!r} already declared", tok.line, tok.col)
            )
            return False
        declared[name] = tok
        return True

    lines = source.splitlines()
    current_fact: str | None = None
    fact_open_tok: _Tok | None = None

    for lineno, raw in enumerate(lines, start=1):
        toks = _tokenize(raw, lineno)
        if not toks:
            continue
        p = _LineParser(toks, diags)
        head = toks[0].text

        if current_fact is not None:
            if head == "}":
                p.i = 1
                p.expect_end()
                if not partition[current_fact]:
                    diags.append(
                        Diagnostic(
                            "error", "empty-fact", f"relationship type {current_fact!r} declares no roles",
                            toks[0].line, toks[0].col,
                        )
                    )
                current_fact = None
                continue
            if head != "role":
                p.error("syntax", "expected 'role' line or '}' inside fact block")
                continue
            p.i = 1
            role = p.ident("role")
            if role is None or not p.keyword("player"):
                continue
            player = p.ident("player type")
            if player is None:
                continue
            fwd = p.quoted("phrase") if p.opt_word("fwd") else None
            rev = p.quoted("phrase") if p.opt_word("rev") else None
            p.expect_end()
            if declare(role, toks[1]):
                partition[current_fact].append(role)
                player_refs.append((role, player, toks[3]))
                if fwd is not None or rev is not None:
                    naming[role] = NamingEntry(fwd=fwd, rev=rev)
            continue

        if head == "object":
            p.i = 1
            name = p.ident("object type")
            if name is None:
                continue
            display = p.opt_quoted()
            p.expect_end()
            if declare(name, toks[1]):
                types.append(name)
                obj_types.add(name)
                if display is not None:
                    naming[name] = NamingEntry(display=display)
        elif head == "fact":
            p.i = 1
            name = p.ident("fact type")
            if name is None:
                continue
            objectified = p.opt_word("objectified")
            display = p.opt_quoted()
            if not p.keyword("{"):
                continue
            p.expect_end()
            if declare(name, toks[1]):
                types.append(name)
                rel_types.add(name)
                if objectified:
                    obj_types.add(name)
                partition[name] = []
                if display is not None:
                    naming[name] = NamingEntry(display=display)
                current_fact = name
                fact_open_tok = toks[0]
            else:
                current_fact = name  # still consume the block to keep recovering
                fact_open_tok = toks[0]
                partition.setdefault(name, [])
        elif head in ("spec", "poly"):
            p.i = 1
            a = p.ident("object type")
            b = p.ident("object type") if a is not None else None
            if a is None or b is None:
                continue
            p.expect_end()
            edge_refs.append((head, a, b, toks[1]))
        elif head == "contract":
            p.i = 1
            a = p.ident("role")
            b = p.ident("role") if a is not None else None
            if a is None or b is None:
                continue
            phrase = p.quoted("phrase")
            if phrase is None:
                continue
            p.expect_end()
            contract_refs.append((a, b, phrase, toks[1]))
        else:
            p.error("syntax", f"unknown declaration {head!r}")

    if current_fact is not None and fact_open_tok is not None:
        diags.append(
            Diagnostic(
                "error", "syntax", f"fact block {current_fact!r} is never closed",
                fact_open_tok.line, fact_open_tok.col,
            )
        )

    # Resolution pass: names may be used before their declaration.
    type_set = set(types)
    role_set = set(partition_role for block in partition.values() for partition_role in block)
    spec_edges: set[tuple[str, str]] = set()
    poly_edges: set[tuple[str, str]] = set()
    contractions: dict[tuple[str, str], str] = {}

    for role, player, tok in player_refs:
        if player not in type_set:
            diags.append(
                Diagnostic("error", "unknown-player", f"role {role!r} names unknown player {player!r}", tok.line, tok.col)
            )
    for kind, a, b, tok in edge_refs:
        bucket = spec_edges if kind == "spec" else poly_edges
        ok = True
        for end in (a, b):
            if end not in type_set:
                diags.append(Diagnostic("error", "unknown-type", f"{kind} edge names unknown type {end!r}", tok.line, tok.col))
                ok = False
            elif end not in obj_types:
                diags.append(
                    Diagnostic("error", "non-object-type", f"{kind} edge endpoint {end!r} is not an object type", tok.line, tok.col)
                )
                ok = False
        if ok:
            bucket.add((a, b))
    for a, b, phrase, tok in contract_refs:
        ok = True
        for r in (a, b):
            if r not in role_set:
                diags.append(Diagnostic("error", "unknown-role", f"contraction names unknown role {r!r}", tok.line, tok.col))
                ok = False
        if ok:
            contractions[(a, b)] = phrase

    if any(d.severity == "error" for d in diags):
        raise DiagnosticError(diags)

    player_map = {role: player for role, player, _ in player_refs}
    try:
        schema = Schema(
            types=tuple(types),
            obj_types=frozenset(obj_types),
            rel_types=frozenset(rel_types),
            roles_partition={f: tuple(block) for f, block in partition.items()},
            player=player_map,
            spec_edges=frozenset(spec_edges),
            poly_edges=frozenset(poly_edges),
            naming=naming,
            contractions=contractions,
        )
    except DiagnosticError as exc:
        raise DiagnosticError(diags + exc.diagnostics) from None
    return default_naming(schema)


def _quote(text: str) -> str:
    return f'"{text}"'


def serialize_schema(schema: Schema) -> str:
    """Emit the canonical DSL text: declaration order, explicit naming."""
    order = {t: i for i, t in enumerate(schema.types)}
    role_order = {r: i for i, r in enumerate(schema.roles)}
    out: list[str] = []
    for t in schema.types:
        if t in schema.rel_types:
            flag = " objectified" if t in schema.obj_types else ""
            out.append(f"fact {t}{flag} {_quote(schema.display(t))} {{")
            for r in schema.roles_partition[t]:
                entry = schema.naming.get(r, NamingEntry())
                parts = [f"  role {r} player {schema.player[r]}"]
                if entry.fwd is not None:
                    parts.append(f'fwd {_quote(entry.fwd)}')
                if entry.rev is not None:
                    parts.append(f'rev {_quote(entry.rev)}')
                out.append(" ".join(parts))
            out.append("}")
        else:
            out.append(f"object {t} {_quote(schema.display(t))}")
    for kind, edges in (("spec", schema.spec_edges), ("poly", schema.poly_edges)):
        for a, b in sorted(edges, key=lambda e: (order[e[0]], order[e[1]])):
            out.append(f"{kind} {a} {b}")
    for (a, b), phrase in sorted(schema.contractions.items(), key=lambda kv: (role_order[kv[0][0]], role_order[kv[0][1]])):
        out.append(f"contract {a} {b} {_quote(phrase)}")
    return "\n".join(out) + "\n"

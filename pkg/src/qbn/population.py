"""Sample populations and multiset evaluation of path expressions.

A population stores instances per object type and tuples per relationship
type; tuples map each role to its filler.  A path evaluates to a bag of
(anchor instance, focus instance) pairs: types contribute identity
relations over their population, a role contributes the player-to-tuple
pairs (transposed when exited), and steps compose left to right with
multiset semantics, so duplicate derivations keep their multiplicity.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .paths import EXIT, PathExpr, canonical_text, is_wellformed
from .schema import Diagnostic, DiagnosticError, Schema, _tokenize

__all__ = [
    "Population",
    "PairBag",
    "load_population",
    "relation_of_type",
    "relation_of_role",
    "evaluate",
    "compose",
    "transpose",
    "ResultView",
    "result_view",
]

PairBag = Counter  # Counter[(left instance, right instance)] -> multiplicity


@dataclass
class Population:
    """Validated instance data for one schema."""

    schema: Schema
    obj_pop: dict[str, frozenset[str]] = field(default_factory=dict)
    rel_pop: dict[str, tuple[str, ...]] = field(default_factory=dict)
    fillers: dict[str, dict[str, str]] = field(default_factory=dict)

    def instances_of(self, t: str) -> tuple[str, ...]:
        """Instances of a type: declared ones, or tuple ids for fact types."""
        if not self.schema.has_type(t):
            raise KeyError(f"unknown type {t!r}")
        if t in self.schema.rel_types:
            return self.rel_pop.get(t, ())
        return tuple(sorted(self.obj_pop.get(t, frozenset())))

    def size(self) -> int:
        distinct = set()
        for pop in self.obj_pop.values():
            distinct.update(pop)
        for tuples in self.rel_pop.values():
            distinct.update(tuples)
        return len(distinct)


def transpose(bag: PairBag) -> PairBag:
    return Counter({(b, a): m for (a, b), m in bag.items()})


def compose(left: PairBag, right: PairBag) -> PairBag:
    """Multiset relation composition: counts multiply along each join."""
    by_first: dict[str, list[tuple[str, int]]] = defaultdict(list)
    for (b, c), m in right.items():
        by_first[b].append((c, m))
    out: PairBag = Counter()
    for (a, b), m in left.items():
        for c, m2 in by_first.get(b, ()):
            out[(a, c)] += m * m2
    return out


def relation_of_type(pop: Population, t: str) -> PairBag:
    """Identity pairs over the population of ``t``."""
    return Counter({(x, x): 1 for x in pop.instances_of(t)})


def relation_of_role(pop: Population, role: str, reversed_: bool = False) -> PairBag:
    """Pairs (player instance, tuple id) for ``role``; transposed if asked."""
    rel = pop.schema.rel_of(role)
    bag: PairBag = Counter()
    for tid in pop.rel_pop.get(rel, ()):
        pair = (pop.fillers[tid][role], tid)
        bag[pair[::-1] if reversed_ else pair] += 1
    return bag


def evaluate(pop: Population, p: PathExpr) -> PairBag:
    """Compose the whole path into one bag of (anchor, focus) pairs."""
    if p.is_empty:
        raise ValueError("cannot evaluate the empty path")
    if not is_wellformed(pop.schema, p):
        raise ValueError(f"malformed path: {canonical_text(p)}")
    bag = relation_of_type(pop, p.anchor_type())
    for step, t in p.steps:
        bag = compose(bag, relation_of_role(pop, step.role, reversed_=step.kind == EXIT))
        bag = compose(bag, relation_of_type(pop, t))
    return bag


@dataclass(frozen=True)
class ResultView:
    """Tabular rendering of a pair bag, ordered by instance identifier."""

    pairs: tuple[tuple[str, str, int], ...]
    focus_counts: tuple[tuple[str, int], ...]

    def to_text(self) -> str:
        lines = ["anchor\tfocus\tcount"]
        lines.extend(f"{a}\t{b}\t{m}" for a, b, m in self.pairs)
        lines.append("focus\tcount")
        lines.extend(f"{b}\t{m}" for b, m in self.focus_counts)
        return "\n".join(lines) + "\n"


def result_view(bag: PairBag, pop: Population | None = None) -> ResultView:
    pairs = tuple((a, b, m) for (a, b), m in sorted(bag.items()))
    focus: Counter[str] = Counter()
    for (_, b), m in bag.items():
        focus[b] += m
    return ResultView(pairs, tuple(sorted(focus.items())))


# -- population DSL ----------------------------------------------------------
#
#   instance <TypeId> <InstanceId>
#   tuple <RelTypeId> <TupleId> { <RoleId> = <filler>, ... }
#
# Tuple blocks may span lines; `#` starts a comment.


def load_population(source: str, schema: Schema) -> Population:
    """Parse and validate a population; raises ``DiagnosticError``.

    Checks every filler against the player's type-relatedness class, the
    subtype-subset discipline along spec edges, and that each tuple fills
    exactly the roles of its fact type.
    """
    diags: list[Diagnostic] = []
    obj_pop: dict[str, set[str]] = defaultdict(set)
    rel_pop: dict[str, list[str]] = defaultdict(list)
    fillers: dict[str, dict[str, str]] = {}
    tuple_types: dict[str, str] = {}

    def err(code: str, message: str, line: int | None = None, col: int | None = None) -> None:
        diags.append(Diagnostic("error", code, message, line, col))

    tokens = [t for lineno, raw in enumerate(source.splitlines(), start=1) for t in _tokenize(raw, lineno)]
    i = 0

    def at(j: int):
        return tokens[j] if j < len(tokens) else None

    def skip_to_next_declaration() -> None:
        nonlocal i
        while i < len(tokens) and tokens[i].text not in ("instance", "tuple"):
            i += 1

    while i < len(tokens):
        head = tokens[i]
        if head.text == "instance" and not head.quoted:
            t, inst = at(i + 1), at(i + 2)
            if t is None or inst is None:
                err("syntax", "instance needs a type and an instance id", head.line, head.col)
                break
            i += 3
            if not schema.has_type(t.text):
                err("unknown-type", f"unknown type {t.text!r}", t.line, t.col)
            elif t.text in schema.rel_types:
                err("instance-of-rel-type", f"{t.text!r} is a relationship type; declare a tuple instead", t.line, t.col)
            else:
                obj_pop[t.text].add(inst.text)
        elif head.text == "tuple" and not head.quoted:
            t, tid, brace = at(i + 1), at(i + 2), at(i + 3)
            if t is None or tid is None or brace is None or brace.text != "{":
                err("syntax", "tuple needs a type, a tuple id and a '{' block", head.line, head.col)
                i += 1
                skip_to_next_declaration()
                continue
            i += 4
            assignments: dict[str, str] = {}
            closed = True
            while True:
                tok = at(i)
                if tok is None:
                    err("syntax", f"tuple block {tid.text!r} is never closed", tid.line, tid.col)
                    closed = False
                    break
                if tok.text == "}" and not tok.quoted:
                    i += 1
                    break
                role, eq, value = at(i), at(i + 1), at(i + 2)
                if eq is None or value is None or eq.text != "=":
                    err("syntax", "expected '<role> = <filler>' inside tuple block", tok.line, tok.col)
                    closed = False
                    skip_to_next_declaration()
                    break
                assignments[role.text] = value.text.rstrip(",")
                i += 3
                nxt = at(i)
                if nxt is not None and nxt.text == ",":
                    i += 1
            if not closed:
                continue
            if not schema.has_type(t.text) or t.text not in schema.rel_types:
                err("unknown-type", f"{t.text!r} is not a relationship type", t.line, t.col)
                continue
            if tid.text in tuple_types:
                err("duplicate-id", f"tuple id {tid.text!r} already declared", tid.line, tid.col)
                continue
            expected = set(schema.roles_partition[t.text])
            for name in assignments:
                if name not in expected:
                    err("unknown-role", f"role {name!r} does not belong to {t.text!r}", tid.line, tid.col)
            missing = expected - set(assignments)
            if missing:
                err("missing-role-filler", f"tuple {tid.text!r} lacks fillers for {', '.join(sorted(missing))}", tid.line, tid.col)
            if set(assignments) == expected:
                tuple_types[tid.text] = t.text
                rel_pop[t.text].append(tid.text)
                fillers[tid.text] = assignments
        else:
            err("syntax", f"unknown declaration {head.text!r}", head.line, head.col)
            i += 1
            skip_to_next_declaration()

    pop = Population(
        schema=schema,
        obj_pop={t: frozenset(v) for t, v in obj_pop.items()},
        rel_pop={t: tuple(v) for t, v in rel_pop.items()},
        fillers=fillers,
    )

    def lives_somewhere(inst: str, player: str) -> bool:
        for s in (player, *schema.related_types(player)):
            if s in schema.rel_types:
                if inst in pop.rel_pop.get(s, ()):
                    return True
            elif inst in pop.obj_pop.get(s, frozenset()):
                return True
        return False

    if not any(d.severity == "error" for d in diags):
        for tid, assignment in fillers.items():
            for role, inst in assignment.items():
                if not lives_somewhere(inst, schema.player[role]):
                    err(
                        "ill-typed-filler",
                        f"filler {inst!r} of role {role!r} in {tid!r} is not an instance of any type related to {schema.player[role]!r}",
                    )
        for sub, sup in sorted(schema.spec_edges):
            missing = set(pop.instances_of(sub)) - set(pop.instances_of(sup))
            if missing:
                err(
                    "spec-subset-violation",
                    f"instances of {sub!r} missing from supertype {sup!r}: {', '.join(sorted(missing))}",
                )

    if any(d.severity == "error" for d in diags):
        raise DiagnosticError(diags)
    return pop


def serialize_population(pop: Population) -> str:
    """Canonical population text (sorted; inverse of ``load_population``)."""
    out: list[str] = []
    for t in pop.schema.types:
        if t in pop.schema.rel_types:
            continue
        for inst in sorted(pop.obj_pop.get(t, frozenset())):
            out.append(f"instance {t} {inst}")
    for t in pop.schema.types:
        for tid in pop.rel_pop.get(t, ()):
            body = ", ".join(f"{r} = {pop.fillers[tid][r]}" for r in pop.schema.roles_partition[t])
            out.append(f"tuple {t} {tid} {{ {body} }}")
    return "\n".join(out) + "\n" if out else ""

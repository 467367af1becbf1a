"""Independent oracles and generators shared by the test suite.

Everything here recomputes expected values from first principles (rule
fixpoints, grammar enumeration, link-pattern matching, instance-sequence
counting) so the library code under test never checks itself.
"""

from __future__ import annotations

import random
from collections import Counter
from pathlib import Path

from qbn.paths import EMPTY, ENTER, EXIT, PathExpr, PathStep
from qbn.population import Population
from qbn.schema import Schema

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture_schema(name: str = "presidential.qbn") -> Schema:
    from qbn.schema import parse_schema

    return parse_schema((FIXTURES / name).read_text(encoding="utf-8"))


def load_fixture_population(schema: Schema, name: str = "presidential.pop") -> Population:
    from qbn.population import load_population

    return load_population((FIXTURES / name).read_text(encoding="utf-8"), schema)


# -- closure fixpoints (spec/poly derivation rules, run to saturation) -------


def idf_by_fixpoint(spec_edges, poly_edges) -> frozenset[tuple[str, str]]:
    rel = set(spec_edges) | set(poly_edges)
    while True:
        extra = {(x, z) for (x, y) in rel for (y2, z) in rel if y == y2} - rel
        if not extra:
            return frozenset(rel)
        rel |= extra


def type_related_fixpoint(types, idf_pairs) -> frozenset[tuple[str, str]]:
    rel = {(t, t) for t in types} | set(idf_pairs)
    while True:
        extra = {(y, x) for (x, y) in rel} - rel
        extra |= {(x, z) for (x, y) in rel for (y2, z) in rel if y == y2} - rel
        if not extra:
            return frozenset(rel)
        rel |= extra


# -- reversal by the recursive definition -------------------------------------


def reverse_recursive(p: PathExpr) -> PathExpr:
    """Rev(P.r.x) = x.r_bar.Rev(P); Rev(P.r_bar.x) = x.r.Rev(P); Rev(x) = x."""
    if not p.steps:
        return p
    (last_step, last_t) = p.steps[-1]
    prefix = PathExpr(p.anchor, p.steps[:-1])
    prefix_focus = prefix.focus_type()
    flipped = PathStep(EXIT if last_step.kind == ENTER else ENTER, last_step.role)
    rest = reverse_recursive(prefix)
    return PathExpr(last_t, ((flipped, prefix_focus),) + rest.steps)


# -- grammar-style path enumeration -------------------------------------------


def legal_stop(schema: Schema, t: str, strict: bool = False) -> bool:
    if t in schema.obj_types:
        return True
    return not strict and t in schema.rel_types and len(schema.roles_partition.get(t, ())) >= 3


def enumerate_paths(schema: Schema, max_steps: int, include_swaps: bool = True, strict: bool = False):
    """Yield every complete well-formed path with at most ``max_steps`` steps.

    Generation is by production application: anchors are the legal stop
    types (object types when strict), an entered role lands on any type
    related to its fact type, an exited role on any type related to its
    player.  Entering a fact type that cannot carry the focus leaves the
    path pending until a different role of the same fact type exits it.
    Swapped landing types are skipped when ``include_swaps`` is false.
    """

    def landings(structural: str):
        if include_swaps:
            return (structural, *schema.related_types(structural))
        return (structural,)

    stack: list[tuple[PathExpr, bool]] = []
    for t in schema.types:
        if (t in schema.obj_types) if strict else legal_stop(schema, t):
            p = PathExpr(t)
            yield p
            stack.append((p, False))
    while stack:
        p, pending = stack.pop()
        if len(p.steps) >= max_steps:
            continue
        focus = p.focus_type()
        if pending:
            entered = p.steps[-1][0].role
            fact = schema.rel_of(entered)
            for q in schema.roles_partition[fact]:
                if q == entered:
                    continue
                for t2 in landings(schema.player[q]):
                    child = p.extend(PathStep(EXIT, q), t2)
                    yield child
                    stack.append((child, False))
            continue
        for r in schema.roles:
            fact = schema.rel_of(r)
            if schema.type_related(focus, schema.player[r]):
                for t2 in landings(fact):
                    child = p.extend(PathStep(ENTER, r), t2)
                    if legal_stop(schema, t2, strict):
                        yield child
                        stack.append((child, False))
                    elif t2 == fact and len(schema.roles_partition[fact]) >= 2:
                        stack.append((child, True))
            if schema.type_related(focus, fact):
                for t2 in landings(schema.player[r]):
                    child = p.extend(PathStep(EXIT, r), t2)
                    yield child
                    stack.append((child, False))


def bounded_universe(schema: Schema, max_steps: int, cap: int) -> list[PathExpr] | None:
    """The full path universe, or None when it exceeds ``cap`` entries."""
    out: list[PathExpr] = []
    for p in enumerate_paths(schema, max_steps):
        out.append(p)
        if len(out) > cap:
            return None
    return out


def syntactic_paths(schema: Schema, max_steps: int):
    """Every alternating sequence over the schema's symbols, formed or not."""
    frontier = [PathExpr(t) for t in schema.types]
    yield EMPTY
    for p in frontier:
        yield p
    for _ in range(max_steps):
        nxt = []
        for p in frontier:
            for kind in (ENTER, EXIT):
                for r in schema.roles:
                    for t in schema.types:
                        child = p.extend(PathStep(kind, r), t)
                        yield child
                        nxt.append(child)
        frontier = nxt


# -- link definitions as literal pattern matchers ------------------------------


def is_structural_link(schema: Schema, n: PathExpr, m: PathExpr) -> bool:
    """The four refinement link patterns, checked on the path shapes."""
    if n.is_empty:
        return not m.is_empty and not m.steps and m.anchor in schema.obj_types
    if m.is_empty or m.anchor != n.anchor:
        return False
    k = len(n.steps)
    if len(m.steps) == k + 1 and m.steps[:k] == n.steps:
        step, t = m.steps[-1]
        if step.kind == ENTER:
            return (
                t == schema.rel_of(step.role)
                and schema.type_related(n.focus_type(), schema.player[step.role])
                and legal_stop(schema, t)
            )
        return t == schema.player[step.role] and schema.type_related(
            n.focus_type(), schema.rel_of(step.role)
        )
    if len(m.steps) == k + 2 and m.steps[:k] == n.steps:
        (s1, t1), (s2, t2) = m.steps[-2:]
        return (
            s1.kind == ENTER
            and s2.kind == EXIT
            and s1.role != s2.role
            and schema.rel_of(s1.role) == schema.rel_of(s2.role)
            and t1 == schema.rel_of(s1.role)
            and t2 == schema.player[s2.role]
            and schema.type_related(n.focus_type(), schema.player[s1.role])
        )
    return False


def is_assoc_link(schema: Schema, n: PathExpr, m: PathExpr) -> bool:
    """Type swap at the path's end, or full reversal."""
    if n.is_empty or m.is_empty or n == m:
        return False
    if len(m.steps) == len(n.steps):
        if not n.steps:
            if schema.type_related(n.anchor, m.anchor):
                return True
        elif (
            m.anchor == n.anchor
            and m.steps[:-1] == n.steps[:-1]
            and m.steps[-1][0] == n.steps[-1][0]
            and schema.type_related(n.steps[-1][1], m.steps[-1][1])
        ):
            return True
    return m == reverse_recursive(n)


# -- brute-force evaluation ----------------------------------------------------


def evaluate_by_sequences(pop: Population, p: PathExpr) -> Counter:
    """Count every instance sequence consistent with the path."""
    schema = pop.schema
    seqs: list[tuple[str, ...]] = [(x,) for x in pop.instances_of(p.anchor_type())]
    for step, t in p.steps:
        fact = schema.rel_of(step.role)
        tuples = pop.rel_pop.get(fact, ())
        allowed = set(pop.instances_of(t))
        nxt: list[tuple[str, ...]] = []
        for seq in seqs:
            cur = seq[-1]
            if step.kind == ENTER:
                for tid in tuples:
                    if pop.fillers[tid][step.role] == cur and tid in allowed:
                        nxt.append(seq + (tid,))
            else:
                if cur in tuples:
                    filler = pop.fillers[cur][step.role]
                    if filler in allowed:
                        nxt.append(seq + (filler,))
        seqs = nxt
    return Counter((s[0], s[-1]) for s in seqs)


# -- random generators ----------------------------------------------------------


def random_schema(
    rng: random.Random,
    max_types: int = 12,
    max_edges: int = 10,
    edges_on_objectified: bool = True,
) -> Schema:
    """A valid random schema; edges follow declaration order, so no cycles."""
    n_types = rng.randint(1, max_types)
    names = [f"T{i}" for i in range(n_types)]
    obj: set[str] = set()
    rel: set[str] = set()
    partition: dict[str, tuple[str, ...]] = {}
    player: dict[str, str] = {}
    role_seq = 0
    for name in names:
        if len(obj) == 0 or rng.random() < 0.7:
            obj.add(name)
            if rng.random() < 0.15:
                rel.add(name)  # objectified fact type
        else:
            rel.add(name)
    for name in names:
        if name in rel:
            arity = rng.choice([1, 2, 2, 2, 3])
            block = []
            for _ in range(arity):
                role = f"r{role_seq}"
                role_seq += 1
                block.append(role)
                player[role] = rng.choice(names)
            partition[name] = tuple(block)
    edge_pool = [t for t in names if t in obj and (edges_on_objectified or t not in rel)]
    spec_edges: set[tuple[str, str]] = set()
    poly_edges: set[tuple[str, str]] = set()
    if len(edge_pool) >= 2:
        for _ in range(rng.randint(0, max_edges)):
            a, b = rng.sample(edge_pool, 2)
            if names.index(a) > names.index(b):
                a, b = b, a  # later-declared type is the subtype
            (spec_edges if rng.random() < 0.7 else poly_edges).add((b, a))
    return Schema(
        types=tuple(names),
        obj_types=frozenset(obj),
        rel_types=frozenset(rel),
        roles_partition=partition,
        player=player,
        spec_edges=frozenset(spec_edges),
        poly_edges=frozenset(poly_edges),
    )


def random_population(rng: random.Random, schema: Schema, max_instances: int = 50) -> Population:
    """A valid random population honoring subset and typing invariants."""
    supers = {t: [y for (x, y) in schema.spec_edges if x == t] for t in schema.types}
    ordered: list[str] = []
    seen: set[str] = set()

    def visit(t: str) -> None:
        if t in seen:
            return
        seen.add(t)
        for y in supers[t]:
            visit(y)
        ordered.append(t)

    for t in schema.types:
        visit(t)

    obj_pop: dict[str, frozenset[str]] = {}
    budget = max_instances
    fresh = 0
    for t in ordered:
        if t in schema.rel_types or t not in schema.obj_types:
            continue
        if supers[t]:
            candidates = set.intersection(*(set(obj_pop.get(y, frozenset())) for y in supers[t]))
            size = rng.randint(0, len(candidates))
            obj_pop[t] = frozenset(rng.sample(sorted(candidates), size))
        else:
            size = rng.randint(0, min(4, budget)) if budget > 0 else 0
            members = {f"i{fresh + j}" for j in range(size)}
            fresh += size
            budget -= size
            obj_pop[t] = frozenset(members)

    rel_pop: dict[str, tuple[str, ...]] = {}
    fillers: dict[str, dict[str, str]] = {}
    tid_seq = 0

    def instances_visible(player_type: str) -> list[str]:
        out: list[str] = []
        for s in (player_type, *schema.related_types(player_type)):
            if s in schema.rel_types:
                out.extend(rel_pop.get(s, ()))
            else:
                out.extend(sorted(obj_pop.get(s, frozenset())))
        return out

    for t in schema.types:
        if t not in schema.rel_types:
            continue
        tuples: list[str] = []
        for _ in range(rng.randint(0, 4)):
            assignment: dict[str, str] = {}
            for r in schema.roles_partition[t]:
                pool = instances_visible(schema.player[r])
                if not pool:
                    assignment = {}
                    break
                assignment[r] = rng.choice(pool)
            if assignment:
                tid = f"t{tid_seq}"
                tid_seq += 1
                tuples.append(tid)
                fillers[tid] = assignment
        rel_pop[t] = tuple(tuples)
    return Population(schema=schema, obj_pop=obj_pop, rel_pop=rel_pop, fillers=fillers)


def random_path(rng: random.Random, schema: Schema, max_steps: int = 5) -> PathExpr | None:
    """A random reachable path sampled by walking refinements/associations."""
    from qbn.navigate import associations, refinements

    starts = refinements(schema, EMPTY)
    if not starts:
        return None
    p = rng.choice(starts)
    for _ in range(rng.randint(0, max_steps)):
        moves = [m for m in refinements(schema, p) if len(m.steps) <= max_steps]
        moves += [a for a in associations(schema, p) if len(a.steps) <= max_steps]
        if not moves:
            break
        p = rng.choice(moves)
    return p

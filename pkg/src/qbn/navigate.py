"""Dynamic neighborhood computation and navigation sessions.

The graph of foci is never materialized: given a path, its refinements,
enlargements and associations are recomputed from the schema on demand.
Refinements extend the path (into a role, out of a role, or through a
fact type via two roles at once), enlargements are exactly the inverse
links, and associations swap the focus type for a related one or reverse
the whole path.

Ordering is deterministic everywhere: alternatives follow the link kind
first, then schema declaration order; association type swaps go nearest
supertype/subtype first.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .paths import EMPTY, ENTER, EXIT, PathExpr, PathStep, canonical_text, is_legal_focus, is_wellformed
from .schema import Schema
from .verbalize import VerbalizeOptions, verbalize

__all__ = [
    "Refine",
    "Enlarge",
    "Associate",
    "ReversePath",
    "Move",
    "IllegalMove",
    "NodePresentation",
    "Session",
    "refinements",
    "enlargements",
    "associations",
    "new_session",
    "present",
    "apply_move",
    "set_options",
]

EMPTY_FOCUS_TEXT = "start"


class IllegalMove(Exception):
    """The requested target is not in the focus's current environment."""


@dataclass(frozen=True)
class Refine:
    target: PathExpr


@dataclass(frozen=True)
class Enlarge:
    target: PathExpr


@dataclass(frozen=True)
class Associate:
    target: PathExpr


@dataclass(frozen=True)
class ReversePath:
    pass


Move = Refine | Enlarge | Associate | ReversePath


@dataclass(frozen=True)
class NodePresentation:
    focus_text: str
    refinements: tuple[tuple[PathExpr, str], ...]
    enlargements: tuple[tuple[PathExpr, str], ...]
    associations: tuple[tuple[PathExpr, str], ...]


@dataclass(frozen=True, eq=False)
class Session:
    """One navigation dialogue: a focus plus how it was reached."""

    schema: Schema
    focus: PathExpr = EMPTY
    history: tuple[tuple[Move, PathExpr], ...] = ()
    options: VerbalizeOptions = VerbalizeOptions()


def refinements(schema: Schema, n: PathExpr) -> list[PathExpr]:
    """All one-move extensions of ``n``, in deterministic order.

    From the empty path these are the object types (non-objectified fact
    types are not listed at the start, whatever their arity).  Otherwise:
    entering a role whose fact type can carry the focus, exiting a role of
    a fact type related to the focus, and through-steps entering one role
    and leaving by each of the n-1 other roles of the same fact type.
    """
    if n.is_empty:
        return [PathExpr(t) for t in schema.types if t in schema.obj_types]
    if not is_wellformed(schema, n):
        raise ValueError(f"malformed path: {canonical_text(n)}")
    focus = n.focus_type()
    out: list[PathExpr] = []
    for r in schema.roles:
        if schema.type_related(focus, schema.player[r]) and is_legal_focus(schema, schema.rel_of(r)):
            out.append(n.extend(PathStep(ENTER, r), schema.rel_of(r)))
    for r in schema.roles:
        if schema.type_related(focus, schema.rel_of(r)):
            out.append(n.extend(PathStep(EXIT, r), schema.player[r]))
    for r in schema.roles:
        if schema.type_related(focus, schema.player[r]):
            f = schema.rel_of(r)
            for q in schema.roles_partition[f]:
                if q != r:
                    out.append(
                        n.extend(PathStep(ENTER, r), f).extend(PathStep(EXIT, q), schema.player[q])
                    )
    return out


def enlargements(schema: Schema, n: PathExpr) -> list[PathExpr]:
    """All predecessors of ``n``: the paths having ``n`` as a refinement.

    Computed by stripping the last step (or the last two, undoing a
    through-step) and keeping the candidates that really generate ``n``.
    A single-type path enlarges to the empty path only when its type is
    listed at the start node, i.e. is an object type.
    """
    if n.is_empty:
        raise ValueError("the empty path has no enlargements")
    if not is_wellformed(schema, n):
        raise ValueError(f"malformed path: {canonical_text(n)}")
    candidates: list[PathExpr] = []
    if n.steps:
        candidates.append(PathExpr(n.anchor, n.steps[:-1]))
        if len(n.steps) >= 2:
            candidates.append(PathExpr(n.anchor, n.steps[:-2]))
    else:
        candidates.append(EMPTY)
    out: list[PathExpr] = []
    for m in candidates:
        if not m.is_empty and not is_wellformed(schema, m):
            continue
        if n in refinements(schema, m):
            out.append(m)
    return out


def associations(schema: Schema, n: PathExpr) -> list[PathExpr]:
    """Focus-type swaps (nearest related type first) plus the reversal."""
    if n.is_empty:
        raise ValueError("the empty path has no associations")
    if not is_wellformed(schema, n):
        raise ValueError(f"malformed path: {canonical_text(n)}")
    out: list[PathExpr] = []
    for y in schema.related_types(n.focus_type()):
        swapped = n.replace_focus(y)
        assert is_wellformed(schema, swapped), f"focus swap broke {canonical_text(swapped)}"
        out.append(swapped)
    rev = n.reverse()
    # The reversal is a node of its own only when derivable; a focus landed
    # on a fact type by a through-step has no anchor production to return to.
    if rev != n and is_wellformed(schema, rev):
        out.append(rev)
    return out


def new_session(schema: Schema, options: VerbalizeOptions | None = None) -> Session:
    return Session(schema=schema, options=options or VerbalizeOptions())


def _text(schema: Schema, p: PathExpr, options: VerbalizeOptions) -> str:
    return EMPTY_FOCUS_TEXT if p.is_empty else verbalize(schema, p, options)


def present(session: Session) -> NodePresentation:
    """Verbalized focus plus its direct environment, computed on demand."""
    schema, n, opts = session.schema, session.focus, session.options
    refs = refinements(schema, n)
    enls = enlargements(schema, n) if not n.is_empty else []
    assocs = associations(schema, n) if not n.is_empty else []

    def block(paths: list[PathExpr]) -> tuple[tuple[PathExpr, str], ...]:
        return tuple((p, _text(schema, p, opts)) for p in paths)

    return NodePresentation(_text(schema, n, opts), block(refs), block(enls), block(assocs))


def apply_move(session: Session, move: Move) -> Session:
    """Pure transition to a new focus; raises ``IllegalMove`` when stale."""
    schema, focus = session.schema, session.focus
    if isinstance(move, ReversePath):
        if focus.is_empty or focus.reverse() == focus or not is_wellformed(schema, focus.reverse()):
            raise IllegalMove("path reversal is not available here")
        target = focus.reverse()
    elif isinstance(move, Refine):
        target = move.target
        if target not in refinements(schema, focus):
            raise IllegalMove(f"not a refinement of the focus: {canonical_text(target)}")
    elif isinstance(move, Enlarge):
        target = move.target
        if focus.is_empty or target not in enlargements(schema, focus):
            raise IllegalMove(f"not an enlargement of the focus: {canonical_text(target)}")
    elif isinstance(move, Associate):
        target = move.target
        if focus.is_empty or target not in associations(schema, focus):
            raise IllegalMove(f"not an association of the focus: {canonical_text(target)}")
    else:
        raise IllegalMove(f"unknown move {move!r}")
    return replace(session, focus=target, history=session.history + ((move, target),))


def set_options(session: Session, options: VerbalizeOptions) -> Session:
    return replace(session, options=options)

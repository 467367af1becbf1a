"""Linear path expressions: alternating type/role chains over a schema.

A path is either empty or an anchor type followed by steps.  Each step
either enters a role (player side to fact side) or exits it (fact side
back to the player side); the type written after a step may be any type
related to the step's structural endpoint, which is how subtype swaps at
the tail stay representable.

``canonical_text`` is the stable machine syntax used by the CLI, the
service payloads and the golden files: ``A >r F <q B`` with ``>`` for
entering and ``<`` for exiting a role, and ``()`` for the empty path.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .schema import Schema

__all__ = [
    "ENTER",
    "EXIT",
    "PathStep",
    "PathExpr",
    "EMPTY",
    "is_legal_focus",
    "is_wellformed",
    "canonical_text",
    "parse_path",
]

ENTER = "enter"
EXIT = "exit"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")


@dataclass(frozen=True)
class PathStep:
    kind: str  # ENTER or EXIT
    role: str

    def flipped(self) -> PathStep:
        return PathStep(EXIT if self.kind == ENTER else ENTER, self.role)


@dataclass(frozen=True)
class PathExpr:
    """Immutable path value; extension builds new paths."""

    anchor: str | None = None
    steps: tuple[tuple[PathStep, str], ...] = ()

    @property
    def is_empty(self) -> bool:
        return self.anchor is None

    def __len__(self) -> int:
        return len(self.steps)

    def anchor_type(self) -> str:
        if self.anchor is None:
            raise ValueError("empty path has no anchor type")
        return self.anchor

    def focus_type(self) -> str:
        if self.anchor is None:
            raise ValueError("empty path has no focus type")
        return self.steps[-1][1] if self.steps else self.anchor

    def extend(self, step: PathStep, to_type: str) -> PathExpr:
        if self.anchor is None:
            raise ValueError("cannot extend the empty path")
        return PathExpr(self.anchor, self.steps + ((step, to_type),))

    def replace_focus(self, to_type: str) -> PathExpr:
        if self.anchor is None:
            raise ValueError("empty path has no focus to replace")
        if not self.steps:
            return PathExpr(to_type)
        last_step, _ = self.steps[-1]
        return PathExpr(self.anchor, self.steps[:-1] + ((last_step, to_type),))

    def reverse(self) -> PathExpr:
        """Swap anchor and focus, flip every step, reverse step order."""
        if self.anchor is None:
            raise ValueError("cannot reverse the empty path")
        if not self.steps:
            return self
        types = [self.anchor] + [t for _, t in self.steps]
        rev_steps = tuple(
            (step.flipped(), types[i]) for i, (step, _) in reversed(list(enumerate(self.steps)))
        )
        return PathExpr(types[-1], rev_steps)


EMPTY = PathExpr()


def is_legal_focus(schema: Schema, t: str, strict: bool = False) -> bool:
    """Whether a path may stop at ``t``.

    Object types (including objectified fact types) always qualify.  A
    plain relationship type qualifies once its arity reaches three, so
    n-ary facts can be split one role at a time; ``strict`` turns that
    allowance off and keeps objectified-only stops.
    """
    if t in schema.obj_types:
        return True
    if strict:
        return False
    return t in schema.rel_types and schema.arity(t) >= 3


def is_wellformed(schema: Schema, p: PathExpr, strict: bool = False) -> bool:
    """Grammar membership for path expressions (total; never raises).

    Every step's endpoints must be type-related to the step's structural
    player/fact types, stops are constrained by ``is_legal_focus``, and an
    illegal intermediate stop is only tolerated as the first half of a
    through-step (enter one role, exit a different role of the same fact).
    """
    if p.is_empty:
        return True
    if not schema.has_type(p.anchor):
        return False
    if not is_legal_focus(schema, p.anchor, strict):
        return False
    prev = p.anchor
    steps = p.steps
    for i, (step, t) in enumerate(steps):
        r = step.role
        if not schema.has_role(r) or not schema.has_type(t):
            return False
        rel = schema.rel_of(r)
        if step.kind == ENTER:
            if not schema.type_related(prev, schema.player[r]):
                return False
            if not schema.type_related(t, rel):
                return False
            if not is_legal_focus(schema, t, strict):
                if i + 1 >= len(steps):
                    return False
                nxt_step, _ = steps[i + 1]
                if nxt_step.kind != EXIT or nxt_step.role == r or schema.rel_of(nxt_step.role) != rel:
                    return False
        elif step.kind == EXIT:
            if not schema.type_related(prev, rel):
                return False
            if not schema.type_related(t, schema.player[r]):
                return False
        else:
            return False
        prev = t
    return True


def canonical_text(p: PathExpr) -> str:
    if p.is_empty:
        return "()"
    parts = [p.anchor or ""]
    for step, t in p.steps:
        mark = ">" if step.kind == ENTER else "<"
        parts.append(f"{mark}{step.role}")
        parts.append(t)
    return " ".join(parts)


def parse_path(text: str) -> PathExpr:
    """Inverse of ``canonical_text``; raises ``ValueError`` on bad syntax."""
    stripped = text.strip()
    if stripped == "()":
        return EMPTY
    tokens = stripped.split()
    if not tokens:
        raise ValueError("empty path text (use '()' for the empty path)")
    if len(tokens) % 2 == 0:
        raise ValueError(f"path must alternate types and steps: {text!r}")
    anchor = tokens[0]
    if not _IDENT.match(anchor):
        raise ValueError(f"bad type identifier {anchor!r}")
    steps: list[tuple[PathStep, str]] = []
    for i in range(1, len(tokens), 2):
        step_tok, type_tok = tokens[i], tokens[i + 1]
        if len(step_tok) < 2 or step_tok[0] not in "><":
            raise ValueError(f"bad step token {step_tok!r} (expected >role or <role)")
        role = step_tok[1:]
        if not _IDENT.match(role):
            raise ValueError(f"bad role identifier {role!r}")
        if not _IDENT.match(type_tok):
            raise ValueError(f"bad type identifier {type_tok!r}")
        steps.append((PathStep(ENTER if step_tok[0] == ">" else EXIT, role), type_tok))
    return PathExpr(anchor, tuple(steps))

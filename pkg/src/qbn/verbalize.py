"""Rendering path expressions as English-like phrases.

The anchor renders with a definite article, every step appends its role
connective plus the next type with an indefinite article, and adjacent
enter/exit pairs collapse into a single declared contraction when enabled.
When a step starts from a type that differs from the preceding path type
(a subtype hop), an ``(as a <type>)`` annotation can be inserted; the
``|`` character inside a stored phrase pins where that annotation lands.
"""

from __future__ import annotations

from dataclasses import dataclass

from .paths import ENTER, EXIT, PathExpr
from .schema import Schema

__all__ = ["VerbalizeOptions", "verbalize", "indefinite"]


@dataclass(frozen=True)
class VerbalizeOptions:
    mark_supertype_steps: bool = False
    use_contractions: bool = True


def indefinite(noun: str) -> str:
    article = "an" if noun[:1].lower() in "aeiou" else "a"
    return f"{article} {noun}"


def _phrase(raw: str, marker: str | None) -> str:
    pre, sep, post = raw.partition("|")
    if marker is None:
        return f"{pre} {post}" if sep else pre
    if sep:
        return f"{pre} {marker} {post}"
    return f"{marker} {pre}"


def verbalize(schema: Schema, p: PathExpr, opts: VerbalizeOptions | None = None) -> str:
    """Deterministic text for a nonempty path under the given options."""
    if p.is_empty:
        raise ValueError("the empty path has no verbalization")
    opts = opts or VerbalizeOptions()
    words = [f"the {schema.display(p.anchor_type())}"]
    prev = p.anchor_type()
    steps = p.steps
    i = 0
    while i < len(steps):
        step, t = steps[i]
        naming = schema.naming.get(step.role)
        if (
            opts.use_contractions
            and step.kind == ENTER
            and i + 1 < len(steps)
            and steps[i + 1][0].kind == EXIT
            and (step.role, steps[i + 1][0].role) in schema.contractions
        ):
            nxt_step, nxt_t = steps[i + 1]
            source = schema.player[step.role]
            marker = _marker(schema, source) if opts.mark_supertype_steps and prev != source else None
            words.append(_phrase(schema.contractions[(step.role, nxt_step.role)], marker))
            words.append(indefinite(schema.display(nxt_t)))
            prev = nxt_t
            i += 2
            continue
        if step.kind == ENTER:
            source = schema.player[step.role]
            raw = naming.fwd if naming and naming.fwd else f"with as {step.role.lower()}"
        else:
            source = schema.rel_of(step.role)
            raw = naming.rev if naming and naming.rev else f"being {step.role.lower()} of"
        marker = _marker(schema, source) if opts.mark_supertype_steps and prev != source else None
        words.append(_phrase(raw, marker))
        words.append(indefinite(schema.display(t)))
        prev = t
        i += 1
    return " ".join(words)


def _marker(schema: Schema, source: str) -> str:
    return f"(as {indefinite(schema.display(source))})"

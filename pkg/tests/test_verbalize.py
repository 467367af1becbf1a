"""Verbalization rules, options, and the golden corpus."""

from __future__ import annotations

import pytest

from qbn.paths import EMPTY, parse_path
from qbn.verbalize import VerbalizeOptions, indefinite, verbalize

from .helpers import FIXTURES, enumerate_paths, load_fixture_schema


def corpus_rows():
    rows = []
    for raw in (FIXTURES / "golden_verbalizations.tsv").read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            continue
        path_text, flags, expected = raw.split("\t")
        opts = VerbalizeOptions(
            mark_supertype_steps="mark_supertypes" in flags,
            use_contractions="no_contractions" not in flags,
        )
        rows.append((path_text, opts, expected))
    return rows


@pytest.mark.parametrize("path_text,opts,expected", corpus_rows())
def test_golden_corpus(path_text, opts, expected):
    schema = load_fixture_schema()
    assert verbalize(schema, parse_path(path_text), opts) == expected


def test_empty_path_rejected():
    with pytest.raises(ValueError):
        verbalize(load_fixture_schema(), EMPTY)


def test_determinism():
    schema = load_fixture_schema()
    for p in enumerate_paths(schema, 3):
        for opts in (VerbalizeOptions(), VerbalizeOptions(True, False)):
            assert verbalize(schema, p, opts) == verbalize(schema, p, opts)


def test_marking_changes_only_paths_with_hops():
    schema = load_fixture_schema()
    changed = []
    for p in enumerate_paths(schema, 3):
        plain = verbalize(schema, p, VerbalizeOptions(mark_supertype_steps=False))
        marked = verbalize(schema, p, VerbalizeOptions(mark_supertype_steps=True))
        if plain != marked:
            changed.append(p)
            assert "(as a" in marked or "(as an" in marked
            types = [p.anchor_type()] + [t for _, t in p.steps]
            sources = []
            for i, (step, _) in enumerate(p.steps):
                structural = (
                    schema.player[step.role] if step.kind == "enter" else schema.rel_of(step.role)
                )
                sources.append(types[i] != structural)
            assert any(sources), "marker appeared on a path without a relatedness hop"
    assert changed, "fixture should contain markable paths"


def test_indefinite_article():
    assert indefinite("administration") == "an administration"
    assert indefinite("marriage") == "a marriage"


def test_default_phrases_used_when_unnamed():
    from qbn.schema import parse_schema

    schema = parse_schema("object A\nfact F objectified {\n role spouse player A\n}\n")
    assert verbalize(schema, parse_path("A >spouse F")) == "the a with as spouse a f"
    assert verbalize(schema, parse_path("F <spouse A")) == "the f being spouse of an a"

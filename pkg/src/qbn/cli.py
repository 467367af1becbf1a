"""Command-line driver: validate, env, eval, walk, serve.

All output is deterministic for fixed inputs so the subcommands can be
golden-tested.  Diagnostics go to stderr; any error or illegal move exits
nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .navigate import (
    Associate,
    Enlarge,
    IllegalMove,
    Refine,
    ReversePath,
    Session,
    apply_move,
    new_session,
    present,
    set_options,
)
from .paths import canonical_text, parse_path
from .population import evaluate, load_population, result_view
from .schema import DiagnosticError, parse_schema
from .verbalize import VerbalizeOptions

__all__ = ["main"]


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _options(args: argparse.Namespace) -> VerbalizeOptions:
    return VerbalizeOptions(
        mark_supertype_steps=getattr(args, "mark_supertypes", False),
        use_contractions=not getattr(args, "no_contractions", False),
    )


def _print_presentation(session: Session, out) -> None:
    node = present(session)
    print(f"focus\t{canonical_text(session.focus)}\t{node.focus_text}", file=out)
    for label, block in (
        ("refine", node.refinements),
        ("enlarge", node.enlargements),
        ("assoc", node.associations),
    ):
        for p, text in block:
            print(f"{label}\t{canonical_text(p)}\t{text}", file=out)


def _cmd_validate(args, out, err) -> int:
    try:
        schema = parse_schema(_read(args.schema))
    except DiagnosticError as exc:
        for d in exc.diagnostics:
            print(d.render(), file=err)
        return 1
    if args.population:
        try:
            load_population(_read(args.population), schema)
        except DiagnosticError as exc:
            for d in exc.diagnostics:
                print(d.render(), file=err)
            return 1
    print("ok", file=out)
    return 0


def _cmd_env(args, out, err) -> int:
    schema = parse_schema(_read(args.schema))
    session = new_session(schema, _options(args))
    try:
        focus = parse_path(args.path)
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return 1
    session = Session(schema=schema, focus=focus, options=session.options)
    try:
        _print_presentation(session, out)
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return 1
    return 0


def _cmd_eval(args, out, err) -> int:
    schema = parse_schema(_read(args.schema))
    pop = load_population(_read(args.population), schema)
    try:
        path = parse_path(args.path)
        view = result_view(evaluate(pop, path))
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return 1
    out.write(view.to_text())
    return 0


def _parse_script_line(line: str):
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    head, _, rest = stripped.partition(" ")
    rest = rest.strip()
    return head, rest


def _cmd_walk(args, out, err) -> int:
    schema = parse_schema(_read(args.schema))
    pop = load_population(_read(args.population), schema) if args.population else None
    session = new_session(schema, _options(args))
    script = _read(args.script)
    for lineno, raw in enumerate(script.splitlines(), start=1):
        parsed = _parse_script_line(raw)
        if parsed is None:
            continue
        head, rest = parsed
        print(f"== {head + (' ' + rest if rest else '')}", file=out)
        try:
            if head in ("refine", "enlarge", "associate"):
                target = parse_path(rest)
                move = {"refine": Refine, "enlarge": Enlarge, "associate": Associate}[head](target)
                session = apply_move(session, move)
            elif head == "reverse":
                session = apply_move(session, ReversePath())
            elif head == "set":
                key, _, value = rest.partition(" ")
                flag = value.strip() == "on"
                opts = session.options
                if key == "mark_supertypes":
                    opts = VerbalizeOptions(flag, opts.use_contractions)
                elif key == "contractions":
                    opts = VerbalizeOptions(opts.mark_supertype_steps, flag)
                else:
                    print(f"error: line {lineno}: unknown option {key!r}", file=err)
                    return 1
                session = set_options(session, opts)
            elif head == "go":
                if pop is None:
                    print(f"error: line {lineno}: go needs --population", file=err)
                    return 1
                view = result_view(evaluate(pop, session.focus))
                out.write(view.to_text())
                continue
            else:
                print(f"error: line {lineno}: unknown move {head!r}", file=err)
                return 1
        except (IllegalMove, ValueError) as exc:
            print(f"error: line {lineno}: {exc}", file=err)
            return 1
        _print_presentation(session, out)
    return 0


def _cmd_serve(args, out, err) -> int:
    import uvicorn

    from .service import Store, create_app

    store = Store(snapshot_dir=args.snapshot_dir)
    schema_id = store.add_schema(_read(args.schema))
    if args.population:
        store.set_population(schema_id, _read(args.population))
    print(f"schema_id\t{schema_id}", file=out)
    app = create_app(store, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbn", description="query by navigation over conceptual schemas")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a schema (and optionally a population)")
    p.add_argument("schema")
    p.add_argument("population", nargs="?")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("env", help="print the direct environment of a path")
    p.add_argument("schema")
    p.add_argument("--path", required=True, help="canonical path, e.g. 'A >r F <q B' or '()'")
    p.add_argument("--mark-supertypes", action="store_true", dest="mark_supertypes")
    p.add_argument("--no-contractions", action="store_true", dest="no_contractions")
    p.set_defaults(fn=_cmd_env)

    p = sub.add_parser("eval", help="evaluate a path against a population")
    p.add_argument("schema")
    p.add_argument("population")
    p.add_argument("--path", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("walk", help="apply a move script, printing each node")
    p.add_argument("schema")
    p.add_argument("--script", required=True)
    p.add_argument("--population")
    p.add_argument("--mark-supertypes", action="store_true", dest="mark_supertypes")
    p.add_argument("--no-contractions", action="store_true", dest="no_contractions")
    p.set_defaults(fn=_cmd_walk)

    p = sub.add_parser("serve", help="run the HTTP service preloaded with a schema")
    p.add_argument("schema")
    p.add_argument("--population")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--snapshot-dir")
    p.add_argument("--ui-dir")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out, err)
    except DiagnosticError as exc:
        for d in exc.diagnostics:
            print(d.render(), file=err)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())

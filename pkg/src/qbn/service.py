"""HTTP facade: schema upload, navigation sessions, evaluation.

The store is in memory; loaded schemas and populations are immutable, and
each session is guarded by its own lock so concurrent moves serialize
(the loser of a race either applies cleanly to the new focus or gets a
409).  Schema ids are content-addressed, session ids are random tokens.
Passing ``snapshot_dir`` persists the store as JSON and reloads it on
startup by replaying each session's recorded moves.
"""

from __future__ import annotations

import hashlib
import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .navigate import (
    Associate,
    Enlarge,
    IllegalMove,
    Move,
    Refine,
    ReversePath,
    Session,
    apply_move,
    new_session,
    present,
    set_options,
)
from .paths import canonical_text, parse_path
from .population import Population, evaluate, load_population, result_view
from .schema import DiagnosticError, Schema, parse_schema, serialize_schema
from .verbalize import VerbalizeOptions

__all__ = ["Store", "create_app", "app"]

DEFAULT_SESSION_TTL = 24 * 3600.0


# -- wire models -------------------------------------------------------------


class DiagnosticModel(BaseModel):
    severity: str
    code: str
    message: str
    line: int | None = None
    col: int | None = None


class AlternativeModel(BaseModel):
    path: str
    text: str


class PresentationModel(BaseModel):
    focus_canonical: str
    focus_text: str
    refinements: list[AlternativeModel]
    enlargements: list[AlternativeModel]
    associations: list[AlternativeModel]


class OptionsModel(BaseModel):
    mark_supertype_steps: bool = False
    use_contractions: bool = True


class OptionsPatch(BaseModel):
    mark_supertype_steps: bool | None = None
    use_contractions: bool | None = None


class SchemaCreated(BaseModel):
    schema_id: str


class SessionCreateRequest(BaseModel):
    schema_id: str
    options: OptionsModel = OptionsModel()


class SessionCreated(BaseModel):
    session_id: str
    presentation: PresentationModel


class HistoryEntry(BaseModel):
    kind: str
    target: str | None = None
    focus_canonical: str


class SessionState(BaseModel):
    focus_canonical: str
    presentation: PresentationModel
    history: list[HistoryEntry]
    options: OptionsModel


class MoveRequest(BaseModel):
    kind: str  # refine | enlarge | associate | reverse
    target_canonical: str | None = None


class PairRow(BaseModel):
    anchor: str
    focus: str
    count: int


class FocusRow(BaseModel):
    instance: str
    count: int


class EvaluationResult(BaseModel):
    focus_canonical: str
    pairs: list[PairRow]
    focus_counts: list[FocusRow]


# -- store -------------------------------------------------------------------


@dataclass
class _StoredSession:
    session: Session
    schema_id: str
    moves: list[tuple[str, str | None]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    touched: float = 0.0


class Store:
    """All server state; safe for concurrent readers and per-session writers."""

    def __init__(
        self,
        snapshot_dir: str | Path | None = None,
        session_ttl: float = DEFAULT_SESSION_TTL,
        clock=time.monotonic,
    ):
        self.schemas: dict[str, Schema] = {}
        self.populations: dict[str, Population] = {}
        self.sessions: dict[str, _StoredSession] = {}
        self.session_ttl = session_ttl
        self.clock = clock
        self._mutex = threading.Lock()
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        if self.snapshot_dir:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
            self._restore()

    # schemas / populations

    def add_schema(self, source: str) -> str:
        schema = parse_schema(source)
        canonical = serialize_schema(schema)
        schema_id = "s-" + hashlib.sha256(canonical.encode()).hexdigest()[:12]
        with self._mutex:
            self.schemas[schema_id] = schema
        self._snapshot()
        return schema_id

    def get_schema(self, schema_id: str) -> Schema:
        schema = self.schemas.get(schema_id)
        if schema is None:
            raise KeyError(schema_id)
        return schema

    def set_population(self, schema_id: str, source: str) -> None:
        schema = self.get_schema(schema_id)
        pop = load_population(source, schema)
        with self._mutex:
            self.populations[schema_id] = pop
        self._snapshot()

    # sessions

    def create_session(self, schema_id: str, options: VerbalizeOptions) -> tuple[str, Session]:
        schema = self.get_schema(schema_id)
        session = new_session(schema, options)
        session_id = secrets.token_urlsafe(16)
        with self._mutex:
            self.sessions[session_id] = _StoredSession(session, schema_id, touched=self.clock())
        self._snapshot()
        return session_id, session

    def get(self, session_id: str) -> _StoredSession:
        self._purge()
        stored = self.sessions.get(session_id)
        if stored is None:
            raise KeyError(session_id)
        stored.touched = self.clock()
        return stored

    def _purge(self) -> None:
        now = self.clock()
        with self._mutex:
            dead = [sid for sid, s in self.sessions.items() if now - s.touched > self.session_ttl]
            for sid in dead:
                del self.sessions[sid]

    # snapshots

    def _snapshot(self) -> None:
        if not self.snapshot_dir:
            return
        from .population import serialize_population

        state = {
            "schemas": {sid: serialize_schema(s) for sid, s in self.schemas.items()},
            "populations": {sid: serialize_population(p) for sid, p in self.populations.items()},
            "sessions": {
                sid: {
                    "schema_id": s.schema_id,
                    "options": {
                        "mark_supertype_steps": s.session.options.mark_supertype_steps,
                        "use_contractions": s.session.options.use_contractions,
                    },
                    "moves": s.moves,
                }
                for sid, s in self.sessions.items()
            },
        }
        path = self.snapshot_dir / "store.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(state, indent=2, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def _restore(self) -> None:
        path = self.snapshot_dir / "store.json"
        if not path.exists():
            return
        state = json.loads(path.read_text(encoding="utf-8"))
        for sid, text in state.get("schemas", {}).items():
            self.schemas[sid] = parse_schema(text)
        for sid, text in state.get("populations", {}).items():
            if text:
                self.populations[sid] = load_population(text, self.schemas[sid])
        for sid, data in state.get("sessions", {}).items():
            schema = self.schemas.get(data["schema_id"])
            if schema is None:
                continue
            options = VerbalizeOptions(**data.get("options", {}))
            session = new_session(schema, options)
            for kind, target in data.get("moves", []):
                session = apply_move(session, _to_move(kind, target, session))
            stored = _StoredSession(session, data["schema_id"], touched=self.clock())
            stored.moves = [tuple(m) for m in data.get("moves", [])]
            self.sessions[sid] = stored


def _to_move(kind: str, target: str | None, session: Session) -> Move:
    if kind == "reverse":
        return ReversePath()
    if target is None:
        raise ValueError(f"move kind {kind!r} needs a target path")
    path = parse_path(target)
    if kind == "refine":
        return Refine(path)
    if kind == "enlarge":
        return Enlarge(path)
    if kind == "associate":
        return Associate(path)
    raise ValueError(f"unknown move kind {kind!r}")


# -- app ---------------------------------------------------------------------


def _diag_payload(exc: DiagnosticError) -> dict:
    return {
        "code": "invalid-source",
        "diagnostics": [
            DiagnosticModel(
                severity=d.severity, code=d.code, message=d.message, line=d.line, col=d.col
            ).model_dump()
            for d in exc.diagnostics
        ],
    }


def _presentation(session: Session) -> PresentationModel:
    node = present(session)

    def alts(block) -> list[AlternativeModel]:
        return [AlternativeModel(path=canonical_text(p), text=t) for p, t in block]

    return PresentationModel(
        focus_canonical=canonical_text(session.focus),
        focus_text=node.focus_text,
        refinements=alts(node.refinements),
        enlargements=alts(node.enlargements),
        associations=alts(node.associations),
    )


def create_app(store: Store | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    store = store if store is not None else Store()
    app = FastAPI(title="qbn", version="0.1.0")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/schemas", response_model=SchemaCreated)
    def create_schema(source: str = Body(..., media_type="text/plain")):
        try:
            return SchemaCreated(schema_id=store.add_schema(source))
        except DiagnosticError as exc:
            raise HTTPException(400, detail=_diag_payload(exc))

    @app.get("/schemas/{schema_id}", response_class=PlainTextResponse)
    def get_schema(schema_id: str):
        try:
            return serialize_schema(store.get_schema(schema_id))
        except KeyError:
            raise HTTPException(404, detail={"code": "unknown-id", "message": f"no schema {schema_id!r}"})

    @app.post("/schemas/{schema_id}/population")
    def set_population(schema_id: str, source: str = Body(..., media_type="text/plain")):
        try:
            store.set_population(schema_id, source)
        except KeyError:
            raise HTTPException(404, detail={"code": "unknown-id", "message": f"no schema {schema_id!r}"})
        except DiagnosticError as exc:
            raise HTTPException(400, detail=_diag_payload(exc))
        return {"ok": True}

    @app.post("/sessions", response_model=SessionCreated)
    def create_session(req: SessionCreateRequest):
        options = VerbalizeOptions(
            mark_supertype_steps=req.options.mark_supertype_steps,
            use_contractions=req.options.use_contractions,
        )
        try:
            session_id, session = store.create_session(req.schema_id, options)
        except KeyError:
            raise HTTPException(404, detail={"code": "unknown-id", "message": f"no schema {req.schema_id!r}"})
        return SessionCreated(session_id=session_id, presentation=_presentation(session))

    def _stored(session_id: str) -> _StoredSession:
        try:
            return store.get(session_id)
        except KeyError:
            raise HTTPException(404, detail={"code": "unknown-id", "message": f"no session {session_id!r}"})

    @app.get("/sessions/{session_id}", response_model=SessionState)
    def get_session(session_id: str):
        stored = _stored(session_id)
        with stored.lock:
            session = stored.session
            history = [
                HistoryEntry(
                    kind=kind,
                    target=target,
                    focus_canonical=canonical_text(focus_after),
                )
                for (kind, target), (_, focus_after) in zip(stored.moves, session.history)
            ]
            return SessionState(
                focus_canonical=canonical_text(session.focus),
                presentation=_presentation(session),
                history=history,
                options=OptionsModel(
                    mark_supertype_steps=session.options.mark_supertype_steps,
                    use_contractions=session.options.use_contractions,
                ),
            )

    @app.post("/sessions/{session_id}/move", response_model=PresentationModel)
    def move(session_id: str, req: MoveRequest):
        stored = _stored(session_id)
        with stored.lock:
            try:
                m = _to_move(req.kind, req.target_canonical, stored.session)
            except ValueError as exc:
                raise HTTPException(400, detail={"code": "bad-move", "message": str(exc)})
            try:
                stored.session = apply_move(stored.session, m)
            except IllegalMove as exc:
                raise HTTPException(409, detail={"code": "illegal-move", "message": str(exc)})
            stored.moves.append((req.kind, req.target_canonical))
            result = _presentation(stored.session)
        store._snapshot()
        return result

    @app.post("/sessions/{session_id}/evaluate", response_model=EvaluationResult)
    def evaluate_session(session_id: str):
        stored = _stored(session_id)
        with stored.lock:
            session = stored.session
            if session.focus.is_empty:
                raise HTTPException(400, detail={"code": "empty-path", "message": "nothing to evaluate yet"})
            pop = store.populations.get(stored.schema_id)
            if pop is None:
                raise HTTPException(400, detail={"code": "no-population", "message": "load a population first"})
            view = result_view(evaluate(pop, session.focus))
            return EvaluationResult(
                focus_canonical=canonical_text(session.focus),
                pairs=[PairRow(anchor=a, focus=b, count=m) for a, b, m in view.pairs],
                focus_counts=[FocusRow(instance=b, count=m) for b, m in view.focus_counts],
            )

    @app.post("/sessions/{session_id}/options", response_model=PresentationModel)
    def patch_options(session_id: str, req: OptionsPatch):
        stored = _stored(session_id)
        with stored.lock:
            opts = stored.session.options
            new_opts = VerbalizeOptions(
                mark_supertype_steps=(
                    opts.mark_supertype_steps
                    if req.mark_supertype_steps is None
                    else req.mark_supertype_steps
                ),
                use_contractions=(
                    opts.use_contractions if req.use_contractions is None else req.use_contractions
                ),
            )
            stored.session = set_options(stored.session, new_opts)
            result = _presentation(stored.session)
        store._snapshot()
        return result

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


app = create_app()

"""HTTP + server-sent-events service hosting interactive sessions.

A session is created from a scenario payload, advanced synchronously until
it blocks (waiting for a human answer) or terminates, and exposed through
snapshots, a gap-free numbered event stream, and answer submission. The
oracle console consumes exactly these endpoints.
"""

from __future__ import annotations

import itertools
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from fastapi import Body, FastAPI, HTTPException, Query, Request
from fastapi.responses import PlainTextResponse, StreamingResponse

from .knowledge import OBJ_NAME
from .llm import ScriptExhaustedError
from .scenario import ManifestError, build_session, load_scenario, scenario_from_dict
from .session import (
    AttributeValue,
    AWAITING_HUMAN,
    ConfirmsNew,
    Correction,
    DeniesExistence,
    EXECUTING,
    HumanAnswer,
    InvalidAnswerError,
    REFINING,
    Session,
)
from .triples import StringLiteral

_POLL_SECONDS = 0.05


@dataclass
class _Entry:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)


def _advance(entry: _Entry) -> None:
    """Run the session until it blocks on the human or terminates."""
    try:
        while entry.session.phase in (REFINING, EXECUTING):
            entry.session.step()
    except ScriptExhaustedError:
        entry.session.abort("llm_script_exhausted")


def _parse_answer(payload: dict) -> HumanAnswer:
    kind = payload.get("kind")
    if kind == "correction":
        word = payload.get("word")
        if not isinstance(word, str) or not word:
            raise InvalidAnswerError("correction requires a 'word'")
        return Correction(word)
    if kind == "denies_existence":
        return DeniesExistence()
    if kind == "confirms_new":
        return ConfirmsNew()
    if kind == "attribute":
        if "value" not in payload or not isinstance(payload["value"], (bool, str)):
            raise InvalidAnswerError("attribute requires a bool or string 'value'")
        return AttributeValue(payload["value"])
    raise InvalidAnswerError(f"unknown answer kind {kind!r}")


def create_app(base_dir: Optional[Path] = None, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="planloop", version="0.1.0")
    base = (base_dir or Path(".")).resolve()
    sessions: dict[str, _Entry] = {}
    ids = itertools.count(1)

    def entry_of(session_id: str) -> _Entry:
        entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return entry

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)) -> dict:
        try:
            if "scenario_path" in payload:
                scenario = load_scenario(base / payload["scenario_path"])
            elif "scenario" in payload:
                scenario = scenario_from_dict(payload["scenario"], base, payload.get("id", "inline"))
            else:
                raise ManifestError("payload needs 'scenario_path' or 'scenario'")
            session = build_session(
                scenario,
                configuration=payload.get("configuration"),
                feedback_budget=payload.get("feedback_budget"),
            )
        except (ManifestError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session_id = f"s{next(ids)}"
        entry = _Entry(session)
        sessions[session_id] = entry
        with entry.lock:
            try:
                session.start()
            except ScriptExhaustedError:
                session.abort("llm_script_exhausted")
            _advance(entry)
            snapshot = session.snapshot()
        return {"id": session_id, "phase": snapshot["phase"]}

    @app.get("/sessions/{session_id}")
    def get_snapshot(session_id: str) -> dict:
        entry = entry_of(session_id)
        with entry.lock:
            return entry.session.snapshot()

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, payload: dict = Body(...)) -> dict:
        entry = entry_of(session_id)
        with entry.lock:
            if entry.session.phase != AWAITING_HUMAN:
                raise HTTPException(
                    status_code=409,
                    detail=f"session is in phase {entry.session.phase}, not awaiting an answer",
                )
            try:
                answer = _parse_answer(payload)
                entry.session.submit_answer(answer)
            except InvalidAnswerError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            _advance(entry)
            return entry.session.snapshot()

    @app.get("/sessions/{session_id}/kg")
    def get_kg(session_id: str) -> dict:
        entry = entry_of(session_id)
        with entry.lock:
            kb = entry.session.kb
            nodes, edges = kb.stats()
            names = {
                t.object.value
                for g in (kb.state, kb.attributes)
                for t in g.match(None, OBJ_NAME, None)
                if isinstance(t.object, StringLiteral)
            }
        return {"nodes": nodes, "edges": edges, "entities": sorted(names)}

    @app.get("/sessions/{session_id}/progress", response_class=PlainTextResponse)
    def get_progress(session_id: str) -> str:
        entry = entry_of(session_id)
        with entry.lock:
            return entry.session.progress_text()

    @app.get("/sessions/{session_id}/events")
    def get_events(
        session_id: str,
        request: Request,
        after: int = Query(0, ge=0),
        follow: bool = Query(True),
    ) -> StreamingResponse:
        entry = entry_of(session_id)
        last_event_id = request.headers.get("last-event-id")
        start_at = int(last_event_id) if last_event_id and last_event_id.isdigit() else after

        def stream() -> Iterator[str]:
            cursor = start_at
            while True:
                with entry.lock:
                    events = list(entry.session.trace_log[cursor:])
                    terminal = entry.session.terminal
                for event in events:
                    cursor += 1
                    data = json.dumps({**event, "seq": cursor}, sort_keys=True)
                    yield f"id: {cursor}\ndata: {data}\n\n"
                if terminal or not follow:
                    return
                time.sleep(_POLL_SECONDS)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="console")

    return app

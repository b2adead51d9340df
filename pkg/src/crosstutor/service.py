"""HTTP facade over packs, sessions, and reports.

One endpoint per engine operation; the engine stays the single source of
truth. Every mutation is persisted before the response goes out, and a
per-session lock keeps concurrent mutations to one session from
interleaving. Payloads never expose correct-choice sets before a session
reaches the done phase.
"""
from __future__ import annotations

import random
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import engine
from .analytics import study_summary
from .engine import Phase, score_test
from .errors import (
    AlreadyAnswered,
    BadSelection,
    CorruptRecord,
    InvalidPack,
    LevelOutOfRange,
    MissingAnswer,
    NoPrevious,
    NotFound,
    SessionExists,
    TutorError,
    WrongPhase,
)
from .model import LessonPack, serialize_pack
from .rules import RuleSet
from .store import SessionStore

_STATUS_BY_CODE = {
    NotFound.code: 404,
    NoPrevious.code: 409,
    WrongPhase.code: 409,
    AlreadyAnswered.code: 409,
    SessionExists.code: 409,
    BadSelection.code: 422,
    LevelOutOfRange.code: 422,
    MissingAnswer.code: 409,
    "invalid-pack": 422,
    CorruptRecord.code: 500,
}


class CreateSessionRequest(BaseModel):
    pack_id: str
    participant: str
    seed: int | None = None


class StepRequest(BaseModel):
    direction: str = Field(pattern="^(next|prev)$")


class AnswerRequest(BaseModel):
    question_id: str
    selection: list[int]


class SurveyRequest(BaseModel):
    statement_id: str
    level: int


def _public_pack(pack: LessonPack) -> dict[str, Any]:
    """Pack document with every answer key stripped."""
    document = serialize_pack(pack)
    for test in ("pretest", "posttest"):
        for question in document[test]:
            question.pop("correct", None)
    return document


def create_app(
    packs: dict[str, LessonPack],
    rules: RuleSet,
    store: SessionStore,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="crosstutor", version="0.1.0")

    @app.exception_handler(TutorError)
    async def tutor_error_handler(request: Request, exc: TutorError) -> JSONResponse:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    def get_pack(pack_id: str) -> LessonPack:
        pack = packs.get(pack_id)
        if pack is None:
            raise NotFound(f"no pack {pack_id!r}")
        return pack

    def load_session(session_id: str) -> tuple[engine.Session, LessonPack]:
        session = store.restore(session_id)
        return session, get_pack(session.pack_id)

    @app.get("/api/packs")
    def list_packs() -> list[dict[str, Any]]:
        return [
            {"id": pack.id, "title": pack.title, "lesson_count": len(pack.lessons),
             "known_language": pack.known_language, "target_language": pack.target_language}
            for pack in packs.values()
        ]

    @app.get("/api/packs/{pack_id}")
    def get_pack_document(pack_id: str) -> dict[str, Any]:
        return _public_pack(get_pack(pack_id))

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict[str, Any]:
        pack = get_pack(body.pack_id)
        seed = body.seed if body.seed is not None else random.getrandbits(64)
        session_id = engine.session_id_for(pack.id, body.participant, seed)
        with store.lock_for(session_id):
            if store.contains(session_id):
                raise SessionExists(
                    f"session for ({body.pack_id!r}, {body.participant!r}, seed {seed}) already exists",
                    detail={"session_id": session_id},
                )
            session = engine.create_session(pack, body.participant, seed)
            store.persist(session)
        return {
            "session_id": session.id,
            "seed": seed,
            "state": engine.render_state(session, pack).to_payload(),
        }

    @app.get("/api/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict[str, Any]:
        session, pack = load_session(session_id)
        return engine.render_state(session, pack).to_payload()

    @app.post("/api/sessions/{session_id}/step")
    def step(session_id: str, body: StepRequest) -> dict[str, Any]:
        with store.lock_for(session_id):
            session, pack = load_session(session_id)
            state = engine.advance(session, pack, body.direction)
            store.persist(session)
        return state.to_payload()

    @app.post("/api/sessions/{session_id}/answers")
    def answer(session_id: str, body: AnswerRequest) -> dict[str, Any]:
        with store.lock_for(session_id):
            session, pack = load_session(session_id)
            engine.submit_answer(session, pack, body.question_id, body.selection)
            store.persist(session)
            return engine.render_state(session, pack).to_payload()

    @app.post("/api/sessions/{session_id}/survey")
    def survey(session_id: str, body: SurveyRequest) -> dict[str, Any]:
        with store.lock_for(session_id):
            session, pack = load_session(session_id)
            engine.submit_survey(session, pack, body.statement_id, body.level)
            store.persist(session)
            return engine.render_state(session, pack).to_payload()

    @app.get("/api/sessions/{session_id}/report")
    def report(session_id: str) -> Any:
        session, pack = load_session(session_id)
        if session.phase is not Phase.DONE:
            return JSONResponse(
                status_code=403,
                content={
                    "code": "not-done",
                    "message": "the report is available once the session is done",
                    "detail": {"phase": session.phase.value},
                },
            )
        pre = score_test(session.answers["pretest"], pack.pretest)
        post = score_test(session.answers["posttest"], pack.posttest)
        return {
            "session_id": session.id,
            "participant": session.participant,
            "pretest": {"per_question": pre.per_question, "total": pre.total},
            "posttest": {"per_question": post.per_question, "total": post.total},
            "survey_responses": session.survey_responses,
        }

    @app.get("/api/stats")
    def stats(pack_id: str | None = None) -> dict[str, Any]:
        pack = get_pack(pack_id) if pack_id else next(iter(packs.values()))
        sessions = store.load_all(skip_corrupt=True)
        return study_summary(sessions, pack)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

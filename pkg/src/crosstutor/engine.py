"""Session state machine: pre-test, lesson walkthrough, post-test, survey.

A session is a single-writer object; callers must serialize mutations to any
one session (the HTTP layer does this with a per-session lock). Every
mutation appends to the session's event log, and ``replay`` reconstructs a
bit-identical session from that log, which is what makes the persisted
records auditable.

Question order is randomized per session with Fisher-Yates driven by a
splitmix64 stream seeded from the caller's 64-bit seed, so the same
(pack, participant, seed) triple yields the same order in any
implementation of the same recipe (see README for the exact update rule).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable, Sequence

from .errors import (
    AlreadyAnswered,
    BadSelection,
    CorruptRecord,
    InvalidPack,
    LevelOutOfRange,
    MissingAnswer,
    NoPrevious,
    WrongPhase,
)
from .model import (
    Annotation,
    LessonPack,
    OutputBox,
    Question,
    QuestionKind,
    Side,
    validate_pack,
)

SESSION_FORMAT_VERSION = 1

LIKERT_MIN, LIKERT_MAX = 1, 5


class Phase(str, Enum):
    PRE_TEST = "pretest"
    LESSONS = "lessons"
    POST_TEST = "posttest"
    SURVEY = "survey"
    DONE = "done"


_PHASE_ORDER = [Phase.PRE_TEST, Phase.LESSONS, Phase.POST_TEST, Phase.SURVEY, Phase.DONE]

#: Which answer bucket each test phase writes into.
_TEST_KEYS = {Phase.PRE_TEST: "pretest", Phase.POST_TEST: "posttest"}


class Direction(str, Enum):
    NEXT = "next"
    PREV = "prev"


# --- deterministic shuffle ----------------------------------------------

_MASK = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


class SeededShuffler:
    """Fisher-Yates (Durstenfeld) shuffles fed by a splitmix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def _next(self) -> int:
        self._state, value = _splitmix64(self._state)
        return value

    def shuffle(self, items: Sequence[str]) -> tuple[str, ...]:
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self._next() % (i + 1)
            out[i], out[j] = out[j], out[i]
        return tuple(out)


# --- session ------------------------------------------------------------

def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Session:
    id: str
    pack_id: str
    participant: str
    seed: int
    phase: Phase
    lesson_cursor: int
    step_cursor: int
    question_order: dict[str, tuple[str, ...]]
    answers: dict[str, dict[str, frozenset[int]]]
    survey_responses: dict[str, int]
    created_at: str
    updated_at: str
    events: list[dict[str, Any]] = field(default_factory=list)


@dataclass(frozen=True)
class ScoreReport:
    per_question: dict[str, int]
    total: int


# Render views: what a client needs to draw, and nothing more. Correct
# answers never appear here.

@dataclass(frozen=True)
class Highlight:
    start: int
    end: int
    kind: str


@dataclass(frozen=True)
class LessonView:
    lesson_id: str
    lesson_index: int
    lesson_count: int
    title: str
    step_index: int
    step_count: int
    known_language: str
    known_source: str
    target_language: str
    target_source: str
    known_highlights: tuple[Highlight, ...]
    target_highlights: tuple[Highlight, ...]
    annotations: tuple[dict[str, Any], ...]
    output: OutputBox | None


@dataclass(frozen=True)
class QuestionView:
    id: str
    prompt: str
    kind: str
    choices: tuple[str, ...]
    answered: int
    total: int


@dataclass(frozen=True)
class StatementView:
    id: str
    text: str
    answered: int
    total: int
    levels: tuple[int, ...] = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class RenderState:
    phase: Phase
    lesson: LessonView | None = None
    question: QuestionView | None = None
    statement: StatementView | None = None

    def to_payload(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"phase": self.phase.value}
        if self.lesson is not None:
            view = self.lesson
            payload["lesson"] = {
                "lesson_id": view.lesson_id,
                "lesson_index": view.lesson_index,
                "lesson_count": view.lesson_count,
                "title": view.title,
                "step_index": view.step_index,
                "step_count": view.step_count,
                "known": {"language": view.known_language, "source": view.known_source},
                "target": {"language": view.target_language, "source": view.target_source},
                "known_highlights": [h.__dict__ for h in view.known_highlights],
                "target_highlights": [h.__dict__ for h in view.target_highlights],
                "annotations": list(view.annotations),
                "output": None if view.output is None else {
                    "known": view.output.known_output,
                    "target": view.output.target_output,
                    "caption": view.output.caption,
                },
            }
        if self.question is not None:
            payload["question"] = {
                "id": self.question.id,
                "prompt": self.question.prompt,
                "kind": self.question.kind,
                "choices": list(self.question.choices),
                "answered": self.question.answered,
                "total": self.question.total,
            }
        if self.statement is not None:
            payload["statement"] = {
                "id": self.statement.id,
                "text": self.statement.text,
                "answered": self.statement.answered,
                "total": self.statement.total,
                "levels": list(self.statement.levels),
            }
        return payload


def session_id_for(pack_id: str, participant: str, seed: int) -> str:
    """Deterministic session id so identical runs produce identical records."""
    digest = hashlib.sha256(f"{pack_id}\x00{participant}\x00{seed}".encode()).hexdigest()
    return digest[:16]


def _new_session(pack: LessonPack, participant: str, seed: int, created_at: str) -> Session:
    shuffler = SeededShuffler(seed)
    question_ids = [q.id for q in pack.pretest]
    order = {
        "pretest": shuffler.shuffle(question_ids),
        "posttest": shuffler.shuffle(question_ids),
    }
    session = Session(
        id=session_id_for(pack.id, participant, seed),
        pack_id=pack.id,
        participant=participant,
        seed=seed,
        phase=Phase.PRE_TEST,
        lesson_cursor=0,
        step_cursor=0,
        question_order=order,
        answers={"pretest": {}, "posttest": {}},
        survey_responses={},
        created_at=created_at,
        updated_at=created_at,
    )
    session.events.append({
        "op": "create",
        "pack_id": pack.id,
        "participant": participant,
        "seed": seed,
        "at": created_at,
    })
    _skip_empty_phases(session, pack)
    return session


def create_session(pack: LessonPack, participant: str, seed: int) -> Session:
    """Start a session in the pre-test phase; the pack must validate cleanly."""
    report = validate_pack(pack)
    if not report.valid:
        raise InvalidPack(
            f"pack {pack.id!r} has {len(report.violations)} validation violation(s)",
            detail={"violations": report.render_lines()},
        )
    return _new_session(pack, participant, seed, _utcnow())


def _skip_empty_phases(session: Session, pack: LessonPack) -> None:
    # A pack with no questions or statements still walks the phases in order.
    while True:
        if session.phase in _TEST_KEYS and not pack.questions_for(_TEST_KEYS[session.phase]):
            session.phase = _next_phase(session.phase)
        elif session.phase is Phase.SURVEY and not pack.survey:
            session.phase = Phase.DONE
        else:
            return


def _next_phase(phase: Phase) -> Phase:
    return _PHASE_ORDER[_PHASE_ORDER.index(phase) + 1]


def _touch(session: Session, event: dict[str, Any], at: str | None) -> None:
    stamp = at if at is not None else _utcnow()
    event["at"] = stamp
    session.events.append(event)
    session.updated_at = stamp


# --- operations ---------------------------------------------------------

def advance(session: Session, pack: LessonPack, direction: Direction | str,
            _at: str | None = None) -> RenderState:
    """Move the lesson stepper; Next past the last step crosses lessons and
    finally leaves the Lessons phase, Prev is bounded within the lesson."""
    direction = Direction(direction)
    if session.phase is not Phase.LESSONS:
        raise WrongPhase(f"cannot step during {session.phase.value}")
    lesson = pack.lessons[session.lesson_cursor]
    if direction is Direction.NEXT:
        if session.step_cursor + 1 < len(lesson.steps):
            session.step_cursor += 1
        elif session.lesson_cursor + 1 < len(pack.lessons):
            session.lesson_cursor += 1
            session.step_cursor = 0
        else:
            session.phase = Phase.POST_TEST
            _skip_empty_phases(session, pack)
    else:
        if session.step_cursor == 0:
            raise NoPrevious("already at the first step of this lesson")
        session.step_cursor -= 1
    _touch(session, {"op": "advance", "direction": direction.value}, _at)
    return render_state(session, pack)


def _question_for(pack: LessonPack, phase: Phase, question_id: str) -> Question:
    for q in pack.questions_for(_TEST_KEYS[phase]):
        if q.id == question_id:
            return q
    raise BadSelection(f"unknown question id {question_id!r} for {phase.value}")


def submit_answer(session: Session, pack: LessonPack, question_id: str,
                  selection: Iterable[int], _at: str | None = None) -> None:
    """Record one immutable answer; the phase advances when the set completes."""
    if session.phase not in _TEST_KEYS:
        raise WrongPhase(f"cannot answer questions during {session.phase.value}")
    key = _TEST_KEYS[session.phase]
    question = _question_for(pack, session.phase, question_id)
    if question_id in session.answers[key]:
        raise AlreadyAnswered(f"question {question_id!r} was already answered")
    chosen = frozenset(selection)
    if not chosen:
        raise BadSelection("selection must not be empty")
    if not all(isinstance(c, int) and 0 <= c < len(question.choices) for c in chosen):
        raise BadSelection("selection contains an out-of-range choice index")
    if question.kind is QuestionKind.SINGLE_CHOICE and len(chosen) != 1:
        raise BadSelection("single-choice questions take exactly one selection")
    session.answers[key][question_id] = chosen
    if len(session.answers[key]) == len(pack.questions_for(key)):
        session.phase = _next_phase(session.phase)
        if session.phase is Phase.LESSONS:
            session.lesson_cursor = 0
            session.step_cursor = 0
        _skip_empty_phases(session, pack)
    _touch(session, {
        "op": "answer", "question_id": question_id, "selection": sorted(chosen),
    }, _at)


def submit_survey(session: Session, pack: LessonPack, statement_id: str,
                  level: int, _at: str | None = None) -> None:
    if session.phase is not Phase.SURVEY:
        raise WrongPhase(f"cannot answer the survey during {session.phase.value}")
    if not any(s.id == statement_id for s in pack.survey):
        raise BadSelection(f"unknown survey statement {statement_id!r}")
    if statement_id in session.survey_responses:
        raise AlreadyAnswered(f"statement {statement_id!r} was already answered")
    if not isinstance(level, int) or not (LIKERT_MIN <= level <= LIKERT_MAX):
        raise LevelOutOfRange(f"level must be an integer in [{LIKERT_MIN}, {LIKERT_MAX}]")
    session.survey_responses[statement_id] = level
    if len(session.survey_responses) == len(pack.survey):
        session.phase = Phase.DONE
    _touch(session, {"op": "survey", "statement_id": statement_id, "level": level}, _at)


def score_test(answers: dict[str, frozenset[int]] | dict[str, set[int]],
               key: Sequence[Question]) -> ScoreReport:
    """All-or-nothing scoring: credit only for exactly the correct set."""
    per_question: dict[str, int] = {}
    for question in key:
        if question.id not in answers:
            raise MissingAnswer(f"no answer recorded for question {question.id!r}")
        per_question[question.id] = int(frozenset(answers[question.id]) == question.correct)
    return ScoreReport(per_question=per_question, total=sum(per_question.values()))


# --- rendering ----------------------------------------------------------

def _kind_for_side(annotations: Sequence[Annotation], side: Side) -> str:
    for a in annotations:
        if a.side in (side, Side.BOTH):
            return a.kind.value
    return annotations[0].kind.value


def _lesson_view(session: Session, pack: LessonPack) -> LessonView:
    lesson = pack.lessons[session.lesson_cursor]
    step = lesson.steps[session.step_cursor]
    final_step = session.step_cursor == len(lesson.steps) - 1
    known_kind = _kind_for_side(step.annotations, Side.KNOWN)
    target_kind = _kind_for_side(step.annotations, Side.TARGET)
    return LessonView(
        lesson_id=lesson.id,
        lesson_index=session.lesson_cursor,
        lesson_count=len(pack.lessons),
        title=lesson.title,
        step_index=session.step_cursor,
        step_count=len(lesson.steps),
        known_language=lesson.known_snippet.language,
        known_source=lesson.known_snippet.source,
        target_language=lesson.target_snippet.language,
        target_source=lesson.target_snippet.source,
        known_highlights=tuple(Highlight(s.start, s.end, known_kind) for s in step.known_spans),
        target_highlights=tuple(Highlight(s.start, s.end, target_kind) for s in step.target_spans),
        annotations=tuple(
            {"kind": a.kind.value, "side": a.side.value, "text": a.text, "rule": a.rule_id}
            for a in step.annotations
        ),
        output=lesson.output if final_step else None,
    )


def _next_question(session: Session, pack: LessonPack) -> QuestionView:
    key = _TEST_KEYS[session.phase]
    answered = session.answers[key]
    questions = {q.id: q for q in pack.questions_for(key)}
    for qid in session.question_order[key]:
        if qid not in answered:
            q = questions[qid]
            return QuestionView(
                id=q.id, prompt=q.prompt, kind=q.kind.value, choices=q.choices,
                answered=len(answered), total=len(questions),
            )
    raise WrongPhase("all questions in this phase are already answered")


def render_state(session: Session, pack: LessonPack) -> RenderState:
    """What the client should display right now; never includes answer keys."""
    if session.phase is Phase.LESSONS:
        return RenderState(phase=session.phase, lesson=_lesson_view(session, pack))
    if session.phase in _TEST_KEYS:
        return RenderState(phase=session.phase, question=_next_question(session, pack))
    if session.phase is Phase.SURVEY:
        for statement in pack.survey:
            if statement.id not in session.survey_responses:
                return RenderState(phase=session.phase, statement=StatementView(
                    id=statement.id, text=statement.text,
                    answered=len(session.survey_responses), total=len(pack.survey),
                ))
    return RenderState(phase=session.phase)


# --- persistence & replay -----------------------------------------------

def serialize_session(session: Session) -> dict[str, Any]:
    return {
        "format_version": SESSION_FORMAT_VERSION,
        "id": session.id,
        "pack_id": session.pack_id,
        "participant": session.participant,
        "seed": session.seed,
        "phase": session.phase.value,
        "lesson_cursor": session.lesson_cursor,
        "step_cursor": session.step_cursor,
        "question_order": {k: list(v) for k, v in session.question_order.items()},
        "answers": {
            k: {qid: sorted(sel) for qid, sel in answers.items()}
            for k, answers in session.answers.items()
        },
        "survey_responses": dict(session.survey_responses),
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "events": list(session.events),
    }


def session_from_record(record: dict[str, Any]) -> Session:
    try:
        if record.get("format_version") != SESSION_FORMAT_VERSION:
            raise ValueError(f"unsupported session format {record.get('format_version')!r}")
        return Session(
            id=record["id"],
            pack_id=record["pack_id"],
            participant=record["participant"],
            seed=record["seed"],
            phase=Phase(record["phase"]),
            lesson_cursor=record["lesson_cursor"],
            step_cursor=record["step_cursor"],
            question_order={k: tuple(v) for k, v in record["question_order"].items()},
            answers={
                k: {qid: frozenset(sel) for qid, sel in answers.items()}
                for k, answers in record["answers"].items()
            },
            survey_responses=dict(record["survey_responses"]),
            created_at=record["created_at"],
            updated_at=record["updated_at"],
            events=list(record["events"]),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CorruptRecord(f"session record is not usable: {exc}") from exc


def replay(pack: LessonPack, events: Sequence[dict[str, Any]]) -> Session:
    """Rebuild a session by replaying its event log against the pack.

    Timestamps are taken from the events, so a faithful log reproduces the
    original session exactly, ``updated_at`` included.
    """
    if not events or events[0].get("op") != "create":
        raise CorruptRecord("event log must begin with a create event")
    head = events[0]
    try:
        session = _new_session(pack, head["participant"], head["seed"], head["at"])
    except KeyError as exc:
        raise CorruptRecord(f"create event is missing {exc}") from exc
    for event in events[1:]:
        op = event.get("op")
        at = event.get("at")
        if op == "advance":
            advance(session, pack, event["direction"], _at=at)
        elif op == "answer":
            submit_answer(session, pack, event["question_id"], event["selection"], _at=at)
        elif op == "survey":
            submit_survey(session, pack, event["statement_id"], event["level"], _at=at)
        else:
            raise CorruptRecord(f"unknown event op {op!r}")
    return session

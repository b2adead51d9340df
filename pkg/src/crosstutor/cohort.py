"""Synthetic cohorts: finished sessions with chosen per-question marginals.

Useful for exercising the analytics pipeline end to end when only aggregate
counts are available: given per-question pre-test correct totals, post-pre
deltas, and per-statement Likert counts, this builds a cohort of sessions
whose aggregates reproduce those numbers exactly.

Assignment is prefix-greedy: question q is answered correctly by the first
``pre[q]`` participants on the pre-test and the first ``pre[q] + delta[q]``
on the post-test; statement s gets its levels dealt out in SD..SA order.
Prefix assignment concentrates post-test credit on everyone, which for the
default marginals gives every participant a strictly positive improvement.
"""
from __future__ import annotations

from typing import Sequence

from . import engine
from .engine import Direction, Phase, Session
from .model import LessonPack, Question

#: Default marginals for the shipped 7-question pack and a 20-person cohort.
DEFAULT_PARTICIPANTS = 20
DEFAULT_PRE_CORRECT = (0, 13, 0, 10, 0, 0, 0)
DEFAULT_DELTAS = (18, 2, 20, 3, 20, 18, 1)
DEFAULT_LIKERT_COUNTS = (
    (0, 0, 1, 5, 14),
    (0, 1, 3, 2, 14),
    (1, 0, 1, 6, 12),
    (0, 0, 1, 6, 13),
    (0, 2, 0, 6, 12),
    (3, 0, 1, 8, 8),
    (2, 0, 3, 7, 8),
)


def wrong_selection(question: Question) -> set[int]:
    """A deterministic selection that scores zero on the question."""
    for index in range(len(question.choices)):
        if index not in question.correct:
            return {index}
    raise ValueError(f"question {question.id!r} has no incorrect choice")


def correctness_matrix(
    participants: int, totals: Sequence[int], question_count: int
) -> list[list[bool]]:
    """participants x questions boolean matrix with the given column sums."""
    if len(totals) != question_count:
        raise ValueError("one total per question required")
    if any(not 0 <= t <= participants for t in totals):
        raise ValueError("totals must lie in [0, participants]")
    return [[i < totals[q] for q in range(question_count)] for i in range(participants)]


def level_assignments(counts: Sequence[Sequence[int]], participants: int) -> list[list[int]]:
    """participants x statements Likert levels realizing the given counts."""
    out = [[0] * len(counts) for _ in range(participants)]
    for s, row in enumerate(counts):
        if sum(row) != participants:
            raise ValueError(f"statement {s}: counts must sum to {participants}")
        i = 0
        for level, count in enumerate(row, start=1):
            for _ in range(count):
                out[i][s] = level
                i += 1
    return out


def run_scripted_session(
    pack: LessonPack,
    participant: str,
    seed: int,
    pretest_answers: dict[str, set[int]],
    posttest_answers: dict[str, set[int]],
    survey_levels: dict[str, int],
) -> Session:
    """Drive one session through every phase with the given answers."""
    session = engine.create_session(pack, participant, seed)
    while session.phase is Phase.PRE_TEST:
        state = engine.render_state(session, pack)
        assert state.question is not None
        engine.submit_answer(session, pack, state.question.id, pretest_answers[state.question.id])
    while session.phase is Phase.LESSONS:
        engine.advance(session, pack, Direction.NEXT)
    while session.phase is Phase.POST_TEST:
        state = engine.render_state(session, pack)
        assert state.question is not None
        engine.submit_answer(session, pack, state.question.id, posttest_answers[state.question.id])
    while session.phase is Phase.SURVEY:
        state = engine.render_state(session, pack)
        assert state.statement is not None
        engine.submit_survey(session, pack, state.statement.id, survey_levels[state.statement.id])
    return session


def build_cohort(
    pack: LessonPack,
    *,
    participants: int = DEFAULT_PARTICIPANTS,
    pre_correct: Sequence[int] = DEFAULT_PRE_CORRECT,
    deltas: Sequence[int] = DEFAULT_DELTAS,
    likert_counts: Sequence[Sequence[int]] = DEFAULT_LIKERT_COUNTS,
    base_seed: int = 1000,
) -> list[Session]:
    """Finished sessions whose aggregates equal the requested marginals."""
    questions = pack.pretest
    post_correct = [p + d for p, d in zip(pre_correct, deltas)]
    pre_matrix = correctness_matrix(participants, pre_correct, len(questions))
    post_matrix = correctness_matrix(participants, post_correct, len(questions))
    levels = level_assignments(likert_counts, participants)

    sessions = []
    for i in range(participants):
        def answers_for(matrix_row: list[bool]) -> dict[str, set[int]]:
            return {
                q.id: set(q.correct) if matrix_row[idx] else wrong_selection(q)
                for idx, q in enumerate(questions)
            }

        sessions.append(run_scripted_session(
            pack,
            participant=f"p{i + 1:02d}",
            seed=base_seed + i,
            pretest_answers=answers_for(pre_matrix[i]),
            posttest_answers=answers_for(post_matrix[i]),
            survey_levels={s.id: levels[i][idx] for idx, s in enumerate(pack.survey)},
        ))
    return sessions

#!/usr/bin/env python3
"""Step through every lesson of the shipped pack in the terminal.

Prints each step the way the web client would draw it: both snippets with
the highlighted ranges marked, the annotations beside them, and the output
box once a lesson's final step is reached.
"""
from __future__ import annotations

import sys

from crosstutor import engine
from crosstutor.engine import Direction, Phase
from crosstutor.model import load_shipped_pack

MARKS = {"transfer": "~", "gotcha": "^", "newfact": "+"}


def underline(source: str, highlights) -> str:
    line = [" "] * len(source)
    for h in highlights:
        for i in range(h.start, h.end):
            line[i] = MARKS.get(h.kind, "~")
    return "".join(line).rstrip()


def print_step(state) -> None:
    lesson = state.lesson
    print(f"--- {lesson.title} (lesson {lesson.lesson_index + 1}/{lesson.lesson_count}, "
          f"step {lesson.step_index + 1}/{lesson.step_count})")
    print(f"  {lesson.known_language}: {lesson.known_source}")
    if lesson.known_highlights:
        print(f"  {' ' * len(lesson.known_language)}  {underline(lesson.known_source, lesson.known_highlights)}")
    print(f"  {lesson.target_language}:      {lesson.target_source}")
    if lesson.target_highlights:
        print(f"  {' ' * len(lesson.target_language)}       {underline(lesson.target_source, lesson.target_highlights)}")
    for annotation in lesson.annotations:
        print(f"    [{annotation['kind']}/{annotation['side']}] {annotation['text']}")
    if lesson.output is not None:
        print(f"  output ({lesson.output.caption})")
        for name, text in (("known", lesson.output.known_output),
                           ("target", lesson.output.target_output)):
            print(f"    {name}:")
            for line in text.splitlines():
                print(f"      {line}")
    print()


def main() -> int:
    pack = load_shipped_pack()
    session = engine.create_session(pack, "demo", 1)
    # Breeze through the pre-test; the walkthrough is what we want to see.
    while session.phase is Phase.PRE_TEST:
        state = engine.render_state(session, pack)
        question = next(q for q in pack.pretest if q.id == state.question.id)
        engine.submit_answer(session, pack, question.id, {min(question.correct)})
    while session.phase is Phase.LESSONS:
        print_step(engine.render_state(session, pack))
        engine.advance(session, pack, Direction.NEXT)
    print("(post-test reached; run the server for the full experience)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

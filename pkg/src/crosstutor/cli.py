"""Operator command line: validate, serve, lint, run, stats.

Exit codes: 0 success, 1 validation/lint findings or runtime failures,
2 usage errors (argparse's convention).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import engine
from .analytics import render_summary_text, study_summary
from .engine import Direction, Phase
from .errors import TutorError
from .model import LessonPack, load_pack, shipped_pack_path, validate_pack
from .rules import lint_target, load_rules, shipped_rules_path
from .store import SessionStore

DEFAULT_STORE_ENV = "TUTOR_STORE"


def _store_root(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(DEFAULT_STORE_ENV, "sessions"))


def _load_rules(path: str | None):
    return load_rules(path if path else shipped_rules_path())


# --- subcommands ----------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    try:
        pack = load_pack(args.pack)
    except TutorError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    rules = None
    if not args.no_rules:
        rules = _load_rules(args.rules)
    report = validate_pack(pack, rules)
    if not report.valid:
        for line in report.render_lines():
            print(f"{args.pack}: {line}")
        print(f"pack invalid: {len(report.violations)} violation(s)")
        return 1
    print(f"pack valid: {len(pack.lessons)} lessons, {len(pack.pretest)} questions")
    return 0


def cmd_lint(args: argparse.Namespace) -> int:
    frames = set(filter(None, (args.frames or "").split(",")))
    rules = _load_rules(args.rules)
    try:
        source = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    # Snippet sources are newline-free by construction; lint whole files as-is.
    try:
        findings = lint_target(rules, source.rstrip("\n"), context=frames)
    except TutorError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    for finding in findings:
        print(finding.render(args.file))
    return 1 if findings else 0


def _load_packs_dir(directory: Path) -> dict[str, LessonPack]:
    packs: dict[str, LessonPack] = {}
    for path in sorted(directory.glob("*.pack.json")):
        pack = load_pack(path)
        packs[pack.id] = pack
    return packs


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    if args.packs:
        packs = _load_packs_dir(Path(args.packs))
    else:
        pack = load_pack(shipped_pack_path())
        packs = {pack.id: pack}
    if not packs:
        print("error: no pack files found", file=sys.stderr)
        return 1
    rules = _load_rules(args.rules)
    for pack in packs.values():
        report = validate_pack(pack, rules)
        if not report.valid:
            for line in report.render_lines():
                print(f"{pack.id}: {line}", file=sys.stderr)
            return 1
    store = SessionStore(_store_root(args.store))
    ui_dir = Path(args.ui) if args.ui else None
    app = create_app(packs, rules, store, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _scripted_selection(script: dict[str, Any], phase_key: str, question_id: str) -> set[int]:
    try:
        return set(script[phase_key][question_id])
    except KeyError:
        raise TutorError(
            f"script has no {phase_key} answer for question {question_id!r}"
        ) from None


def cmd_run(args: argparse.Namespace) -> int:
    try:
        pack = load_pack(args.pack)
        script = json.loads(Path(args.script).read_text(encoding="utf-8"))
    except (TutorError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    participant = args.participant or script.get("participant", "anonymous")
    store = SessionStore(_store_root(args.store))
    try:
        session = engine.create_session(pack, participant, args.seed)
        store.persist(session)

        def answer_current_question(key: str) -> None:
            state = engine.render_state(session, pack)
            assert state.question is not None
            engine.submit_answer(
                session, pack, state.question.id,
                _scripted_selection(script, key, state.question.id),
            )
            store.persist(session)

        while session.phase is Phase.PRE_TEST:
            answer_current_question("pretest")
        print(f"pretest: {len(session.answers['pretest'])} answers")

        while session.phase is Phase.LESSONS:
            engine.advance(session, pack, Direction.NEXT)
            store.persist(session)
        total_steps = sum(len(l.steps) for l in pack.lessons)
        print(f"lessons: {len(pack.lessons)} lessons, {total_steps} steps")

        while session.phase is Phase.POST_TEST:
            answer_current_question("posttest")
        print(f"posttest: {len(session.answers['posttest'])} answers")
        while session.phase is Phase.SURVEY:
            state = engine.render_state(session, pack)
            assert state.statement is not None
            level = script.get("survey", {}).get(state.statement.id)
            if level is None:
                raise TutorError(f"script has no survey level for {state.statement.id!r}")
            engine.submit_survey(session, pack, state.statement.id, level)
            store.persist(session)
        print(f"survey: {len(session.survey_responses)} responses")
        print(f"phase: {session.phase.value}")

        record = engine.serialize_session(store.restore(session.id))
        replayed = engine.serialize_session(engine.replay(pack, record["events"]))
        if record != replayed:
            print("replay: MISMATCH", file=sys.stderr)
            return 1
        print("replay: identical")

        pre = engine.score_test(session.answers["pretest"], pack.pretest)
        post = engine.score_test(session.answers["posttest"], pack.posttest)
        print(f"session {session.id}: pre {pre.total}/{len(pack.pretest)}, "
              f"post {post.total}/{len(pack.posttest)}")
    except TutorError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        pack = load_pack(args.pack if args.pack else shipped_pack_path())
        store = SessionStore(args.results)
        sessions = store.load_all(skip_corrupt=True)
        summary = study_summary(sessions, pack, alpha=args.alpha,
                                zero_handling=args.zeros)
    except TutorError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    if args.format == "json":
        print(json.dumps(summary, indent=2))
    else:
        print(render_summary_text(summary))
    return 0


# --- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tutor",
        description="Cross-language tutoring engine: lessons, quizzes, linting, and study analytics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a pack file against all invariants")
    p.add_argument("pack")
    p.add_argument("--rules", help="rule corpus to check annotation links against")
    p.add_argument("--no-rules", action="store_true", help="skip annotation link checks")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lint", help="flag negative-transfer idioms in a target-language file")
    p.add_argument("file")
    p.add_argument("--frames", help="comma-separated data-frame variable names")
    p.add_argument("--rules")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--packs", help="directory of *.pack.json files (default: shipped pack)")
    p.add_argument("--rules")
    p.add_argument("--store", help=f"session directory (default ${DEFAULT_STORE_ENV} or ./sessions)")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory with the built web client")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run", help="drive a full scripted session without the UI")
    p.add_argument("pack")
    p.add_argument("--script", required=True, help="JSON file with answers and survey levels")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--participant")
    p.add_argument("--store")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("stats", help="aggregate finished sessions from a results directory")
    p.add_argument("results")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--pack", help="pack file to score against (default: shipped pack)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--zeros", choices=("discard", "pratt"), default="discard",
                   help="zero-difference handling in the signed-rank test")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

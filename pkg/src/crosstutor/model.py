"""Lesson-pack data model: loading, serialization, and validation.

A pack is an authored curriculum: paired snippets in a known and a target
language, ordered walkthrough steps with highlight spans and annotations,
pre/post test questions, and survey statements. Packs are immutable after
load and safe to share across sessions.

Loading enforces the document schema (shapes, enums, non-empty fields);
``validate_pack`` checks the cross-cutting invariants: span bounds, overlap,
token alignment, id uniqueness, pre/post question-set equality, and, when a
rule set is supplied, annotation-to-rule links.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

from . import lexers
from .errors import MalformedDocument, MissingFile, UnknownField
from .lexers import Span

FORMAT_VERSION = 1

SHIPPED_PACK_FILENAME = "python-to-r.pack.json"


class AnnotationKind(str, Enum):
    TRANSFER = "transfer"
    GOTCHA = "gotcha"
    NEW_FACT = "newfact"


class Side(str, Enum):
    KNOWN = "known"
    TARGET = "target"
    BOTH = "both"


class QuestionKind(str, Enum):
    SINGLE_CHOICE = "single_choice"
    MULTI_ANSWER = "multi_answer"


@dataclass(frozen=True)
class Snippet:
    language: str
    source: str


@dataclass(frozen=True)
class Annotation:
    kind: AnnotationKind
    side: Side
    text: str
    rule_id: str | None = None


@dataclass(frozen=True)
class Step:
    index: int
    known_spans: tuple[Span, ...]
    target_spans: tuple[Span, ...]
    annotations: tuple[Annotation, ...]


@dataclass(frozen=True)
class OutputBox:
    known_output: str
    target_output: str
    caption: str


@dataclass(frozen=True)
class Lesson:
    id: str
    title: str
    known_snippet: Snippet
    target_snippet: Snippet
    steps: tuple[Step, ...]
    output: OutputBox | None = None


@dataclass(frozen=True)
class Question:
    id: str
    prompt: str
    kind: QuestionKind
    choices: tuple[str, ...]
    correct: frozenset[int]


@dataclass(frozen=True)
class SurveyStatement:
    id: str
    text: str


@dataclass(frozen=True)
class LessonPack:
    id: str
    title: str
    known_language: str
    target_language: str
    lessons: tuple[Lesson, ...]
    pretest: tuple[Question, ...]
    posttest: tuple[Question, ...]
    survey: tuple[SurveyStatement, ...]

    def lesson_by_id(self, lesson_id: str) -> Lesson | None:
        for lesson in self.lessons:
            if lesson.id == lesson_id:
                return lesson
        return None

    def questions_for(self, phase_key: str) -> tuple[Question, ...]:
        return self.pretest if phase_key == "pretest" else self.posttest


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str
    lesson_id: str | None = None
    step_index: int | None = None

    def render(self) -> str:
        where = ""
        if self.lesson_id is not None:
            where = f"{self.lesson_id}:"
            if self.step_index is not None:
                where += f"step {self.step_index}:"
            where += " "
        return f"{where}[{self.rule}] {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def render_lines(self) -> list[str]:
        return [v.render() for v in self.violations]


# --- document decoding -------------------------------------------------

def _fail(path: str, reason: str) -> MalformedDocument:
    return MalformedDocument(f"{path}: {reason}")


def _as_obj(value: Any, path: str, allowed: set[str]) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise _fail(path, "expected an object")
    extra = set(value) - allowed
    if extra:
        raise UnknownField(f"{path}: unknown field(s) {sorted(extra)}")
    return value


def _get(obj: dict[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise _fail(path, f"missing required field '{key}'")
    return obj[key]


def _as_str(value: Any, path: str, *, nonempty: bool = True) -> str:
    if not isinstance(value, str):
        raise _fail(path, "expected a string")
    if nonempty and not value:
        raise _fail(path, "must not be empty")
    return value


def _as_list(value: Any, path: str, *, minimum: int = 0) -> list[Any]:
    if not isinstance(value, list):
        raise _fail(path, "expected a list")
    if len(value) < minimum:
        raise _fail(path, f"needs at least {minimum} item(s)")
    return value


def _as_span(value: Any, path: str) -> Span:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise _fail(path, "span must be a [start, end] pair of integers")
    try:
        return Span(value[0], value[1])
    except ValueError as exc:
        raise _fail(path, str(exc)) from exc


def _as_enum(value: Any, enum_cls: type[Enum], path: str) -> Any:
    try:
        return enum_cls(value)
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise _fail(path, f"expected one of: {options}") from None


def _decode_snippet(value: Any, path: str) -> Snippet:
    obj = _as_obj(value, path, {"language", "source"})
    source = _as_str(_get(obj, "source", path), f"{path}.source")
    # Normalized form: no trailing newline, so span bounds are unambiguous.
    if source.endswith("\n"):
        raise _fail(f"{path}.source", "must not end with a newline")
    return Snippet(
        language=_as_str(_get(obj, "language", path), f"{path}.language"),
        source=source,
    )


def _decode_annotation(value: Any, path: str) -> Annotation:
    obj = _as_obj(value, path, {"kind", "side", "text", "rule"})
    rule = obj.get("rule")
    if rule is not None:
        rule = _as_str(rule, f"{path}.rule")
    return Annotation(
        kind=_as_enum(_get(obj, "kind", path), AnnotationKind, f"{path}.kind"),
        side=_as_enum(_get(obj, "side", path), Side, f"{path}.side"),
        text=_as_str(_get(obj, "text", path), f"{path}.text"),
        rule_id=rule,
    )


def _decode_step(value: Any, path: str, index: int) -> Step:
    obj = _as_obj(value, path, {"known_spans", "target_spans", "annotations"})
    known = tuple(
        _as_span(s, f"{path}.known_spans[{i}]")
        for i, s in enumerate(_as_list(obj.get("known_spans", []), f"{path}.known_spans"))
    )
    target = tuple(
        _as_span(s, f"{path}.target_spans[{i}]")
        for i, s in enumerate(_as_list(obj.get("target_spans", []), f"{path}.target_spans"))
    )
    if not known and not target:
        raise _fail(path, "a step must highlight at least one side")
    annotations = tuple(
        _decode_annotation(a, f"{path}.annotations[{i}]")
        for i, a in enumerate(_as_list(_get(obj, "annotations", path), f"{path}.annotations", minimum=1))
    )
    return Step(index=index, known_spans=known, target_spans=target, annotations=annotations)


def _decode_output(value: Any, path: str) -> OutputBox:
    obj = _as_obj(value, path, {"known", "target", "caption"})
    return OutputBox(
        known_output=_as_str(_get(obj, "known", path), f"{path}.known"),
        target_output=_as_str(_get(obj, "target", path), f"{path}.target"),
        caption=_as_str(_get(obj, "caption", path), f"{path}.caption"),
    )


def _decode_lesson(value: Any, path: str) -> Lesson:
    obj = _as_obj(value, path, {"id", "title", "known", "target", "steps", "output"})
    steps_raw = _as_list(_get(obj, "steps", path), f"{path}.steps", minimum=1)
    steps = tuple(_decode_step(s, f"{path}.steps[{i}]", i) for i, s in enumerate(steps_raw))
    output = obj.get("output")
    return Lesson(
        id=_as_str(_get(obj, "id", path), f"{path}.id"),
        title=_as_str(_get(obj, "title", path), f"{path}.title"),
        known_snippet=_decode_snippet(_get(obj, "known", path), f"{path}.known"),
        target_snippet=_decode_snippet(_get(obj, "target", path), f"{path}.target"),
        steps=steps,
        output=None if output is None else _decode_output(output, f"{path}.output"),
    )


def _decode_question(value: Any, path: str) -> Question:
    obj = _as_obj(value, path, {"id", "prompt", "kind", "choices", "correct"})
    kind = _as_enum(_get(obj, "kind", path), QuestionKind, f"{path}.kind")
    choices = tuple(
        _as_str(c, f"{path}.choices[{i}]")
        for i, c in enumerate(_as_list(_get(obj, "choices", path), f"{path}.choices", minimum=2))
    )
    correct_raw = _as_list(_get(obj, "correct", path), f"{path}.correct", minimum=1)
    if not all(isinstance(c, int) for c in correct_raw):
        raise _fail(f"{path}.correct", "expected a list of choice indices")
    correct = frozenset(correct_raw)
    if len(correct) != len(correct_raw):
        raise _fail(f"{path}.correct", "duplicate choice indices")
    if not all(0 <= c < len(choices) for c in correct):
        raise _fail(f"{path}.correct", "choice index out of range")
    if kind is QuestionKind.SINGLE_CHOICE and len(correct) != 1:
        raise _fail(f"{path}.correct", "single-choice questions have exactly one correct index")
    return Question(
        id=_as_str(_get(obj, "id", path), f"{path}.id"),
        prompt=_as_str(_get(obj, "prompt", path), f"{path}.prompt"),
        kind=kind,
        choices=choices,
        correct=correct,
    )


def _decode_statement(value: Any, path: str) -> SurveyStatement:
    obj = _as_obj(value, path, {"id", "text"})
    return SurveyStatement(
        id=_as_str(_get(obj, "id", path), f"{path}.id"),
        text=_as_str(_get(obj, "text", path), f"{path}.text"),
    )


def decode_pack(document: Any) -> LessonPack:
    """Materialize a pack from a parsed JSON document."""
    obj = _as_obj(
        document,
        "$",
        {"format_version", "id", "title", "known_language", "target_language",
         "lessons", "pretest", "posttest", "survey"},
    )
    version = _get(obj, "format_version", "$")
    if version != FORMAT_VERSION:
        raise _fail("$.format_version", f"unsupported format version {version!r}")
    lessons_raw = _as_list(_get(obj, "lessons", "$"), "$.lessons", minimum=1)
    return LessonPack(
        id=_as_str(_get(obj, "id", "$"), "$.id"),
        title=_as_str(_get(obj, "title", "$"), "$.title"),
        known_language=_as_str(_get(obj, "known_language", "$"), "$.known_language"),
        target_language=_as_str(_get(obj, "target_language", "$"), "$.target_language"),
        lessons=tuple(_decode_lesson(l, f"$.lessons[{i}]") for i, l in enumerate(lessons_raw)),
        pretest=tuple(
            _decode_question(q, f"$.pretest[{i}]")
            for i, q in enumerate(_as_list(_get(obj, "pretest", "$"), "$.pretest"))
        ),
        posttest=tuple(
            _decode_question(q, f"$.posttest[{i}]")
            for i, q in enumerate(_as_list(_get(obj, "posttest", "$"), "$.posttest"))
        ),
        survey=tuple(
            _decode_statement(s, f"$.survey[{i}]")
            for i, s in enumerate(_as_list(_get(obj, "survey", "$"), "$.survey"))
        ),
    )


def load_pack(path: str | Path) -> LessonPack:
    """Load a pack file; raises MissingFile / MalformedDocument / UnknownField."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"pack file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return decode_pack(document)


# --- serialization ------------------------------------------------------

def serialize_pack(pack: LessonPack) -> dict[str, Any]:
    """Inverse of ``decode_pack``: load ∘ serialize is identity on valid packs."""

    def snippet(s: Snippet) -> dict[str, Any]:
        return {"language": s.language, "source": s.source}

    def annotation(a: Annotation) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": a.kind.value, "side": a.side.value, "text": a.text}
        if a.rule_id is not None:
            out["rule"] = a.rule_id
        return out

    def step(s: Step) -> dict[str, Any]:
        return {
            "known_spans": [sp.as_pair() for sp in s.known_spans],
            "target_spans": [sp.as_pair() for sp in s.target_spans],
            "annotations": [annotation(a) for a in s.annotations],
        }

    def lesson(l: Lesson) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": l.id,
            "title": l.title,
            "known": snippet(l.known_snippet),
            "target": snippet(l.target_snippet),
            "steps": [step(s) for s in l.steps],
        }
        if l.output is not None:
            out["output"] = {
                "known": l.output.known_output,
                "target": l.output.target_output,
                "caption": l.output.caption,
            }
        return out

    def question(q: Question) -> dict[str, Any]:
        return {
            "id": q.id,
            "prompt": q.prompt,
            "kind": q.kind.value,
            "choices": list(q.choices),
            "correct": sorted(q.correct),
        }

    return {
        "format_version": FORMAT_VERSION,
        "id": pack.id,
        "title": pack.title,
        "known_language": pack.known_language,
        "target_language": pack.target_language,
        "lessons": [lesson(l) for l in pack.lessons],
        "pretest": [question(q) for q in pack.pretest],
        "posttest": [question(q) for q in pack.posttest],
        "survey": [{"id": s.id, "text": s.text} for s in pack.survey],
    }


# --- validation ---------------------------------------------------------

def _spans_overlap(spans: tuple[Span, ...]) -> bool:
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    return any(a.end > b.start for a, b in zip(ordered, ordered[1:]))


def _validate_side(
    report: ValidationReport,
    lesson: Lesson,
    step: Step,
    side: Side,
    spans: tuple[Span, ...],
    snippet: Snippet,
    tokens: lexers.TokenList | None,
) -> None:
    for span in spans:
        if span.end > len(snippet.source):
            report.violations.append(Violation(
                "span-out-of-bounds",
                f"{side.value} span [{span.start}, {span.end}) exceeds source length {len(snippet.source)}",
                lesson.id, step.index,
            ))
    if _spans_overlap(spans):
        report.violations.append(Violation(
            "span-overlap", f"overlapping spans on {side.value} side", lesson.id, step.index,
        ))
    if tokens is not None:
        in_bounds = [s for s in spans if s.end <= len(snippet.source)]
        aligned = lexers.spans_on_token_boundaries(tokens, in_bounds)
        for span, ok in zip(in_bounds, aligned):
            if not ok:
                report.violations.append(Violation(
                    "span-not-token-aligned",
                    f"{side.value} span [{span.start}, {span.end}) does not sit on token boundaries",
                    lesson.id, step.index,
                ))
    if spans and not any(a.side in (side, Side.BOTH) for a in step.annotations):
        report.violations.append(Violation(
            "side-missing-annotation",
            f"{side.value} side is highlighted but has no annotation for that side",
            lesson.id, step.index,
        ))


def validate_pack(pack: LessonPack, rules: "Any | None" = None) -> ValidationReport:
    """Check cross-cutting pack invariants; deterministic and order-stable.

    ``rules`` may be a rule set (see :mod:`crosstutor.rules`); when given,
    every annotation must link to an existing rule of the same kind.
    """
    report = ValidationReport()

    if pack.known_language == pack.target_language:
        report.violations.append(Violation(
            "same-language", f"known and target language are both {pack.known_language!r}",
        ))

    seen_lessons: set[str] = set()
    for lesson in pack.lessons:
        if lesson.id in seen_lessons:
            report.violations.append(Violation("duplicate-lesson-id", lesson.id, lesson.id))
        seen_lessons.add(lesson.id)

    for key, questions in (("pretest", pack.pretest), ("posttest", pack.posttest)):
        seen_q: set[str] = set()
        for q in questions:
            if q.id in seen_q:
                report.violations.append(Violation("duplicate-question-id", f"{key}: {q.id}"))
            seen_q.add(q.id)

    pre_by_id = {q.id: q for q in pack.pretest}
    post_by_id = {q.id: q for q in pack.posttest}
    if set(pre_by_id) != set(post_by_id):
        report.violations.append(Violation(
            "pretest-posttest-mismatch",
            f"question id sets differ: only-pre={sorted(set(pre_by_id) - set(post_by_id))} "
            f"only-post={sorted(set(post_by_id) - set(pre_by_id))}",
        ))
    else:
        for qid in pre_by_id:
            if pre_by_id[qid] != post_by_id[qid]:
                report.violations.append(Violation(
                    "pretest-posttest-mismatch", f"question {qid} differs between the two tests",
                ))

    for lesson in pack.lessons:
        sides = (
            (Side.KNOWN, lesson.known_snippet),
            (Side.TARGET, lesson.target_snippet),
        )
        token_lists: dict[Side, lexers.TokenList | None] = {}
        for side, snippet in sides:
            try:
                token_lists[side] = lexers.tokenize(snippet.language, snippet.source)
            except Exception as exc:  # lex errors become data, not exceptions
                token_lists[side] = None
                report.violations.append(Violation(
                    "snippet-lex-error", f"{side.value} snippet: {exc}", lesson.id,
                ))
        for position, step in enumerate(lesson.steps):
            if step.index != position:
                report.violations.append(Violation(
                    "step-index-mismatch", f"step index {step.index} at position {position}", lesson.id, step.index,
                ))
            _validate_side(report, lesson, step, Side.KNOWN, step.known_spans,
                           lesson.known_snippet, token_lists[Side.KNOWN])
            _validate_side(report, lesson, step, Side.TARGET, step.target_spans,
                           lesson.target_snippet, token_lists[Side.TARGET])
            if rules is not None:
                for a in step.annotations:
                    if a.rule_id is None:
                        report.violations.append(Violation(
                            "missing-rule-link", "annotation does not reference a rule",
                            lesson.id, step.index,
                        ))
                        continue
                    rule = rules.by_id.get(a.rule_id)
                    if rule is None:
                        report.violations.append(Violation(
                            "unknown-rule", f"annotation references missing rule {a.rule_id!r}",
                            lesson.id, step.index,
                        ))
                    elif rule.kind != a.kind:
                        report.violations.append(Violation(
                            "rule-kind-mismatch",
                            f"annotation kind {a.kind.value} != rule {a.rule_id!r} kind {rule.kind.value}",
                            lesson.id, step.index,
                        ))

    return report


# --- shipped data -------------------------------------------------------

def data_path(filename: str) -> Path:
    """Path to a data file shipped inside the package."""
    return Path(str(resources.files("crosstutor") / "data" / filename))


def shipped_pack_path() -> Path:
    return data_path(SHIPPED_PACK_FILENAME)


def load_shipped_pack() -> LessonPack:
    return load_pack(shipped_pack_path())

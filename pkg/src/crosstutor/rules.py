"""Construct-mapping knowledge base and the negative-transfer linter.

Rules describe how a construct in the known language maps (or fails to map)
onto the target language. The lint pass is purely token-pattern based: it
walks the target-language token stream and flags idioms that are legal but
misleading for someone carrying habits over from the known language. There
is no dataflow and no parsing; what a token-level pass cannot see stays out
of scope.

Detection for two rules (``dot-column-access`` and ``bracket-subset-rows``)
is gated on a caller-supplied set of data-frame variable names. In the
target language ``df.Score`` is one perfectly legal identifier and
``v[v > 0]`` is idiomatic vector filtering, so firing without knowing that
``df`` names a frame would be wrong more often than right.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import MalformedDocument, MissingFile, UnknownConstruct, UnknownField
from .lexers import LANGUAGE_NAMES, Span, Token, TokenKind, tokenize
from .model import AnnotationKind, data_path

RULES_FORMAT_VERSION = 1
SHIPPED_RULES_FILENAME = "rules.json"

GOTCHA = "gotcha"
NOTE = "note"


@dataclass(frozen=True)
class ConstructRef:
    """Human-readable construct name plus an optional token-pattern note."""

    name: str
    pattern: str = ""


@dataclass(frozen=True)
class TransferRule:
    id: str
    kind: AnnotationKind
    known_construct: ConstructRef
    target_construct: ConstructRef
    explanation: str


@dataclass(frozen=True)
class Finding:
    rule_id: str
    span: Span
    message: str
    severity: str = GOTCHA

    def render(self, filename: str) -> str:
        return f"{filename}:{self.span.start}: [{self.severity} {self.rule_id}] {self.message}"


@dataclass(frozen=True)
class RuleSet:
    known_language: str
    target_language: str
    rules: tuple[TransferRule, ...]
    by_id: dict[str, TransferRule] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "by_id", {r.id: r for r in self.rules})


def lookup(rules: RuleSet, construct_id: str) -> TransferRule:
    rule = rules.by_id.get(construct_id)
    if rule is None:
        raise UnknownConstruct(f"no rule named {construct_id!r}")
    return rule


def render_explanation(rules: RuleSet, rule: TransferRule) -> str:
    """Fill the ``{known}``/``{target}`` placeholders with language names."""
    known = LANGUAGE_NAMES.get(rules.known_language, rules.known_language)
    target = LANGUAGE_NAMES.get(rules.target_language, rules.target_language)
    return rule.explanation.replace("{known}", known).replace("{target}", target)


# --- corpus loading -----------------------------------------------------

def _decode_construct(value: object, path: str) -> ConstructRef:
    if not isinstance(value, dict):
        raise MalformedDocument(f"{path}: expected an object")
    extra = set(value) - {"name", "pattern"}
    if extra:
        raise UnknownField(f"{path}: unknown field(s) {sorted(extra)}")
    name = value.get("name", "")
    pattern = value.get("pattern", "")
    if not isinstance(name, str) or not isinstance(pattern, str):
        raise MalformedDocument(f"{path}: name and pattern must be strings")
    return ConstructRef(name=name, pattern=pattern)


def decode_rules(document: object) -> RuleSet:
    if not isinstance(document, dict):
        raise MalformedDocument("$: expected an object")
    extra = set(document) - {"format_version", "known_language", "target_language", "rules"}
    if extra:
        raise UnknownField(f"$: unknown field(s) {sorted(extra)}")
    if document.get("format_version") != RULES_FORMAT_VERSION:
        raise MalformedDocument("$.format_version: unsupported version")
    rules: list[TransferRule] = []
    seen: set[str] = set()
    raw_rules = document.get("rules")
    if not isinstance(raw_rules, list) or not raw_rules:
        raise MalformedDocument("$.rules: expected a non-empty list")
    for i, raw in enumerate(raw_rules):
        path = f"$.rules[{i}]"
        if not isinstance(raw, dict):
            raise MalformedDocument(f"{path}: expected an object")
        extra = set(raw) - {"id", "kind", "known", "target", "explanation"}
        if extra:
            raise UnknownField(f"{path}: unknown field(s) {sorted(extra)}")
        try:
            kind = AnnotationKind(raw.get("kind"))
        except ValueError:
            raise MalformedDocument(f"{path}.kind: not a valid kind") from None
        rule_id = raw.get("id")
        explanation = raw.get("explanation")
        if not isinstance(rule_id, str) or not rule_id:
            raise MalformedDocument(f"{path}.id: expected a non-empty string")
        if rule_id in seen:
            raise MalformedDocument(f"{path}.id: duplicate rule id {rule_id!r}")
        seen.add(rule_id)
        if not isinstance(explanation, str) or not explanation:
            raise MalformedDocument(f"{path}.explanation: expected a non-empty string")
        known = _decode_construct(raw.get("known", {}), f"{path}.known")
        target = _decode_construct(raw.get("target", {}), f"{path}.target")
        if kind is AnnotationKind.NEW_FACT and known.pattern:
            raise MalformedDocument(
                f"{path}: new-fact rules map nothing from the known language; known pattern must be empty"
            )
        rules.append(TransferRule(rule_id, kind, known, target, explanation))
    known_language = document.get("known_language")
    target_language = document.get("target_language")
    if not isinstance(known_language, str) or not isinstance(target_language, str):
        raise MalformedDocument("$: known_language/target_language must be strings")
    return RuleSet(known_language, target_language, tuple(rules))


def load_rules(path: str | Path) -> RuleSet:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"rules file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return decode_rules(document)


def shipped_rules_path() -> Path:
    return data_path(SHIPPED_RULES_FILENAME)


def load_shipped_rules() -> RuleSet:
    return load_rules(shipped_rules_path())


# --- linting ------------------------------------------------------------

_COMPARISONS = {"==", "!=", "<", ">", "<=", ">="}


@dataclass
class _Group:
    """One bracket group in the significant-token stream."""

    opener: str          # "[" or "[["
    open_idx: int
    close_idx: int
    top_commas: list[int] = field(default_factory=list)
    top_comparisons: list[int] = field(default_factory=list)
    before: Token | None = None  # significant token preceding the opener


def _bracket_groups(sig: list[Token]) -> list[_Group]:
    groups: list[_Group] = []
    stack: list[_Group] = []

    def close_one(idx: int) -> None:
        group = stack.pop()
        group.close_idx = idx
        groups.append(group)

    for idx, tok in enumerate(sig):
        lex = tok.lexeme
        if tok.kind is TokenKind.DELIMITER and lex in ("[", "[["):
            before = sig[idx - 1] if idx > 0 else None
            stack.append(_Group(lex, idx, -1, before=before))
        elif tok.kind is TokenKind.DELIMITER and lex == "]":
            if stack:
                close_one(idx)
        elif tok.kind is TokenKind.DELIMITER and lex == "]]":
            # "]]" may close one double bracket or two stacked singles.
            if stack and stack[-1].opener == "[[":
                close_one(idx)
            else:
                if stack:
                    close_one(idx)
                if stack:
                    close_one(idx)
        elif stack:
            if lex == "," and tok.kind is TokenKind.DELIMITER:
                stack[-1].top_commas.append(idx)
            elif lex in _COMPARISONS and tok.kind is TokenKind.OPERATOR:
                stack[-1].top_comparisons.append(idx)
    return groups


def _depth_at(sig: list[Token], idx: int) -> int:
    depth = 0
    for tok in sig[:idx]:
        if tok.kind is TokenKind.DELIMITER:
            if tok.lexeme in ("[", "[["):
                depth += 1
            elif tok.lexeme == "]":
                depth = max(0, depth - 1)
            elif tok.lexeme == "]]":
                depth = max(0, depth - 2)
    return depth


def lint_target(
    rules: RuleSet,
    source: str,
    context: Iterable[str] | None = None,
) -> list[Finding]:
    """Flag negative-transfer idioms in target-language source.

    ``context`` names variables known to hold data frames; the two
    frame-sensitive detectors stay silent without it. Lex errors propagate.
    """
    frames = set(context or ())
    tokens = tokenize(rules.target_language, source)
    sig = tokens.significant()
    findings: list[Finding] = []

    def fire(rule_id: str, span: Span) -> None:
        rule = rules.by_id.get(rule_id)
        if rule is None:
            return
        findings.append(Finding(rule_id, span, render_explanation(rules, rule)))

    for idx, tok in enumerate(sig):
        prev = sig[idx - 1] if idx > 0 else None
        nxt = sig[idx + 1] if idx + 1 < len(sig) else None

        # dot-column-access: dotted identifier whose prefix names a frame.
        if tok.kind is TokenKind.IDENTIFIER and "." in tok.lexeme:
            prefix = tok.lexeme.split(".", 1)[0]
            if prefix in frames:
                fire("dot-column-access", tok.span)

        # na-vs-nan: NaN is not the missing-value marker in the target language.
        if tok.kind is TokenKind.IDENTIFIER and tok.lexeme == "NaN":
            fire("na-vs-nan", tok.span)

        # na-comparison: ==/!= against NA never yields TRUE.
        if tok.kind is TokenKind.OPERATOR and tok.lexeme in ("==", "!="):
            neighbours = [t for t in (prev, nxt) if t is not None]
            if any(t.kind is TokenKind.KEYWORD and t.lexeme == "NA" for t in neighbours):
                start = prev.span.start if prev is not None else tok.span.start
                end = nxt.span.end if nxt is not None else tok.span.end
                fire("na-comparison", Span(start, end))

        if tok.kind is TokenKind.NUMBER_LITERAL and tok.lexeme == "0":
            inside = _depth_at(sig, idx) > 0 or (
                prev is not None and prev.lexeme in ("[", "[[")
            )
            # zero-index: literal 0 immediately inside a subscript.
            if prev is not None and inside and (
                prev.lexeme in ("[", "[[")
                or (prev.lexeme == "," and prev.kind is TokenKind.DELIMITER)
            ):
                fire("zero-index", tok.span)
            # inclusive-range: a range that starts at 0 inside a subscript.
            if inside and nxt is not None and nxt.kind is TokenKind.OPERATOR and nxt.lexeme == ":":
                after = sig[idx + 2] if idx + 2 < len(sig) else None
                end = after.span.end if after is not None and after.kind is TokenKind.NUMBER_LITERAL else nxt.span.end
                fire("inclusive-range", Span(tok.span.start, end))

    for group in _bracket_groups(sig):
        open_tok, close_tok = sig[group.open_idx], sig[group.close_idx]
        span = Span(open_tok.span.start, close_tok.span.end)
        # double-bracket: a multi-selection inside [[ ]] takes one column at most.
        if group.opener == "[[" and group.top_commas:
            fire("double-bracket", span)
        # bracket-subset-rows: a comparison with no comma selects columns, not rows.
        if (
            group.opener == "["
            and group.top_comparisons
            and not group.top_commas
            and group.before is not None
            and group.before.kind is TokenKind.IDENTIFIER
            and group.before.lexeme in frames
        ):
            fire("bracket-subset-rows", span)

    findings.sort(key=lambda f: (f.span.start, f.span.end, f.rule_id))
    return findings

"""Lossless tokenizers for the two snippet languages.

Only two language tags are supported: ``python`` and ``r``. The tokenizers
exist to validate highlight spans and drive rendering, not to parse: every
character of the input lands in exactly one token, so joining the lexemes
reproduces the source byte for byte.

The one asymmetry that matters for the curriculum: in r-mode a dot is an
ordinary identifier character (``read.csv`` is a single Identifier), while in
python-mode the dot is a Delimiter between Identifiers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import UnsupportedLanguage, UnterminatedString

PYTHON = "python"
R = "r"
SUPPORTED_LANGUAGES = (PYTHON, R)

#: Display names used when rendering explanation templates.
LANGUAGE_NAMES = {PYTHON: "Python", R: "R"}


class TokenKind(str, Enum):
    IDENTIFIER = "identifier"
    OPERATOR = "operator"
    DELIMITER = "delimiter"
    NUMBER_LITERAL = "number"
    STRING_LITERAL = "string"
    KEYWORD = "keyword"
    WHITESPACE = "whitespace"
    COMMENT = "comment"


@dataclass(frozen=True)
class Span:
    """Half-open character range ``[start, end)`` into a source string."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"degenerate span [{self.start}, {self.end})")

    def as_pair(self) -> list[int]:
        return [self.start, self.end]


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span


@dataclass(frozen=True)
class TokenList:
    language: str
    tokens: tuple[Token, ...]

    def text(self) -> str:
        return "".join(t.lexeme for t in self.tokens)

    def significant(self) -> list[Token]:
        """Tokens that carry syntax (whitespace and comments dropped)."""
        skip = (TokenKind.WHITESPACE, TokenKind.COMMENT)
        return [t for t in self.tokens if t.kind not in skip]


_NUMBER_RE = re.compile(r"(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_WS_RE = re.compile(r"[ \t\r\n]+")

_PY_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_R_IDENT_RE = re.compile(r"[A-Za-z.][A-Za-z0-9._]*")

_PY_KEYWORDS = frozenset({"True", "False", "None"})
_R_KEYWORDS = frozenset({"TRUE", "FALSE", "NA"})

# Multi-character tokens, longest first so the scanner can take the first hit.
_PY_MULTI = (
    ("**", TokenKind.OPERATOR),
    ("//", TokenKind.OPERATOR),
    ("==", TokenKind.OPERATOR),
    ("!=", TokenKind.OPERATOR),
    ("<=", TokenKind.OPERATOR),
    (">=", TokenKind.OPERATOR),
    (":=", TokenKind.OPERATOR),
    ("->", TokenKind.OPERATOR),
)
_R_MULTI = (
    ("<<-", TokenKind.OPERATOR),
    ("->>", TokenKind.OPERATOR),
    ("<-", TokenKind.OPERATOR),
    ("->", TokenKind.OPERATOR),
    ("==", TokenKind.OPERATOR),
    ("!=", TokenKind.OPERATOR),
    ("<=", TokenKind.OPERATOR),
    (">=", TokenKind.OPERATOR),
    ("&&", TokenKind.OPERATOR),
    ("||", TokenKind.OPERATOR),
    ("::", TokenKind.OPERATOR),
    ("[[", TokenKind.DELIMITER),
    ("]]", TokenKind.DELIMITER),
)

_PY_SINGLE = {
    **{c: TokenKind.OPERATOR for c in "=<>+-*/%!&|^~@"},
    **{c: TokenKind.DELIMITER for c in "()[]{}.,:;"},
}
_R_SINGLE = {
    **{c: TokenKind.OPERATOR for c in "=<>+-*/%!&|^~?@$:"},
    **{c: TokenKind.DELIMITER for c in "()[]{},;"},
}


@dataclass(frozen=True)
class _Profile:
    ident_re: re.Pattern[str]
    keywords: frozenset[str]
    multi: tuple[tuple[str, TokenKind], ...]
    single: dict[str, TokenKind]


_PROFILES = {
    PYTHON: _Profile(_PY_IDENT_RE, _PY_KEYWORDS, _PY_MULTI, _PY_SINGLE),
    R: _Profile(_R_IDENT_RE, _R_KEYWORDS, _R_MULTI, _R_SINGLE),
}


def _scan_string(source: str, start: int) -> int:
    """Return the end offset (exclusive) of the string literal at ``start``.

    Only ``\\'`` and ``\\"`` act as escapes; strings do not span lines.
    """
    quote = source[start]
    i = start + 1
    while i < len(source):
        ch = source[i]
        if ch == "\\" and i + 1 < len(source) and source[i + 1] in "'\"":
            i += 2
            continue
        if ch == quote:
            return i + 1
        if ch == "\n":
            break
        i += 1
    raise UnterminatedString(f"string starting at offset {start} never closes", start)


def tokenize(language: str, source: str) -> TokenList:
    """Tokenize ``source`` losslessly under the given language tag."""
    if language not in _PROFILES:
        raise UnsupportedLanguage(f"unsupported language tag: {language!r}")
    profile = _PROFILES[language]

    tokens: list[Token] = []
    i = 0
    n = len(source)

    def emit(kind: TokenKind, end: int) -> None:
        nonlocal i
        tokens.append(Token(kind, source[i:end], Span(i, end)))
        i = end

    while i < n:
        ch = source[i]

        m = _WS_RE.match(source, i)
        if m:
            emit(TokenKind.WHITESPACE, m.end())
            continue

        if ch == "#":
            end = source.find("\n", i)
            emit(TokenKind.COMMENT, n if end == -1 else end)
            continue

        if ch in "'\"":
            emit(TokenKind.STRING_LITERAL, _scan_string(source, i))
            continue

        m = _NUMBER_RE.match(source, i)
        if m and (ch.isdigit() or (ch == "." and m.end() > i + 1)):
            emit(TokenKind.NUMBER_LITERAL, m.end())
            continue

        for text, kind in profile.multi:
            if source.startswith(text, i):
                emit(kind, i + len(text))
                break
        else:
            m = profile.ident_re.match(source, i)
            if m:
                word = m.group()
                kind = TokenKind.KEYWORD if word in profile.keywords else TokenKind.IDENTIFIER
                emit(kind, m.end())
                continue
            # Single-character punctuation; anything unrecognized still
            # becomes a one-character Operator so tokenization stays total.
            emit(profile.single.get(ch, TokenKind.OPERATOR), i + 1)

    return TokenList(language, tuple(tokens))


def spans_on_token_boundaries(tokens: TokenList, spans: list[Span]) -> list[bool]:
    """For each span, whether both endpoints sit on token boundaries.

    The start must equal some token's start and the end some token's end; the
    two tokens may differ, which permits multi-token highlights.
    """
    starts = {t.span.start for t in tokens.tokens}
    ends = {t.span.end for t in tokens.tokens}
    return [s.start in starts and s.end in ends for s in spans]

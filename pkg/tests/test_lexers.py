from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosstutor.errors import UnsupportedLanguage, UnterminatedString
from crosstutor.lexers import (
    Span,
    TokenKind,
    spans_on_token_boundaries,
    tokenize,
)


def kinds_and_lexemes(token_list):
    return [(t.kind, t.lexeme) for t in token_list.tokens]


def test_r_stream_matches_hand_tokenization():
    tl = tokenize("r", "df <- read.csv('Questions.csv')")
    assert kinds_and_lexemes(tl) == [
        (TokenKind.IDENTIFIER, "df"),
        (TokenKind.WHITESPACE, " "),
        (TokenKind.OPERATOR, "<-"),
        (TokenKind.WHITESPACE, " "),
        (TokenKind.IDENTIFIER, "read.csv"),
        (TokenKind.DELIMITER, "("),
        (TokenKind.STRING_LITERAL, "'Questions.csv'"),
        (TokenKind.DELIMITER, ")"),
    ]


def test_python_stream_matches_hand_tokenization():
    tl = tokenize("python", "df[df.Score > 0][0:5]")
    significant = [(t.kind, t.lexeme) for t in tl.significant()]
    assert significant == [
        (TokenKind.IDENTIFIER, "df"),
        (TokenKind.DELIMITER, "["),
        (TokenKind.IDENTIFIER, "df"),
        (TokenKind.DELIMITER, "."),
        (TokenKind.IDENTIFIER, "Score"),
        (TokenKind.OPERATOR, ">"),
        (TokenKind.NUMBER_LITERAL, "0"),
        (TokenKind.DELIMITER, "]"),
        (TokenKind.DELIMITER, "["),
        (TokenKind.NUMBER_LITERAL, "0"),
        (TokenKind.DELIMITER, ":"),
        (TokenKind.NUMBER_LITERAL, "5"),
        (TokenKind.DELIMITER, "]"),
    ]


def test_empty_source_gives_empty_token_list():
    assert tokenize("r", "").tokens == ()


def test_unsupported_language_rejected():
    with pytest.raises(UnsupportedLanguage):
        tokenize("ruby", "x = 1")


def test_unterminated_string_carries_offset():
    with pytest.raises(UnterminatedString) as excinfo:
        tokenize("r", "x <- 'oops")
    assert excinfo.value.offset == 5


def test_dot_asymmetry_between_modes():
    # The mechanical basis for the dot-vs-$ lesson: one token in r-mode,
    # three in python-mode.
    r_tokens = tokenize("r", "x.y").tokens
    assert [t.lexeme for t in r_tokens] == ["x.y"]
    py_tokens = tokenize("python", "x.y").tokens
    assert [t.lexeme for t in py_tokens] == ["x", ".", "y"]
    assert py_tokens[1].kind is TokenKind.DELIMITER


def test_keywords_recognized_per_language():
    assert tokenize("r", "NA").tokens[0].kind is TokenKind.KEYWORD
    assert tokenize("r", "drop=FALSE").tokens[-1].kind is TokenKind.KEYWORD
    assert tokenize("python", "False").tokens[0].kind is TokenKind.KEYWORD
    # Keyword sets do not leak across modes.
    assert tokenize("python", "NA").tokens[0].kind is TokenKind.IDENTIFIER
    assert tokenize("r", "None").tokens[0].kind is TokenKind.IDENTIFIER


def test_double_bracket_is_single_delimiter_in_r():
    tl = tokenize("r", "df[[1]]")
    assert [(t.kind, t.lexeme) for t in tl.tokens] == [
        (TokenKind.IDENTIFIER, "df"),
        (TokenKind.DELIMITER, "[["),
        (TokenKind.NUMBER_LITERAL, "1"),
        (TokenKind.DELIMITER, "]]"),
    ]


def test_comment_runs_to_end_of_line():
    tl = tokenize("r", "x <- 1 # set x\ny")
    comment = [t for t in tl.tokens if t.kind is TokenKind.COMMENT]
    assert [c.lexeme for c in comment] == ["# set x"]
    assert tl.text() == "x <- 1 # set x\ny"


def test_span_boundary_checks():
    tl = tokenize("r", "df <- read.csv('Questions.csv')")
    spans = [
        Span(3, 5),    # exactly <-
        Span(6, 14),   # read.csv
        Span(7, 10),   # starts mid-identifier
        Span(0, 14),   # df through read.csv (multi-token)
    ]
    assert spans_on_token_boundaries(tl, spans) == [True, True, False, True]


def test_multi_token_span_over_dollar_access():
    tl = tokenize("r", "df$Score")
    assert spans_on_token_boundaries(tl, [Span(0, 8)]) == [True]


# --- round-trip property --------------------------------------------------

_R_ATOMS = st.one_of(
    st.from_regex(r"[A-Za-z][A-Za-z0-9._]{0,6}", fullmatch=True),
    st.from_regex(r"[0-9]{1,4}(\.[0-9]{1,3})?", fullmatch=True),
    st.sampled_from([
        "<-", "->", "<<-", "$", "[[", "]]", "[", "]", "(", ")", ",", ":",
        "==", "!=", "<=", ">=", "+", "-", "*", "/", "TRUE", "FALSE", "NA",
        " ", "  ", "\n", "\t", "# a comment", "'a string'", '"quoted"',
        "'it\\'s'", "{", "}", ";", "%", "&", "|",
    ]),
)

_PY_ATOMS = st.one_of(
    st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True),
    st.from_regex(r"[0-9]{1,4}(\.[0-9]{1,3})?", fullmatch=True),
    st.sampled_from([
        ".", "[", "]", "(", ")", ",", ":", "=", "==", "!=", "<=", ">=",
        "**", "//", "+", "-", "*", "/", "True", "False", "None",
        " ", "  ", "\n", "\t", "# note", "'a string'", '"quoted"',
        '"she said \\"hi\\""', "{", "}", ";", "@",
    ]),
)


@settings(max_examples=300, deadline=None)
@given(st.lists(_R_ATOMS, max_size=30))
def test_r_roundtrip_property(atoms):
    source = "".join(atoms)
    assert tokenize("r", source).text() == source


@settings(max_examples=300, deadline=None)
@given(st.lists(_PY_ATOMS, max_size=30))
def test_python_roundtrip_property(atoms):
    source = "".join(atoms)
    assert tokenize("python", source).text() == source


@settings(max_examples=200, deadline=None)
@given(st.lists(_R_ATOMS, max_size=20))
def test_r_token_spans_contiguous(atoms):
    source = "".join(atoms)
    tokens = tokenize("r", source).tokens
    position = 0
    for token in tokens:
        assert token.span.start == position
        position = token.span.end
    assert position == len(source)

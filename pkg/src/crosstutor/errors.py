"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` string; the HTTP layer maps codes to
status codes and the CLI maps them to exit codes.
"""
from __future__ import annotations

from typing import Any


class TutorError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"

    def __init__(self, message: str, *, detail: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}


class MissingFile(TutorError):
    code = "missing-file"


class MalformedDocument(TutorError):
    code = "malformed-document"


class UnknownField(MalformedDocument):
    code = "unknown-field"


class UnsupportedLanguage(TutorError):
    code = "unsupported-language"


class UnterminatedString(TutorError):
    code = "unterminated-string"

    def __init__(self, message: str, offset: int):
        super().__init__(message, detail={"offset": offset})
        self.offset = offset


class UnknownConstruct(TutorError):
    code = "unknown-construct"


class InvalidPack(TutorError):
    code = "invalid-pack"


class WrongPhase(TutorError):
    code = "wrong-phase"


class NoPrevious(TutorError):
    code = "no-previous"


class AlreadyAnswered(TutorError):
    code = "already-answered"


class BadSelection(TutorError):
    code = "bad-selection"


class LevelOutOfRange(TutorError):
    code = "level-out-of-range"


class MissingAnswer(TutorError):
    code = "missing-answer"


class LengthMismatch(TutorError):
    code = "length-mismatch"


class NotFound(TutorError):
    code = "not-found"


class SessionExists(TutorError):
    code = "session-exists"


class CorruptRecord(TutorError):
    code = "corrupt-record"

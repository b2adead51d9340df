"""File-backed session persistence: one JSON file per session.

Writes are atomic (write to a temp file in the same directory, fsync, then
rename over the target), so a crash can never leave a half-written record.
A corrupt file refuses to load but is left on disk untouched for inspection.

The store also hands out a per-session lock so concurrent callers can
serialize mutations to one session while distinct sessions proceed in
parallel.
"""
from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from pathlib import Path

from .engine import Session, serialize_session, session_from_record
from .errors import CorruptRecord, NotFound

# Session ids are path components; anything fancier is refused outright.
_SAFE_ID = re.compile(r"[A-Za-z0-9_-]{1,64}")


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._index: dict[str, Path] = {
            path.stem: path for path in sorted(self.root.glob("*.json"))
        }

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def path_for(self, session_id: str) -> Path:
        if not _SAFE_ID.fullmatch(session_id):
            raise NotFound(f"no session {session_id!r}")
        return self.root / f"{session_id}.json"

    def persist(self, session: Session) -> None:
        """Durably write the session record before returning."""
        payload = json.dumps(serialize_session(session), ensure_ascii=False, indent=1)
        target = self.path_for(session.id)
        fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        self._index[session.id] = target

    def restore(self, session_id: str) -> Session:
        path = self._index.get(session_id, self.path_for(session_id))
        if not path.is_file():
            raise NotFound(f"no session {session_id!r}")
        try:
            record = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptRecord(f"{path}: {exc.msg} at line {exc.lineno}") from exc
        return session_from_record(record)

    def contains(self, session_id: str) -> bool:
        return self._index.get(session_id, self.path_for(session_id)).is_file()

    def session_ids(self) -> list[str]:
        return sorted(self._index)

    def load_all(self, *, skip_corrupt: bool = False) -> list[Session]:
        sessions = []
        for session_id in self.session_ids():
            try:
                sessions.append(self.restore(session_id))
            except CorruptRecord:
                if not skip_corrupt:
                    raise
        return sessions

"""File-backed persistence for sessions: append-only event logs.

One JSONL file per session, each line {"seq": n, "event": {...}} with
seq strictly increasing from 1. Appends go through a per-session lock;
the sequence counter is primed from the file on first touch, so a
restarted process carries on where the log ends. Attachment bytes live
in a separate content-addressed blob directory.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from pathlib import Path


class UnknownSessionError(KeyError):
    pass


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._next_seq: dict[str, int] = {}

    def _path(self, session_id: str) -> Path:
        # ids are generated by create(), but a path traversal via a
        # crafted id must not reach outside the store directory
        if not session_id.isalnum():
            raise UnknownSessionError(session_id)
        return self.root / f"{session_id}.jsonl"

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def create(self) -> str:
        session_id = uuid.uuid4().hex[:12]
        self._path(session_id).touch()
        with self._registry_lock:
            self._next_seq[session_id] = 1
        return session_id

    def exists(self, session_id: str) -> bool:
        try:
            return self._path(session_id).exists()
        except UnknownSessionError:
            return False

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))

    def _prime(self, session_id: str) -> int:
        if session_id in self._next_seq:
            return self._next_seq[session_id]
        last = 0
        for record in self.events(session_id):
            last = record["seq"]
        self._next_seq[session_id] = last + 1
        return last + 1

    def append(self, session_id: str, event: dict) -> int:
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSessionError(session_id)
        with self.lock(session_id):
            seq = self._prime(session_id)
            line = json.dumps({"seq": seq, "event": event}, ensure_ascii=False, sort_keys=True)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
            self._next_seq[session_id] = seq + 1
            return seq

    def events(self, session_id: str, since: int = 0) -> list[dict]:
        """Records with seq > since, in order."""
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSessionError(session_id)
        out = []
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record["seq"] > since:
                    out.append(record)
        return out

    def last_seq(self, session_id: str) -> int:
        with self.lock(session_id):
            return self._prime(session_id) - 1


class BlobStore:
    """Content-addressed attachment bytes, keyed by sha256 hex digest."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self.root / digest
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        return digest

    def get(self, digest: str) -> bytes:
        if not all(c in "0123456789abcdef" for c in digest) or len(digest) != 64:
            raise KeyError(digest)
        path = self.root / digest
        if not path.exists():
            raise KeyError(digest)
        return path.read_bytes()

    def has(self, digest: str) -> bool:
        try:
            self.get(digest)
            return True
        except KeyError:
            return False

"""Durable document persistence for chat history and security logs.

The default backend is an embedded append-only file store: one UTF-8
JSON document per line per collection, fsynced on write, so records
survive process restarts and crashes between requests.  Multi-document
appends go out in a single write so a user turn and its bot turn land
together or not at all.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path


class DocumentStore:
    """Interface: a named-collection append/scan store."""

    def append(self, collection: str, doc: dict) -> None:
        self.append_many(collection, [doc])

    def append_many(self, collection: str, docs) -> None:
        raise NotImplementedError

    def scan(self, collection: str) -> list:
        raise NotImplementedError


class FileDocumentStore(DocumentStore):
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, collection: str) -> Path:
        if not collection.replace("_", "").isalnum():
            raise ValueError(f"bad collection name {collection!r}")
        return self.root / f"{collection}.jsonl"

    def append_many(self, collection: str, docs) -> None:
        docs = list(docs)
        if not docs:
            return
        payload = "".join(json.dumps(d, ensure_ascii=False) + "\n" for d in docs)
        data = payload.encode("utf-8")
        with self._lock:
            fd = os.open(self._path(collection), os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
            try:
                os.write(fd, data)
                os.fsync(fd)
            finally:
                os.close(fd)

    def scan(self, collection: str) -> list:
        path = self._path(collection)
        if not path.exists():
            return []
        docs = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    docs.append(json.loads(line))
        return docs


class MemoryDocumentStore(DocumentStore):
    """Volatile store for tests."""

    def __init__(self):
        self._collections = {}
        self._lock = threading.Lock()

    def append_many(self, collection: str, docs) -> None:
        with self._lock:
            self._collections.setdefault(collection, []).extend(dict(d) for d in docs)

    def scan(self, collection: str) -> list:
        with self._lock:
            return [dict(d) for d in self._collections.get(collection, [])]

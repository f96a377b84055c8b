"""Persistent JSON cache of oracle verdicts."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
ENV_VAR = "QMCSP_CACHE"


def object_digest(obj) -> str:
    """Stable digest of a problem input (table, unitary or state)."""
    h = hashlib.sha256()
    h.update(type(obj).__name__.encode())
    if hasattr(obj, "entries") and isinstance(getattr(obj, "entries"), np.ndarray):
        h.update(np.ascontiguousarray(obj.entries).tobytes())
    elif hasattr(obj, "amps"):
        h.update(np.ascontiguousarray(obj.amps).tobytes())
    elif hasattr(obj, "entries"):
        h.update(bytes(obj.entries))
    else:
        h.update(repr(obj).encode())
    return h.hexdigest()[:32]


def make_key(kind: str, gateset, obj, **params) -> str:
    payload = {
        "kind": kind,
        "gateset": gateset.name,
        "gateset_hash": gateset.fingerprint,
        "object": object_digest(obj),
        **{k: (repr(v) if isinstance(v, float) else v) for k, v in params.items()},
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


class OracleCache:
    """Versioned JSON file {"schema_version": 1, "entries": {key: verdict JSON}}."""

    def __init__(self, path: str | os.PathLike | None = None):
        path = path or os.environ.get(ENV_VAR)
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self.entries: dict[str, dict] = {}
        self.hits = 0
        if self.path and self.path.exists():
            data = json.loads(self.path.read_text())
            if data.get("schema_version") == SCHEMA_VERSION:
                self.entries = data.get("entries", {})

    def get(self, key: str):
        with self._lock:
            v = self.entries.get(key)
            if v is not None:
                self.hits += 1
            return v

    def put(self, key: str, value: dict):
        with self._lock:
            self.entries[key] = value

    def save(self):
        if self.path is None:
            return
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            tmp = self.path.with_suffix(".tmp")
            tmp.write_text(json.dumps({"schema_version": SCHEMA_VERSION, "entries": self.entries}, sort_keys=True))
            tmp.replace(self.path)

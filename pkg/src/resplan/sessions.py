"""Append-only session persistence: one directory per session, one JSON
document per submission. Durable and diffable; no database. The storage root
comes from the RESPLAN_SESSIONS environment variable unless given."""

from __future__ import annotations

import datetime as _dt
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

DEFAULT_ROOT_ENV = "RESPLAN_SESSIONS"

_ID_RE = re.compile(r"^s(\d{4,})$")


class UnknownSessionError(KeyError):
    pass


@dataclass(frozen=True)
class SessionMeta:
    id: str
    scenario: str
    created_at: str


class SessionStore:
    """Sessions are numbered sequentially (s0001, s0002, ...) so stores stay
    reproducible; submission documents are never rewritten."""

    def __init__(self, root: Optional[str] = None):
        root = root or os.environ.get(DEFAULT_ROOT_ENV) or "./sessions"
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def list(self) -> list[SessionMeta]:
        out = []
        for child in sorted(self.root.iterdir()):
            if child.is_dir() and _ID_RE.match(child.name):
                out.append(self.meta(child.name))
        return out

    def create(self, scenario: str) -> SessionMeta:
        existing = [int(m.group(1)) for child in self.root.iterdir()
                    if (m := _ID_RE.match(child.name))] if self.root.exists() else []
        next_id = f"s{(max(existing) + 1 if existing else 1):04d}"
        meta = SessionMeta(
            id=next_id, scenario=scenario,
            created_at=_dt.datetime.now(_dt.timezone.utc).isoformat())
        d = self._dir(next_id)
        d.mkdir()
        (d / "meta.json").write_text(json.dumps({
            "id": meta.id, "scenario": meta.scenario,
            "created_at": meta.created_at,
        }, indent=2), encoding="utf-8")
        return meta

    def meta(self, session_id: str) -> SessionMeta:
        path = self._dir(session_id) / "meta.json"
        if not path.exists():
            raise UnknownSessionError(session_id)
        data = json.loads(path.read_text(encoding="utf-8"))
        return SessionMeta(data["id"], data["scenario"], data["created_at"])

    def submissions(self, session_id: str) -> list[dict]:
        d = self._dir(session_id)
        if not d.exists():
            raise UnknownSessionError(session_id)
        docs = []
        for path in sorted(d.glob("[0-9][0-9][0-9][0-9].json")):
            docs.append(json.loads(path.read_text(encoding="utf-8")))
        return docs

    def append(self, session_id: str, document: dict) -> int:
        """Store the next submission document; returns its 1-based index."""
        d = self._dir(session_id)
        if not d.exists():
            raise UnknownSessionError(session_id)
        index = len(list(d.glob("[0-9][0-9][0-9][0-9].json"))) + 1
        doc = dict(document)
        doc["index"] = index
        doc["submitted_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        path = d / f"{index:04d}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True),
                        encoding="utf-8")
        return index

"""HTTP service for the operator console.

Endpoints (all responses carry the document format version):

* ``GET  /scenarios``                      - scenario summaries
* ``GET  /scenarios/{name}``               - geometry + baseline plan
* ``POST /sessions``                       - open a session for a scenario
* ``GET  /sessions/{id}``                  - full submission history
* ``GET  /sessions/{id}/status``           - busy flag for polling
* ``POST /sessions/{id}/constraints``      - replan with submitted constraints

Constraint errors return 422 with machine-readable line/column diagnostics;
a submission while the session is already replanning returns 409. Scenario
data is immutable and shared; each session serialises its replans.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import prefs as prefs_mod, service
from .planner import BudgetExceededError, UnsolvableError
from .sessions import SessionStore, UnknownSessionError

MAX_CONSTRAINT_BYTES = 64 * 1024


class SessionRequest(BaseModel):
    scenario: str


class ConstraintsRequest(BaseModel):
    constraints: str


def create_app(session_root: Optional[str] = None,
               frontend_dist: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="resplan", version=service.FORMAT_VERSION)
    svc = service.ScenarioService()
    store = SessionStore(session_root)
    replan_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()
    app.state.service = svc
    app.state.store = store
    app.state.replan_locks = replan_locks

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            return replan_locks.setdefault(session_id, threading.Lock())

    @app.exception_handler(UnknownSessionError)
    async def _unknown_session(_: Request, exc: UnknownSessionError):
        return JSONResponse(status_code=404, content={
            "format": service.FORMAT_VERSION,
            "error": {"message": f"unknown session {exc.args[0]!r}"},
        })

    @app.get("/scenarios")
    def list_scenarios():
        return {
            "format": service.FORMAT_VERSION,
            "scenarios": [service.scenario_summary(svc.get(n))
                          for n in svc.names()],
        }

    @app.get("/scenarios/{name}")
    def scenario_detail(name: str):
        try:
            s = svc.get(name)
        except KeyError:
            raise HTTPException(404, f"unknown scenario {name!r}")
        plan, returns = svc.baseline(name)
        return service.scenario_document(s, plan, returns)

    @app.post("/sessions", status_code=201)
    def open_session(body: SessionRequest):
        try:
            svc.get(body.scenario)
        except KeyError:
            raise HTTPException(404, f"unknown scenario {body.scenario!r}")
        meta = store.create(body.scenario)
        return {"format": service.FORMAT_VERSION, "id": meta.id,
                "scenario": meta.scenario, "created_at": meta.created_at}

    @app.get("/sessions/{session_id}")
    def session_history(session_id: str):
        meta = store.meta(session_id)
        return {
            "format": service.FORMAT_VERSION,
            "id": meta.id,
            "scenario": meta.scenario,
            "created_at": meta.created_at,
            "submissions": store.submissions(session_id),
        }

    @app.get("/sessions/{session_id}/status")
    def session_status(session_id: str):
        store.meta(session_id)
        busy = session_lock(session_id).locked()
        return {"format": service.FORMAT_VERSION, "id": session_id,
                "busy": busy}

    @app.post("/sessions/{session_id}/constraints")
    def submit_constraints(session_id: str, body: ConstraintsRequest):
        meta = store.meta(session_id)
        if len(body.constraints.encode("utf-8")) > MAX_CONSTRAINT_BYTES:
            return JSONResponse(status_code=422, content={
                "format": service.FORMAT_VERSION,
                "error": {"message": "constraint body exceeds 64 KiB"},
            })
        lock = session_lock(session_id)
        if not lock.acquire(blocking=False):
            return JSONResponse(status_code=409, content={
                "format": service.FORMAT_VERSION,
                "error": {"message": "a replan is already running for this "
                                     "session"},
            })
        try:
            sub = svc.submit(meta.scenario, body.constraints)
        except prefs_mod.ConstraintError as exc:
            return JSONResponse(status_code=422, content={
                "format": service.FORMAT_VERSION,
                "error": {"message": exc.message, "line": exc.line,
                          "column": exc.column},
            })
        except UnsolvableError as exc:
            return JSONResponse(status_code=422, content={
                "format": service.FORMAT_VERSION,
                "error": {"message": str(exc)},
            })
        except BudgetExceededError as exc:
            return JSONResponse(status_code=422, content={
                "format": service.FORMAT_VERSION,
                "error": {"message": str(exc)},
            })
        finally:
            lock.release()
        document = service.submission_document(sub)
        index = store.append(session_id, document)
        document["index"] = index
        return document

    dist = Path(frontend_dist) if frontend_dist else None
    if dist and dist.is_dir():
        app.mount("/", StaticFiles(directory=str(dist), html=True),
                  name="console")
    return app

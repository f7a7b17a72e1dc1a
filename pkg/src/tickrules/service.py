"""Session service and its HTTP binding.

Sessions wrap either a simulation engine (post tick data, read state and
timeline) or a consultation (poll the pending question, post answers).  The
service core is plain Python; the HTTP layer maps it onto the documented
endpoints with JSON bodies in the same value-literal format the trace files
use.  Per-session operations are serialized by a lock; state reads are pure.
"""
from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .consult import Consultation
from .engine import Engine, EngineConfig
from .krl import KrlSyntaxError, KrlValidationError, parse_kb
from .memory import TypeMismatchError, UndeclaredRefError
from .values import to_literal, value_from_literal


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


@dataclass
class Session:
    id: str
    mode: str  # "simulation" | "consultation"
    engine: Engine | None = None
    consultation: Consultation | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionService:
    """Transport-independent session registry and operations."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # --- lifecycle -------------------------------------------------------

    def create_session(self, body: dict) -> dict:
        if not isinstance(body, dict) or "krl" not in body:
            raise ServiceError(400, "body must carry a 'krl' field")
        mode = body.get("mode", "simulation")
        if mode not in ("simulation", "consultation"):
            raise ServiceError(400, f"unknown mode {mode!r}")
        try:
            kb = parse_kb(body["krl"])
        except (KrlSyntaxError, KrlValidationError) as exc:
            raise ServiceError(400, f"knowledge base rejected: {exc}") from exc
        try:
            config = EngineConfig.from_kb(kb, body.get("config"))
        except (TypeError, ValueError) as exc:
            raise ServiceError(400, f"bad config: {exc}") from exc
        session_id = secrets.token_hex(8)
        session = Session(session_id, mode)
        if mode == "simulation":
            session.engine = Engine(kb, config)
        else:
            goal = body.get("goal")
            if not goal:
                raise ServiceError(400, "consultation mode needs a 'goal'")
            try:
                session.consultation = Consultation(kb, goal, config)
            except KeyError as exc:
                raise ServiceError(400, str(exc)) from exc
        with self._registry_lock:
            self._sessions[session_id] = session
        return {"id": session_id, "mode": mode}

    def _get(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id!r}")
        return session

    def delete_session(self, session_id: str) -> dict:
        with self._registry_lock:
            if self._sessions.pop(session_id, None) is None:
                raise ServiceError(404, f"unknown session {session_id!r}")
        return {}

    # --- simulation ------------------------------------------------------

    def tick(self, session_id: str, body: dict) -> dict:
        session = self._get(session_id)
        if session.mode != "simulation":
            raise ServiceError(409, "tick data applies to simulation sessions")
        if not isinstance(body, dict):
            raise ServiceError(400, "body must be an object")
        external = []
        for ref, literal in (body.get("set") or {}).items():
            try:
                external.append((ref, value_from_literal(literal)))
            except ValueError as exc:
                raise ServiceError(400, f"{ref}: {exc}") from exc
        with session.lock:
            try:
                record = session.engine.run_cycle(external)
            except (UndeclaredRefError, TypeMismatchError) as exc:
                raise ServiceError(400, str(exc)) from exc
        return record.to_json_obj()

    def state(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.mode == "simulation":
                out = session.engine.state_snapshot()
                out["mode"] = "simulation"
                return out
            consult = session.consultation
            facts = []
            for ref in consult.wm.refs():
                fact = consult.wm.lookup(ref)
                facts.append(
                    {
                        "ref": ref,
                        "value": to_literal(fact.value.with_certainty(1.0)),
                        "cf": fact.value.certainty,
                        "tick": fact.asserted_at,
                        "provenance": str(fact.provenance),
                    }
                )
            return {
                "mode": "consultation",
                "tick": 0,
                "wm": facts,
                "conflict_set": [],
                "timeline": {"objects": {}, "anomalies": []},
                "goal": consult.goal,
                "done": consult.done,
                "result": self._result_obj(consult),
                "questions_asked": [q.ref for q in consult.question_log],
            }

    def timeline(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.mode == "simulation":
                return session.engine.interp.timeline()
            return {"objects": {}, "anomalies": []}

    # --- consultation ----------------------------------------------------

    @staticmethod
    def _result_obj(consult: Consultation) -> dict | None:
        if not consult.done:
            return None
        if consult.result is None:
            return {"determined": False}
        return {
            "determined": True,
            "value": to_literal(consult.result.with_certainty(1.0)),
            "cf": consult.result.certainty,
        }

    def question(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            consult = session.consultation
            if consult is None or consult.pending is None:
                return {"question": None, "done": consult.done if consult else False,
                        "result": self._result_obj(consult) if consult else None}
            q = consult.pending
            return {
                "question": {"id": q.id, "ref": q.ref, "domain": q.domain},
                "done": False,
                "result": None,
            }

    def answer(self, session_id: str, body: dict) -> dict:
        session = self._get(session_id)
        if session.mode != "consultation":
            raise ServiceError(409, "answers apply to consultation sessions")
        consult = session.consultation
        with session.lock:
            if consult.pending is None:
                raise ServiceError(409, "no pending question")
            if not isinstance(body, dict):
                raise ServiceError(400, "body must be an object")
            if body.get("unknown"):
                value = None
            elif "value" in body:
                try:
                    value = value_from_literal(body["value"])
                except ValueError as exc:
                    raise ServiceError(400, str(exc)) from exc
            else:
                raise ServiceError(400, "body needs 'value' or 'unknown'")
            try:
                consult.answer(value)
            except (TypeMismatchError, ValueError) as exc:
                raise ServiceError(400, str(exc)) from exc
            return {
                "accepted": True,
                "done": consult.done,
                "result": self._result_obj(consult),
            }


# ---------------------------------------------------------------------------
# HTTP binding
# ---------------------------------------------------------------------------

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def make_handler(service: SessionService, static_dir: str | None):
    static_root = Path(static_dir).resolve() if static_dir else None

    class Handler(BaseHTTPRequestHandler):
        server_version = "tickrules"

        def log_message(self, fmt, *args):  # silence request logging
            pass

        # -- plumbing ---------------------------------------------------

        def _send_json(self, status: int, obj: object):
            data = json.dumps(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                obj = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ServiceError(400, f"malformed JSON body: {exc}") from exc
            if not isinstance(obj, dict):
                raise ServiceError(400, "body must be a JSON object")
            return obj

        def _route(self, method: str):
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            try:
                if parts and parts[0] == "sessions":
                    return self._route_sessions(method, parts)
                if method == "GET" and static_root is not None:
                    return self._static(parts)
                raise ServiceError(404, "no such resource")
            except ServiceError as exc:
                self._send_json(exc.status, {"error": exc.message})

        def _route_sessions(self, method: str, parts: list[str]):
            if len(parts) == 1 and method == "POST":
                return self._send_json(201, service.create_session(self._body()))
            if len(parts) == 2 and method == "DELETE":
                return self._send_json(200, service.delete_session(parts[1]))
            if len(parts) == 3:
                sid, leaf = parts[1], parts[2]
                if method == "GET" and leaf == "state":
                    return self._send_json(200, service.state(sid))
                if method == "GET" and leaf == "question":
                    return self._send_json(200, service.question(sid))
                if method == "GET" and leaf == "timeline":
                    return self._send_json(200, service.timeline(sid))
                if method == "POST" and leaf == "tick":
                    return self._send_json(200, service.tick(sid, self._body()))
                if method == "POST" and leaf == "answer":
                    return self._send_json(200, service.answer(sid, self._body()))
            raise ServiceError(404, "no such resource")

        def _static(self, parts: list[str]):
            rel = "/".join(parts) or "index.html"
            target = (static_root / rel).resolve()
            if not str(target).startswith(str(static_root)) or not target.is_file():
                raise ServiceError(404, "no such file")
            data = target.read_bytes()
            self.send_response(200)
            self.send_header(
                "Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            )
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            self._route("GET")

        def do_POST(self):
            self._route("POST")

        def do_DELETE(self):
            self._route("DELETE")

    return Handler


def serve(port: int, static_dir: str | None = None) -> ThreadingHTTPServer:
    """Build the HTTP server (caller decides between serve_forever and a
    background thread)."""
    service = SessionService()
    server = ThreadingHTTPServer(("127.0.0.1", port), make_handler(service, static_dir))
    server.service = service  # type: ignore[attr-defined]
    return server

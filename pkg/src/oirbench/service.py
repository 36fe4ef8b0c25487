"""HTTP+JSON front end for an in-process backend.

Routes::

    PUT    /oir/v1/operational_intent_references/{id}        create
    GET    /oir/v1/operational_intent_references/{id}        read
    DELETE /oir/v1/operational_intent_references/{id}?ovn=   delete
    GET    /healthz
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .airspace import InvalidField
from .tx import NotFound, Outcome, VersionMismatch
from .wire import oir_to_wire, request_from_wire

log = logging.getLogger(__name__)

OIR_PREFIX = "/oir/v1/operational_intent_references/"

# create outcome -> status; Invalidated shares 409 and is flagged in the body
OUTCOME_STATUS = {
    Outcome.COMMITTED: 201,
    Outcome.REJECTED_CONFLICT: 409,
    Outcome.INVALIDATED: 409,
    Outcome.DROPPED: 429,
    Outcome.TIMED_OUT: 504,
}

# extra seconds the handler waits past the request deadline before giving up
DEADLINE_SLACK_S = 1.0


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    disable_nagle_algorithm = True  # headers and body go out in separate writes
    server: "_Server"

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, body: dict) -> None:
        data = json.dumps(body, sort_keys=True).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _oir_id(self, path: str) -> str | None:
        if not path.startswith(OIR_PREFIX):
            return None
        oir_id = path[len(OIR_PREFIX):]
        return oir_id if oir_id and "/" not in oir_id else None

    def _read_body(self):
        n = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(n) if n else b""
        try:
            return json.loads(raw or b"null")
        except ValueError:
            raise InvalidField("body", "malformed JSON") from None

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/healthz":
            return self._send(200, {"status": "ok", "backend": self.server.backend.name})
        oir_id = self._oir_id(url.path)
        if oir_id is None:
            return self._send(404, {"error": "not_found"})
        try:
            oir = self.server.backend.get_oir(oir_id)
        except NotFound:
            return self._send(404, {"error": "not_found", "id": oir_id})
        self._send(200, oir_to_wire(oir))

    def do_DELETE(self):
        url = urlsplit(self.path)
        oir_id = self._oir_id(url.path)
        if oir_id is None:
            return self._send(404, {"error": "not_found"})
        ovn = parse_qs(url.query).get("ovn", [""])[0]
        try:
            oir = self.server.backend.delete_oir(oir_id, ovn)
        except NotFound:
            return self._send(404, {"error": "not_found", "id": oir_id})
        except VersionMismatch:
            return self._send(409, {"error": "version_mismatch", "id": oir_id})
        self._send(200, oir_to_wire(oir))

    def do_PUT(self):
        url = urlsplit(self.path)
        oir_id = self._oir_id(url.path)
        if oir_id is None:
            return self._send(404, {"error": "not_found"})
        backend = self.server.backend
        try:
            req = request_from_wire(oir_id, self._read_body())
            h = backend.submit(req)
        except InvalidField as e:
            return self._send(400, {"error": "invalid_field", "field": e.field, "message": e.reason})
        wait_s = max(0.0, (h.deadline_at - backend.kernel.now) / 1e6) + DEADLINE_SLACK_S
        if not h.wait(wait_s):
            h.finish(Outcome.TIMED_OUT, h.deadline_at)
        status = OUTCOME_STATUS[h.outcome]
        if h.outcome is Outcome.COMMITTED:
            body = {"id": h.tx_id, "ovn": h.ovn, "version": h.version}
        elif h.outcome is Outcome.REJECTED_CONFLICT:
            body = {"error": "conflict", "conflicts": list(h.conflicts)}
        elif h.outcome is Outcome.INVALIDATED:
            body = {"error": "conflict", "conflicts": list(h.conflicts), "invalidated": True}
        elif h.outcome is Outcome.DROPPED:
            body = {"error": "queue_full"}
        else:
            body = {"error": "deadline_exceeded"}
        self._send(status, body)


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, backend):
        self.backend = backend
        super().__init__(address, _Handler)


class DssService:
    """Serve `backend` (whose kernel must be a started WallKernel)."""

    def __init__(self, backend, host: str = "127.0.0.1", port: int = 8080):
        self.backend = backend
        self._server = _Server((host, port), backend)  # OSError on bind failure
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def serve_forever(self) -> None:
        self._server.serve_forever(poll_interval=0.2)

    def start(self) -> "DssService":
        self._thread = threading.Thread(target=self.serve_forever, name="dss-service", daemon=True)
        self._thread.start()
        return self

    def close(self) -> None:
        self._server.server_close()

    def shutdown(self) -> None:
        self._server.shutdown()
        self.close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "DssService":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.shutdown()

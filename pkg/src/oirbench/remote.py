"""Client-side adapter that drives a DSS service over HTTP.

Latency is measured from just before the request is written to just after
the response body is read. Connection settings (pool size, keep-alive) are
plain constructor arguments and count as calibration variables.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor

import httpx

from .airspace import CreateOirRequest, validate_request
from .service import OIR_PREFIX
from .sim import SECOND, WallKernel
from .tx import BackendUnavailable, Outcome, TxHandle
from .wire import request_to_wire

log = logging.getLogger(__name__)

STATUS_OUTCOME = {
    201: Outcome.COMMITTED,
    409: Outcome.REJECTED_CONFLICT,
    429: Outcome.DROPPED,
    504: Outcome.TIMED_OUT,
}


def outcome_for(status: int, body=None) -> Outcome:
    """Map a create response to an outcome.

    A 409 whose body carries ``invalidated: true`` is a commit-time
    invalidation rather than an endorse-time conflict. Statuses outside the
    table count as Dropped, since the server refused the work.
    """
    outcome = STATUS_OUTCOME.get(status)
    if outcome is None:
        log.warning("unexpected status %d; counted as Dropped", status)
        return Outcome.DROPPED
    if outcome is Outcome.REJECTED_CONFLICT and isinstance(body, dict) and body.get("invalidated"):
        return Outcome.INVALIDATED
    return outcome


class RemoteBackend:
    name = "remote"

    def __init__(
        self,
        url: str,
        kernel: WallKernel | None = None,
        request_deadline: int = 30 * SECOND,
        pool_size: int = 64,
        keepalive: bool = True,
        cleanup: bool = True,
    ):
        self.url = url.rstrip("/")
        self.kernel = kernel if kernel is not None else WallKernel()
        self.request_deadline = request_deadline
        self.cleanup = cleanup
        limits = httpx.Limits(
            max_connections=pool_size,
            max_keepalive_connections=pool_size if keepalive else 0,
        )
        self._client = httpx.Client(base_url=self.url, limits=limits, timeout=request_deadline / SECOND)
        self._pool = ThreadPoolExecutor(max_workers=pool_size, thread_name_prefix="remote")
        self._created: list[tuple[str, str]] = []
        self._lock = threading.Lock()

    def health_check(self) -> None:
        try:
            r = self._client.get("/healthz", timeout=5.0)
        except httpx.HTTPError as e:
            raise BackendUnavailable(f"{self.url}: {e}") from e
        if r.status_code != 200:
            raise BackendUnavailable(f"{self.url}/healthz returned {r.status_code}")

    def submit(self, req: CreateOirRequest, at: int | None = None) -> TxHandle:
        if at is not None:
            raise ValueError("remote submissions happen now; `at` is not supported")
        validate_request(req)
        now = self.kernel.now
        h = TxHandle(req.id, now, now + self.request_deadline)
        self._pool.submit(self._send, h, request_to_wire(req))
        return h

    submit_create_oir = submit

    def _send(self, h: TxHandle, body: dict) -> None:
        try:
            r = self._client.put(OIR_PREFIX + h.tx_id, json=body)
            done = self.kernel.now
            payload = r.json() if r.content else None
        except httpx.TimeoutException:
            h.finish(Outcome.TIMED_OUT, h.deadline_at)
            return
        except (httpx.HTTPError, ValueError) as e:
            # no response at all: the client would have waited out the deadline
            log.debug("request %s failed: %s", h.tx_id, e)
            h.finish(Outcome.TIMED_OUT, h.deadline_at)
            return
        outcome = outcome_for(r.status_code, payload)
        if outcome is Outcome.COMMITTED and isinstance(payload, dict):
            h.ovn, h.version = payload.get("ovn"), payload.get("version")
            with self._lock:
                self._created.append((h.tx_id, h.ovn))
        elif isinstance(payload, dict):
            h.conflicts = list(payload.get("conflicts", []))
        h.finish(outcome, done)

    def close(self) -> None:
        """Wait for in-flight requests, delete what this adapter created, release sockets."""
        self._pool.shutdown(wait=True)
        if self.cleanup:
            for oir_id, ovn in self._created:
                try:
                    self._client.delete(OIR_PREFIX + oir_id, params={"ovn": ovn})
                except httpx.HTTPError:
                    break
        self._created.clear()
        self._client.close()

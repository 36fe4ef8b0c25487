"""Federated DSS model: one service center with C slots in front of a registry.

The whole DSS stack (application, load balancer, store cluster) is a single
queueing station. A request pays an inbound network delay, waits for a
slot (at most ``queue_capacity`` may wait), holds the slot for one
``service_time`` draw, and pays an outbound network delay. Validation and
the check-and-insert happen atomically at the end of service.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace

from .airspace import (
    CreateOirRequest,
    OirIndex,
    OperationalIntentReference,
    Volume4D,
    check_conflicts,
    validate_request,
)
from .sim import MS, SECOND, BoundedQueue, DelayDistribution, Kernel, stream
from .tx import NotFound, Outcome, TxHandle, VersionMismatch


@dataclass(frozen=True)
class FederatedConfig:
    network_delay: DelayDistribution = DelayDistribution.constant(10 * MS)
    service_time: DelayDistribution = DelayDistribution.constant(80 * MS)
    concurrency_limit: int = 4
    queue_capacity: int = 1024
    request_deadline: int = 30 * SECOND

    def __post_init__(self):
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be >= 1")
        if self.queue_capacity < 0:
            raise ValueError("queue_capacity must be >= 0")
        if self.request_deadline <= 0:
            raise ValueError("request_deadline must be > 0")

    @property
    def capacity_tps(self) -> float:
        return self.concurrency_limit * SECOND / self.service_time.mean

    def without_delays(self) -> "FederatedConfig":
        zero = DelayDistribution.constant(0)
        return replace(self, network_delay=zero, service_time=zero)

    def to_dict(self) -> dict:
        return {
            "network_delay": self.network_delay.to_dict(),
            "service_time": self.service_time.to_dict(),
            "concurrency_limit": self.concurrency_limit,
            "queue_capacity": self.queue_capacity,
            "request_deadline_ms": self.request_deadline / MS,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FederatedConfig":
        base = cls()
        return cls(
            network_delay=DelayDistribution.from_dict(d["network_delay"]) if "network_delay" in d else base.network_delay,
            service_time=DelayDistribution.from_dict(d["service_time"]) if "service_time" in d else base.service_time,
            concurrency_limit=d.get("concurrency_limit", base.concurrency_limit),
            queue_capacity=d.get("queue_capacity", base.queue_capacity),
            request_deadline=round(d.get("request_deadline_ms", base.request_deadline / MS) * MS),
        )


class FederatedBackend:
    name = "federated"

    def __init__(self, config: FederatedConfig, kernel: Kernel | None = None, seed: int = 0):
        self.config = config
        self.kernel = kernel if kernel is not None else Kernel()
        self._rng_in = stream(seed, self.name, "network_in")
        self._rng_out = stream(seed, self.name, "network_out")
        self._rng_svc = stream(seed, self.name, "service")
        self._registry = OirIndex()
        self._lock = threading.RLock()
        self._queue = BoundedQueue(config.queue_capacity) if config.queue_capacity > 0 else None
        self.busy = 0
        self.peak_queue = 0
        self.commit_log: list[str] = []
        self.attempt_log: list[str] = []

    # -- write path -----------------------------------------------------

    def submit_create_oir(self, req: CreateOirRequest, at: int | None = None) -> TxHandle:
        """Start a create; raises InvalidField for malformed requests."""
        validate_request(req)
        k = self.kernel
        at = k.now if at is None else at
        h = TxHandle(req.id, at, at + self.config.request_deadline)
        k.schedule(at + self.config.network_delay.sample(self._rng_in), self._arrive, h, req)
        return h

    submit = submit_create_oir

    def _respond(self, h: TxHandle, outcome: Outcome) -> None:
        out = self.config.network_delay.sample(self._rng_out)
        self.kernel.call_later(out, h.finish, outcome, self.kernel.now + out)

    def _arrive(self, h: TxHandle, req: CreateOirRequest) -> None:
        if self.busy < self.config.concurrency_limit:
            self._start(h, req)
        elif self._queue is not None and self._queue.offer((h, req)):
            self.peak_queue = max(self.peak_queue, len(self._queue))
        else:
            self._respond(h, Outcome.DROPPED)

    def _start(self, h: TxHandle, req: CreateOirRequest) -> bool:
        """Occupy a slot for `h`; False if the client already gave up."""
        k = self.kernel
        if k.now >= h.deadline_at:
            h.finish(Outcome.TIMED_OUT, h.deadline_at)
            return False
        self.busy += 1
        svc = self.config.service_time.sample(self._rng_svc)
        out = self.config.network_delay.sample(self._rng_out)
        end = k.now + svc
        if end + out > h.deadline_at:
            # slot abandons the work at the deadline; nothing is written
            k.schedule(min(end, h.deadline_at), self._abandon, h)
        else:
            k.schedule(end, self._finish, h, req, out)
        return True

    def _abandon(self, h: TxHandle) -> None:
        h.finish(Outcome.TIMED_OUT, h.deadline_at)
        self._release()

    def _finish(self, h: TxHandle, req: CreateOirRequest, out: int) -> None:
        with self._lock:
            self.attempt_log.append(req.id)
            conflicts = self._registry.conflicts(req.volume)
            if req.id in self._registry and req.id not in conflicts:
                conflicts = sorted(conflicts + [req.id])
            if conflicts:
                outcome = Outcome.REJECTED_CONFLICT
                h.conflicts = conflicts
            else:
                oir = OperationalIntentReference.from_request(req)
                self._registry.insert(oir)
                self.commit_log.append(oir.id)
                h.ovn, h.version = oir.ovn, oir.version
                outcome = Outcome.COMMITTED
        k = self.kernel
        k.call_later(out, h.finish, outcome, k.now + out)
        self._release()

    def _release(self) -> None:
        self.busy -= 1
        if self._queue is None:
            return
        while self.busy < self.config.concurrency_limit:
            nxt = self._queue.poll()
            if nxt is None or self._start(*nxt):
                return

    # -- read / admin path (no delay modeling) ----------------------------

    def get_oir(self, oir_id: str) -> OperationalIntentReference:
        with self._lock:
            oir = self._registry.get(oir_id)
        if oir is None:
            raise NotFound(oir_id)
        return oir

    def delete_oir(self, oir_id: str, ovn: str) -> OperationalIntentReference:
        with self._lock:
            oir = self._registry.get(oir_id)
            if oir is None:
                raise NotFound(oir_id)
            if oir.ovn != ovn:
                raise VersionMismatch(oir_id)
            return self._registry.remove(oir_id)

    def query_oirs(self, area: Volume4D) -> list[OperationalIntentReference]:
        with self._lock:
            ids = self._registry.conflicts(area)
            return [self._registry.get(i) for i in ids]

    def live_oirs(self) -> list[OperationalIntentReference]:
        with self._lock:
            return [self._registry.get(i) for i in self._registry.ids()]

    @staticmethod
    def replay(requests: list[CreateOirRequest]) -> list[str]:
        """Sequential reference registry: ids a one-at-a-time DSS would accept."""
        live: list[OperationalIntentReference] = []
        accepted = []
        for r in requests:
            if not check_conflicts(r.volume, live) and all(o.id != r.id for o in live):
                live.append(OperationalIntentReference.from_request(r))
                accepted.append(r.id)
        return accepted

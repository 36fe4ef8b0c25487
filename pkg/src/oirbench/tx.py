"""Transaction outcomes, in-flight handles and finished records."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable


class Outcome(str, Enum):
    COMMITTED = "Committed"
    REJECTED_CONFLICT = "RejectedConflict"
    INVALIDATED = "Invalidated"
    DROPPED = "Dropped"
    TIMED_OUT = "TimedOut"


class NotFound(KeyError):
    pass


class VersionMismatch(ValueError):
    pass


class BackendUnavailable(RuntimeError):
    pass


@dataclass
class TxHandle:
    """A submitted transaction; `outcome` stays None until it completes."""

    tx_id: str
    submit_at: int
    deadline_at: int
    outcome: Outcome | None = None
    complete_at: int | None = None
    conflicts: list[str] = field(default_factory=list)
    ovn: str | None = None
    version: int | None = None
    worker_id: int = 0
    _done: threading.Event = field(default_factory=threading.Event, repr=False, compare=False)
    _callbacks: list[Callable[["TxHandle"], None]] = field(default_factory=list, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def done(self) -> bool:
        return self.outcome is not None

    @property
    def latency(self) -> int | None:
        if self.complete_at is None:
            return None
        return self.complete_at - self.submit_at

    def finish(self, outcome: Outcome, at: int) -> None:
        """Record the outcome; completions past the deadline become TimedOut."""
        with self._lock:
            if self.outcome is not None:
                return
            if at > self.deadline_at:
                outcome, at = Outcome.TIMED_OUT, self.deadline_at
            self.complete_at = at
            self.outcome = outcome
            callbacks, self._callbacks = self._callbacks, []
        self._done.set()
        for cb in callbacks:
            cb(self)

    def add_done_callback(self, cb: Callable[["TxHandle"], None]) -> None:
        with self._lock:
            if self.outcome is None:
                self._callbacks.append(cb)
                return
        cb(self)

    def wait(self, timeout: float | None = None) -> bool:
        return self._done.wait(timeout)

    def record(self) -> "TxRecord":
        if self.outcome is None:
            raise RuntimeError(f"transaction {self.tx_id} has not completed")
        return TxRecord(self.tx_id, self.worker_id, self.submit_at, self.complete_at, self.outcome)


@dataclass(frozen=True)
class TxRecord:
    tx_id: str
    worker_id: int
    submit_at: int
    complete_at: int
    outcome: Outcome

    @property
    def latency(self) -> int:
        return self.complete_at - self.submit_at

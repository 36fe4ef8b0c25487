"""Discrete-event kernel, seeded delay distributions and bounded queues.

All times are integer microseconds. Two kernels share one interface:
:class:`Kernel` runs in virtual time and is what every deterministic test
uses; :class:`WallKernel` dispatches the same callbacks against the
monotonic clock from a background thread, for live runs.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable

US = 1
MS = 1_000
SECOND = 1_000_000


class SchedulingInPast(ValueError):
    pass


def stream(seed: int, *labels: str) -> random.Random:
    """Independent random stream derived from `seed` and stable labels."""
    h = hashlib.sha256(repr((int(seed),) + tuple(str(x) for x in labels)).encode())
    return random.Random(int.from_bytes(h.digest()[:8], "big"))


def derive_seed(seed: int, *labels) -> int:
    """A 63-bit child seed, stable across processes and platforms."""
    return stream(seed, "derive", *labels).getrandbits(63)


@dataclass(frozen=True)
class DelayDistribution:
    """A delay law in microseconds.

    Build with the classmethods; ``sigma`` for LogNormal is dimensionless.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0

    KINDS = ("constant", "uniform", "exponential", "lognormal")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("distribution parameters must be finite")
        if self.kind == "constant" and self.a < 0:
            raise ValueError("constant delay must be >= 0")
        if self.kind == "uniform" and not 0 <= self.a <= self.b:
            raise ValueError("uniform needs 0 <= lo <= hi")
        if self.kind == "exponential" and self.a <= 0:
            raise ValueError("exponential mean must be > 0")
        if self.kind == "lognormal" and (self.a <= 0 or self.b < 0):
            raise ValueError("lognormal needs median > 0 and sigma >= 0")

    @classmethod
    def constant(cls, d: float) -> "DelayDistribution":
        return cls("constant", d)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "DelayDistribution":
        return cls("uniform", lo, hi)

    @classmethod
    def exponential(cls, mean: float) -> "DelayDistribution":
        return cls("exponential", mean)

    @classmethod
    def lognormal(cls, median: float, sigma: float) -> "DelayDistribution":
        return cls("lognormal", median, sigma)

    def sample(self, rng: random.Random) -> int:
        if self.kind == "constant":
            return round(self.a)
        if self.kind == "uniform":
            return round(rng.uniform(self.a, self.b))
        if self.kind == "exponential":
            return round(rng.expovariate(1.0 / self.a))
        return round(rng.lognormvariate(math.log(self.a), self.b))

    @property
    def min_value(self) -> int:
        """Infimum of the support (after rounding)."""
        if self.kind in ("constant", "uniform"):
            return round(self.a)
        return 0

    @property
    def mean(self) -> float:
        if self.kind == "constant":
            return self.a
        if self.kind == "uniform":
            return (self.a + self.b) / 2
        if self.kind == "exponential":
            return self.a
        return self.a * math.exp(self.b**2 / 2)

    # Config form uses milliseconds.
    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "ms": self.a / MS}
        if self.kind == "uniform":
            return {"kind": "uniform", "lo_ms": self.a / MS, "hi_ms": self.b / MS}
        if self.kind == "exponential":
            return {"kind": "exponential", "mean_ms": self.a / MS}
        return {"kind": "lognormal", "median_ms": self.a / MS, "sigma": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "DelayDistribution":
        kind = d["kind"]
        if kind == "constant":
            return cls.constant(d["ms"] * MS)
        if kind == "uniform":
            return cls.uniform(d["lo_ms"] * MS, d["hi_ms"] * MS)
        if kind == "exponential":
            return cls.exponential(d["mean_ms"] * MS)
        if kind == "lognormal":
            return cls.lognormal(d["median_ms"] * MS, d["sigma"])
        raise ValueError(f"unknown distribution kind {kind!r}")


def sample(dist: DelayDistribution, rng: random.Random) -> int:
    return dist.sample(rng)


class Kernel:
    """Virtual-time event loop keyed by (due, seq).

    Single-threaded by contract. With ``trace=True`` a running digest of
    every dispatched (due, seq, callback-name) is kept in :attr:`trace_digest`.
    """

    virtual = True

    def __init__(self, trace: bool = False):
        self._now = 0
        self._seq = 0
        self._heap: list[tuple[int, int, Callable, tuple]] = []
        self._trace = hashlib.sha256() if trace else None
        self.dispatched = 0

    @property
    def now(self) -> int:
        return self._now

    @property
    def trace_digest(self) -> str | None:
        return self._trace.hexdigest() if self._trace is not None else None

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, at: int, fn: Callable, *args: Any) -> int:
        at = int(at)
        if at < self._now:
            raise SchedulingInPast(f"t={at} < now={self._now}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (at, seq, fn, args))
        return seq

    def call_later(self, delay: int, fn: Callable, *args: Any) -> int:
        return self.schedule(self._now + delay, fn, *args)

    def _dispatch_one(self) -> None:
        at, seq, fn, args = heapq.heappop(self._heap)
        self._now = at
        if self._trace is not None:
            self._trace.update(f"{at}:{seq}:{getattr(fn, '__qualname__', fn)};".encode())
        self.dispatched += 1
        fn(*args)

    def run_until(self, t: int) -> None:
        """Dispatch everything due at or before `t`, then park the clock at `t`."""
        if t < self._now:
            raise SchedulingInPast(f"t={t} < now={self._now}")
        heap = self._heap
        while heap and heap[0][0] <= t:
            self._dispatch_one()
        self._now = t

    def run(self) -> None:
        """Dispatch until the queue is empty."""
        heap = self._heap
        while heap:
            self._dispatch_one()


class WallKernel:
    """Real-time dispatcher with the :class:`Kernel` interface.

    `schedule` may be called from any thread. Callbacks all run on the one
    dispatcher thread, so backend state needs no extra locking. Instants
    already in the past are dispatched as soon as possible rather than
    rejected, since the clock moves between reading and scheduling.
    """

    virtual = False

    def __init__(self):
        self._t0 = time.monotonic_ns()
        self._seq = 0
        self._heap: list[tuple[int, int, Callable, tuple]] = []
        self._cv = threading.Condition()
        self._stopped = False
        self._thread: threading.Thread | None = None
        self.dispatched = 0

    @property
    def now(self) -> int:
        return (time.monotonic_ns() - self._t0) // 1000

    def schedule(self, at: int, fn: Callable, *args: Any) -> int:
        with self._cv:
            seq = self._seq
            self._seq += 1
            heapq.heappush(self._heap, (int(at), seq, fn, args))
            self._cv.notify()
        return seq

    def call_later(self, delay: int, fn: Callable, *args: Any) -> int:
        return self.schedule(self.now + delay, fn, *args)

    def start(self) -> "WallKernel":
        if self._thread is None:
            self._thread = threading.Thread(target=self._loop, name="wall-kernel", daemon=True)
            self._thread.start()
        return self

    def stop(self) -> None:
        with self._cv:
            self._stopped = True
            self._cv.notify()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "WallKernel":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _loop(self) -> None:
        while True:
            with self._cv:
                while not self._stopped:
                    if self._heap:
                        wait_us = self._heap[0][0] - self.now
                        if wait_us <= 0:
                            break
                        self._cv.wait(wait_us / 1e6)
                    else:
                        self._cv.wait()
                if self._stopped:
                    return
                _, _, fn, args = heapq.heappop(self._heap)
            self.dispatched += 1
            fn(*args)


class BoundedQueue:
    """FIFO with hard capacity; `offer` returns False instead of blocking."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: deque = deque()
        self._lock = threading.Lock()
        self.accepted = 0
        self.rejected = 0
        self.polled = 0

    def __len__(self) -> int:
        return len(self._items)

    def offer(self, item) -> bool:
        with self._lock:
            if len(self._items) >= self.capacity:
                self.rejected += 1
                return False
            self._items.append(item)
            self.accepted += 1
            return True

    def poll(self):
        """Remove and return the head, or None when empty."""
        with self._lock:
            if not self._items:
                return None
            self.polled += 1
            return self._items.popleft()

    def peek(self):
        with self._lock:
            return self._items[0] if self._items else None

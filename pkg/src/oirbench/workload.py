"""OIR workload generation, open-loop arrival schedules and round execution."""

from __future__ import annotations

import math
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field

from .airspace import CreateOirRequest, GeoPoint, Volume4D
from .sim import SECOND, stream
from .tx import Outcome, TxHandle, TxRecord


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class SpatialTemplate:
    """Footprint shared by every generated OIR.

    The defaults are arbitrary; no spatial parameters were published for
    the reference workload.
    """

    lat: float = -23.2237
    lon: float = -45.9009
    radius_m: float = 500.0
    alt_lo_m: float = 0.0
    alt_hi_m: float = 120.0


@dataclass(frozen=True)
class WorkloadSpec:
    n_tx: int
    rate_tps: float
    workers: int = 2
    window_duration_ms: int = 60_000
    gap_ms: int = 1_000
    t0_ms: int = 0
    spatial_template: SpatialTemplate = field(default_factory=SpatialTemplate)
    conflict_fraction: float = 0.0
    manager: str = "uss-bench"
    priority: int = 0
    seed: int = 0

    def validate(self) -> "WorkloadSpec":
        if not isinstance(self.n_tx, int) or self.n_tx < 1:
            raise InvalidSpec("n_tx must be an integer >= 1")
        if not (isinstance(self.rate_tps, (int, float)) and math.isfinite(self.rate_tps) and self.rate_tps > 0):
            raise InvalidSpec("rate_tps must be > 0")
        if self.workers < 1:
            raise InvalidSpec("workers must be >= 1")
        if self.window_duration_ms <= 0:
            raise InvalidSpec("window_duration_ms must be > 0")
        if self.gap_ms < 0:
            raise InvalidSpec("gap_ms must be >= 0")
        if not 0.0 <= self.conflict_fraction <= 1.0:
            raise InvalidSpec("conflict_fraction must lie in [0, 1]")
        t = self.spatial_template
        if not t.radius_m > 0 or not t.alt_lo_m < t.alt_hi_m:
            raise InvalidSpec("spatial_template needs radius_m > 0 and alt_lo_m < alt_hi_m")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "WorkloadSpec":
        d = dict(d)
        if "spatial_template" in d:
            d["spatial_template"] = SpatialTemplate(**d["spatial_template"])
        return cls(**d)


def generate_workload(spec: WorkloadSpec) -> list[CreateOirRequest]:
    """Requests with back-to-back windows ``[t0 + i(d+g), t0 + i(d+g) + d)``.

    With conflict_fraction f, floor(f * n) requests picked by seeded draw
    (never the first) reuse their predecessor's window instead.
    """
    spec.validate()
    t = spec.spatial_template
    try:
        center = GeoPoint(t.lat, t.lon)
    except ValueError as e:
        raise InvalidSpec(str(e)) from e
    n, d, step = spec.n_tx, spec.window_duration_ms, spec.window_duration_ms + spec.gap_ms
    rng = stream(spec.seed, "workload")
    ids = [str(uuid.UUID(int=rng.getrandbits(128), version=4)) for _ in range(n)]

    n_dup = math.floor(spec.conflict_fraction * n)
    if n_dup > n - 1:
        raise InvalidSpec(f"cannot force {n_dup} conflicts among {n} requests")
    dup = set(stream(spec.seed, "workload", "conflicts").sample(range(1, n), n_dup)) if n_dup else set()

    out = []
    start = spec.t0_ms
    for i in range(n):
        if i not in dup:
            start = spec.t0_ms + i * step
        vol = Volume4D(center, t.radius_m, t.alt_lo_m, t.alt_hi_m, start, start + d)
        out.append(CreateOirRequest(ids[i], spec.manager, vol, spec.priority))
    return out


def arrival_schedule(n: int, rate_tps: float, workers: int = 2) -> list[list[int]]:
    """Open-loop submit instants (microseconds) per worker.

    Request i is due at i / rate_tps seconds and belongs to worker i mod W,
    so worker w's j-th instant is request ``w + j * W``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    per_worker: list[list[int]] = [[] for _ in range(workers)]
    for i in range(n):
        per_worker[i % workers].append(round(i * SECOND / rate_tps))
    return per_worker


def _flatten(schedule: list[list[int]]) -> list[tuple[int, int, int]]:
    """(request index, worker, instant) triples in request order."""
    W = len(schedule)
    triples = [(w + j * W, w, t) for w, ts in enumerate(schedule) for j, t in enumerate(ts)]
    triples.sort()
    return triples


def run_round(backend, workload: list[CreateOirRequest], schedule: list[list[int]], kernel=None) -> list[TxRecord]:
    """Submit every request at its instant and collect one record each.

    `backend` needs ``submit(req, at=None) -> TxHandle`` and a ``kernel``.
    In virtual mode the kernel is drained; in wall mode one thread per
    worker sleeps until each instant, and the call returns once every
    handle has completed.
    """
    kernel = kernel if kernel is not None else backend.kernel
    triples = _flatten(schedule)
    if len(triples) != len(workload):
        raise ValueError("schedule and workload sizes differ")

    handles: list[TxHandle | None] = [None] * len(workload)
    if getattr(kernel, "virtual", True):
        for i, w, t in triples:
            h = backend.submit(workload[i], at=kernel.now + t)
            h.worker_id = w
            handles[i] = h
        kernel.run()
    else:
        _run_wall(backend, workload, schedule, kernel, handles)

    return [h.record() for h in handles]


def _run_wall(backend, workload, schedule, kernel, handles) -> None:
    W = len(schedule)
    start = kernel.now + 50_000
    errors: list[BaseException] = []

    def worker(w: int) -> None:
        try:
            for j, t in enumerate(schedule[w]):
                i = w + j * W
                lag = (start + t - kernel.now) / 1e6
                if lag > 0:
                    time.sleep(lag)
                h = backend.submit(workload[i])
                h.worker_id = w
                handles[i] = h
        except BaseException as e:  # surfaced after join
            errors.append(e)

    threads = [threading.Thread(target=worker, args=(w,), name=f"worker-{w}") for w in range(W)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        raise errors[0]
    for h in handles:
        if not h.wait(max(0.0, (h.deadline_at - kernel.now) / 1e6) + 5.0):
            h.finish(Outcome.TIMED_OUT, h.deadline_at)

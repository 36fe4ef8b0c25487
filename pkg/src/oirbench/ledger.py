"""Permissioned-ledger model: endorse, order into blocks, MVCC validate/commit.

Pipeline per transaction::

    client --net--> endorsers (max of E draws) --> ordering queue
        --> block cutter (size B or batch timeout) --> committer
        (commit_time + |txs| * per_tx_validate per block, one block at a
        time) --net--> client

Chaincode simulation runs when the proposal reaches the endorsers, against
the world state as of that instant, and records a read-write set. The
ordering queue holds a transaction from admission until its block starts
committing, so ``order_queue_capacity`` bounds the whole ordering backlog.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum

from .airspace import CreateOirRequest, OirIndex, OperationalIntentReference, Volume4D, validate_request
from .sim import MS, SECOND, BoundedQueue, DelayDistribution, Kernel, stream
from .tx import NotFound, Outcome, TxHandle, VersionMismatch

INDEX_KEY = "oir/_index"


OIR_KEY_PREFIX = "oir/"


def oir_key(oir_id: str) -> str:
    return OIR_KEY_PREFIX + oir_id


@dataclass(frozen=True)
class LedgerConfig:
    network_delay: DelayDistribution = DelayDistribution.constant(10 * MS)
    endorse_time: DelayDistribution = DelayDistribution.constant(50 * MS)
    num_endorsers: int = 2
    order_queue_capacity: int = 2048
    max_message_count: int = 10
    batch_timeout: int = 2 * SECOND
    commit_time: DelayDistribution = DelayDistribution.constant(100 * MS)
    per_tx_validate: DelayDistribution = DelayDistribution.constant(5 * MS)
    request_deadline: int = 30 * SECOND
    strict_phantom_check: bool = False

    def __post_init__(self):
        if self.num_endorsers < 1:
            raise ValueError("num_endorsers must be >= 1")
        if self.order_queue_capacity < 1:
            raise ValueError("order_queue_capacity must be >= 1")
        if self.max_message_count < 1:
            raise ValueError("max_message_count must be >= 1")
        if self.batch_timeout <= 0:
            raise ValueError("batch_timeout must be > 0")
        if self.request_deadline <= 0:
            raise ValueError("request_deadline must be > 0")

    def without_delays(self) -> "LedgerConfig":
        zero = DelayDistribution.constant(0)
        return replace(
            self,
            network_delay=zero,
            endorse_time=zero,
            commit_time=zero,
            per_tx_validate=zero,
            max_message_count=1,
        )

    def to_dict(self) -> dict:
        return {
            "network_delay": self.network_delay.to_dict(),
            "endorse_time": self.endorse_time.to_dict(),
            "num_endorsers": self.num_endorsers,
            "order_queue_capacity": self.order_queue_capacity,
            "max_message_count": self.max_message_count,
            "batch_timeout_ms": self.batch_timeout / MS,
            "commit_time": self.commit_time.to_dict(),
            "per_tx_validate": self.per_tx_validate.to_dict(),
            "request_deadline_ms": self.request_deadline / MS,
            "strict_phantom_check": self.strict_phantom_check,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LedgerConfig":
        base = cls()
        kw = {}
        for name in ("network_delay", "endorse_time", "commit_time", "per_tx_validate"):
            if name in d:
                kw[name] = DelayDistribution.from_dict(d[name])
        for name in ("num_endorsers", "order_queue_capacity", "max_message_count", "strict_phantom_check"):
            if name in d:
                kw[name] = d[name]
        if "batch_timeout_ms" in d:
            kw["batch_timeout"] = round(d["batch_timeout_ms"] * MS)
        if "request_deadline_ms" in d:
            kw["request_deadline"] = round(d["request_deadline_ms"] * MS)
        return replace(base, **kw)


class WorldState:
    """Versioned key-value state plus a derived spatio-temporal index.

    Absent keys have version 0. The index key's value is the frozenset of
    live OIR ids.
    """

    def __init__(self):
        self._kv: dict[str, tuple[object, int]] = {INDEX_KEY: (frozenset(), 0)}
        self.oirs = OirIndex()

    def version(self, key: str) -> int:
        entry = self._kv.get(key)
        return entry[1] if entry is not None else 0

    def get(self, key: str):
        entry = self._kv.get(key)
        return entry[0] if entry is not None else None

    def put(self, key: str, value) -> None:
        self._kv[key] = (value, self.version(key) + 1)
        if key == INDEX_KEY or not key.startswith(OIR_KEY_PREFIX):
            return
        oid = key[len(OIR_KEY_PREFIX):]
        if value is None:
            if oid in self.oirs:
                self.oirs.remove(oid)
        else:
            self.oirs.insert(value)

    def live_ids(self) -> frozenset:
        return self.get(INDEX_KEY)


@dataclass(frozen=True)
class ReadWriteSet:
    reads: tuple[tuple[str, int], ...]
    writes: tuple[tuple[str, object], ...]

    def __post_init__(self):
        for pairs in (self.reads, self.writes):
            keys = [k for k, _ in pairs]
            if len(keys) != len(set(keys)):
                raise ValueError("duplicate key in read or write set")


@dataclass
class EndorsedTx:
    tx_id: str
    rwset: ReadWriteSet
    handle: TxHandle | None = None


class CutReason(str, Enum):
    SIZE = "SizeCut"
    TIMEOUT = "TimeoutCut"


@dataclass(frozen=True)
class Block:
    seq: int
    txs: tuple[EndorsedTx, ...]
    cut_reason: CutReason


def simulate_create(req: CreateOirRequest, world: WorldState, strict_phantom_check: bool):
    """Chaincode run at endorsement.

    Returns ``(conflicting_ids, None)`` when the candidate overlaps a live
    OIR (or its id is taken), else ``([], rwset)``.
    """
    key = oir_key(req.id)
    taken = [req.id] if world.get(key) is not None else []
    conflicts = sorted(set(world.oirs.conflicts(req.volume)) | set(taken))
    if conflicts:
        return conflicts, None
    reads = [(key, world.version(key))]
    if strict_phantom_check:
        reads.append((INDEX_KEY, world.version(INDEX_KEY)))
    oir = OperationalIntentReference.from_request(req)
    writes = ((key, oir), (INDEX_KEY, frozenset({req.id})))
    return [], ReadWriteSet(tuple(reads), writes)


def cut_block(pending: deque, now: int, max_message_count: int, batch_timeout: int, seq: int) -> Block | None:
    """Cut the next block from `pending` (a deque of ``(arrived_at, tx)``).

    SizeCut takes exactly B transactions once B are pending; otherwise a
    TimeoutCut takes everything once the oldest has waited batch_timeout.
    Cut transactions are removed from `pending`.
    """
    if len(pending) >= max_message_count:
        txs = tuple(pending.popleft()[1] for _ in range(max_message_count))
        return Block(seq, txs, CutReason.SIZE)
    if pending and now - pending[0][0] >= batch_timeout:
        txs = tuple(tx for _, tx in pending)
        pending.clear()
        return Block(seq, txs, CutReason.TIMEOUT)
    return None


def validate_and_commit(block: Block, world: WorldState, skip: frozenset = frozenset()) -> list[Outcome]:
    """MVCC-validate `block` in order against `world`, applying valid writes.

    Transactions whose ids are in `skip` are reported TimedOut and neither
    validated nor applied. A write to the index key carries the ids being
    added and is applied as a set union, so unvalidated index reads never
    lose entries.
    """
    outcomes = []
    for tx in block.txs:
        if tx.tx_id in skip:
            outcomes.append(Outcome.TIMED_OUT)
            continue
        if any(world.version(k) != v for k, v in tx.rwset.reads):
            outcomes.append(Outcome.INVALIDATED)
            continue
        for k, value in tx.rwset.writes:
            if k == INDEX_KEY:
                value = world.live_ids() | value
            world.put(k, value)
        outcomes.append(Outcome.COMMITTED)
    return outcomes


class LedgerBackend:
    name = "ledger"

    def __init__(self, config: LedgerConfig, kernel: Kernel | None = None, seed: int = 0):
        self.config = config
        self.kernel = kernel if kernel is not None else Kernel()
        self._rng_in = stream(seed, self.name, "network_in")
        self._rng_out = stream(seed, self.name, "network_out")
        self._rng_endorse = stream(seed, self.name, "endorse")
        self._rng_commit = stream(seed, self.name, "commit")
        self._rng_validate = stream(seed, self.name, "per_tx_validate")
        self.world = WorldState()
        self._lock = threading.RLock()
        self._order_queue = BoundedQueue(config.order_queue_capacity)
        self._pending: deque = deque()
        self._blocks: deque[Block] = deque()
        self._committing = False
        self._next_seq = 1
        self.block_log: list[Block] = []
        self.peak_backlog = 0

    def submit_tx(self, req: CreateOirRequest, at: int | None = None) -> TxHandle:
        """Start a create; raises InvalidField for malformed requests."""
        validate_request(req)
        k = self.kernel
        at = k.now if at is None else at
        h = TxHandle(req.id, at, at + self.config.request_deadline)
        k.schedule(at + self.config.network_delay.sample(self._rng_in), self._endorse, h, req)
        return h

    submit = submit_tx

    def _respond(self, h: TxHandle, outcome: Outcome) -> None:
        out = self.config.network_delay.sample(self._rng_out)
        self.kernel.call_later(out, h.finish, outcome, self.kernel.now + out)

    def _endorse(self, h: TxHandle, req: CreateOirRequest) -> None:
        cfg = self.config
        with self._lock:
            conflicts, rwset = simulate_create(req, self.world, cfg.strict_phantom_check)
        latency = max(cfg.endorse_time.sample(self._rng_endorse) for _ in range(cfg.num_endorsers))
        self.kernel.call_later(latency, self._endorsed, h, conflicts, rwset)

    def _endorsed(self, h: TxHandle, conflicts: list[str], rwset: ReadWriteSet | None) -> None:
        if conflicts:
            h.conflicts = conflicts
            self._respond(h, Outcome.REJECTED_CONFLICT)
            return
        tx = EndorsedTx(h.tx_id, rwset, h)
        if not self._order_queue.offer(tx):
            self._respond(h, Outcome.DROPPED)
            return
        self.peak_backlog = max(self.peak_backlog, len(self._order_queue))
        k = self.kernel
        self._pending.append((k.now, tx))
        if not self._try_cut() and len(self._pending) == 1:
            k.call_later(self.config.batch_timeout, self._try_cut)

    def _try_cut(self) -> bool:
        cfg = self.config
        block = cut_block(self._pending, self.kernel.now, cfg.max_message_count, cfg.batch_timeout, self._next_seq)
        if block is None:
            return False
        self._next_seq += 1
        self._blocks.append(block)
        if not self._committing:
            self._start_commit()
        return True

    def _start_commit(self) -> None:
        cfg = self.config
        block = self._blocks.popleft()
        self._committing = True
        for _ in block.txs:
            self._order_queue.poll()
        duration = cfg.commit_time.sample(self._rng_commit)
        duration += sum(cfg.per_tx_validate.sample(self._rng_validate) for _ in block.txs)
        self.kernel.call_later(duration, self._end_commit, block)

    def _end_commit(self, block: Block) -> None:
        k = self.kernel
        outs = [self.config.network_delay.sample(self._rng_out) for _ in block.txs]
        late = frozenset(
            tx.tx_id for tx, out in zip(block.txs, outs) if k.now + out > tx.handle.deadline_at
        )
        with self._lock:
            outcomes = validate_and_commit(block, self.world, late)
        self.block_log.append(block)
        for tx, out, outcome in zip(block.txs, outs, outcomes):
            h = tx.handle
            if outcome is Outcome.TIMED_OUT:
                h.finish(outcome, h.deadline_at)
                continue
            if outcome is Outcome.COMMITTED:
                h.version, h.ovn = 1, dict(tx.rwset.writes)[oir_key(tx.tx_id)].ovn
            k.call_later(out, h.finish, outcome, k.now + out)
        self._committing = False
        if self._blocks:
            self._start_commit()

    # -- read / admin path (bypasses the pipeline) -------------------------

    def get_oir(self, oir_id: str) -> OperationalIntentReference:
        with self._lock:
            oir = self.world.get(oir_key(oir_id))
        if oir is None:
            raise NotFound(oir_id)
        return oir

    def delete_oir(self, oir_id: str, ovn: str) -> OperationalIntentReference:
        with self._lock:
            key = oir_key(oir_id)
            oir = self.world.get(key)
            if oir is None:
                raise NotFound(oir_id)
            if oir.ovn != ovn:
                raise VersionMismatch(oir_id)
            self.world.put(key, None)
            self.world.put(INDEX_KEY, self.world.live_ids() - {oir_id})
            return oir

    def query_oirs(self, area: Volume4D) -> list[OperationalIntentReference]:
        with self._lock:
            return [self.world.oirs.get(i) for i in self.world.oirs.conflicts(area)]

    def live_oirs(self) -> list[OperationalIntentReference]:
        with self._lock:
            return [self.world.oirs.get(i) for i in self.world.oirs.ids()]

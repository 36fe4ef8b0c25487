"""Round metrics, cross-round means and the CSV/JSON report formats."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

from .sim import MS, SECOND
from .tx import Outcome, TxRecord

CSV_FIELDS = [
    "backend", "rate_tps", "n_tx", "round", "sent", "committed", "rejected_conflict",
    "invalidated", "dropped", "timed_out", "throughput_tps", "p50_ms", "p90_ms",
    "mean_ms", "min_ms", "max_ms",
]


class EmptyInput(ValueError):
    pass


def percentile(latencies: Sequence, p: float):
    """Nearest-rank percentile of an ascending, nonempty sequence."""
    if not latencies:
        raise EmptyInput("percentile of an empty sample")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    # decimal reading of p, so 0.7 * 10 ranks 7 and not 8
    rank = math.ceil(Fraction(str(p)) * len(latencies))
    return latencies[rank - 1]


@dataclass(frozen=True)
class RoundMetrics:
    sent: int
    committed: int
    rejected_conflict: int
    invalidated: int
    dropped: int
    timed_out: int
    loss_rate: float
    throughput_tps: float
    p50_ms: float | None
    p90_ms: float | None
    mean_ms: float | None
    min_ms: float | None
    max_ms: float | None

    def to_dict(self) -> dict:
        return asdict(self)


METRIC_NAMES = [f.name for f in fields(RoundMetrics)]


def exact_mean(values: Iterable[float]) -> float:
    """Correctly rounded arithmetic mean."""
    vals = [Fraction(v) for v in values]
    return float(sum(vals) / len(vals))


def aggregate(records: Sequence[TxRecord]) -> RoundMetrics:
    """Metrics for one round. Latency statistics cover Committed only and
    are None when nothing committed."""
    if not records:
        raise EmptyInput("no records")
    counts = {o: 0 for o in Outcome}
    for r in records:
        counts[r.outcome] += 1
    sent = len(records)
    committed = counts[Outcome.COMMITTED]
    span = max(r.complete_at for r in records) - min(r.submit_at for r in records)
    throughput = committed * SECOND / span if span > 0 and committed else 0.0

    lat = sorted(r.latency for r in records if r.outcome is Outcome.COMMITTED)
    if lat:
        stats = dict(
            p50_ms=percentile(lat, 0.5) / MS,
            p90_ms=percentile(lat, 0.9) / MS,
            mean_ms=float(Fraction(sum(lat), len(lat) * MS)),
            min_ms=lat[0] / MS,
            max_ms=lat[-1] / MS,
        )
    else:
        stats = dict(p50_ms=None, p90_ms=None, mean_ms=None, min_ms=None, max_ms=None)
    return RoundMetrics(
        sent=sent,
        committed=committed,
        rejected_conflict=counts[Outcome.REJECTED_CONFLICT],
        invalidated=counts[Outcome.INVALIDATED],
        dropped=counts[Outcome.DROPPED],
        timed_out=counts[Outcome.TIMED_OUT],
        loss_rate=(sent - committed) / sent,
        throughput_tps=throughput,
        **stats,
    )


def mean_metrics(rounds: Sequence[RoundMetrics]) -> dict:
    """Per-field arithmetic mean; latency fields average the rounds that have them."""
    out = {}
    for name in METRIC_NAMES:
        vals = [getattr(r, name) for r in rounds if getattr(r, name) is not None]
        out[name] = exact_mean(vals) if vals else None
    return out


@dataclass
class ScenarioResult:
    backend: str
    rate_tps: float
    n_tx: int
    rounds: list[RoundMetrics]

    @property
    def mean(self) -> dict:
        return mean_metrics(self.rounds)

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "rate_tps": self.rate_tps,
            "n_tx": self.n_tx,
            "rounds": [r.to_dict() for r in self.rounds],
            "mean": self.mean,
        }


@dataclass
class BenchReport:
    config: dict
    seed: int
    mode: str
    scenarios: list[ScenarioResult]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "mode": self.mode,
            "scenarios": [s.to_dict() for s in self.scenarios],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for s in self.scenarios:
            for i, r in enumerate(s.rounds):
                row = {"backend": s.backend, "rate_tps": s.rate_tps, "n_tx": s.n_tx, "round": i}
                for name in CSV_FIELDS[4:]:
                    v = getattr(r, name)
                    row[name] = "" if v is None else v
                w.writerow(row)
        return buf.getvalue()


def summarize(backend: str, rate_tps: float, n_tx: int, rounds: list[RoundMetrics]) -> ScenarioResult:
    return ScenarioResult(backend, rate_tps, n_tx, list(rounds))

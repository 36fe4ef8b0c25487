import csv
import io
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oirbench.metrics import (
    CSV_FIELDS,
    BenchReport,
    EmptyInput,
    RoundMetrics,
    ScenarioResult,
    aggregate,
    exact_mean,
    mean_metrics,
    percentile,
)
from oirbench.sim import MS, SECOND
from oirbench.tx import Outcome, TxRecord
from oracles import nearest_rank


def rec(i, latency_ms, outcome=Outcome.COMMITTED, submit=0):
    return TxRecord(f"t{i}", i % 2, submit, submit + round(latency_ms * MS), outcome)


class TestPercentile:
    def test_p90_of_one_to_ten(self):
        assert percentile(list(range(1, 11)), 0.9) == 9

    def test_decimal_reading_of_p(self):
        assert percentile(list(range(1, 11)), 0.7) == 7

    @given(st.floats(0.001, 1.0))
    def test_single_element(self, p):
        assert percentile([42], p) == 42

    def test_empty(self):
        with pytest.raises(EmptyInput):
            percentile([], 0.5)

    @pytest.mark.parametrize("p", [0, 1.5])
    def test_bad_p(self, p):
        with pytest.raises(ValueError):
            percentile([1], p)

    @given(st.lists(st.integers(0, 10**7), min_size=1, max_size=300), st.sampled_from(["0.5", "0.9", "0.99", "0.25", "1"]))
    def test_matches_oracle(self, xs, p):
        assert percentile(sorted(xs), float(p)) == nearest_rank(xs, p)


class TestAggregate:
    def test_loss_rate_example(self):
        recs = [rec(i, 100, Outcome.COMMITTED if i < 2010 else Outcome.DROPPED, submit=i * SECOND // 40)
                for i in range(2400)]
        m = aggregate(recs)
        assert m.loss_rate == pytest.approx(0.1625, abs=1e-15)
        assert (m.sent, m.committed, m.dropped) == (2400, 2010, 390)

    def test_all_committed(self):
        m = aggregate([rec(i, 50 + i, submit=i * 1000) for i in range(10)])
        assert m.loss_rate == 0
        assert (m.p50_ms, m.p90_ms, m.min_ms, m.max_ms) == (54, 58, 50, 59)
        assert m.mean_ms == 54.5

    def test_nothing_committed(self):
        m = aggregate([rec(0, 10, Outcome.TIMED_OUT), rec(1, 10, Outcome.DROPPED)])
        assert m.loss_rate == 1 and m.throughput_tps == 0
        assert m.p50_ms is m.p90_ms is m.mean_ms is m.min_ms is m.max_ms is None

    def test_empty(self):
        with pytest.raises(EmptyInput):
            aggregate([])

    @given(st.lists(st.tuples(st.integers(0, 10**6), st.integers(0, 10**6), st.sampled_from(list(Outcome))), min_size=1))
    def test_outcome_partition_and_throughput(self, rows):
        recs = [TxRecord(f"t{i}", 0, s, s + d, o) for i, (s, d, o) in enumerate(rows)]
        m = aggregate(recs)
        assert m.committed + m.rejected_conflict + m.invalidated + m.dropped + m.timed_out == m.sent == len(recs)
        span = max(r.complete_at for r in recs) - min(r.submit_at for r in recs)
        if m.committed and span:
            assert m.throughput_tps == pytest.approx(m.committed * SECOND / span)
        lat = sorted(r.latency for r in recs if r.outcome is Outcome.COMMITTED)
        if lat:
            assert m.mean_ms == float(Fraction(sum(lat), len(lat)) / MS)


def metrics(**kw):
    base = dict(sent=10, committed=10, rejected_conflict=0, invalidated=0, dropped=0, timed_out=0,
                loss_rate=0.0, throughput_tps=10.0, p50_ms=1.0, p90_ms=2.0, mean_ms=1.0, min_ms=0.5, max_ms=3.0)
    base.update(kw)
    return RoundMetrics(**base)


class TestMeans:
    def test_p50_mean_example(self):
        rounds = [metrics(p50_ms=float(80 + i)) for i in range(10)]
        assert mean_metrics(rounds)["p50_ms"] == 84.5

    def test_exact_mean_is_correctly_rounded(self):
        xs = [0.1] * 10
        assert exact_mean(xs) == 0.1
        assert sum(xs) / 10 != 0.1  # naive summation drifts

    def test_latency_mean_skips_empty_rounds(self):
        rounds = [metrics(p50_ms=None, committed=0, loss_rate=1.0), metrics(p50_ms=4.0)]
        m = mean_metrics(rounds)
        assert m["p50_ms"] == 4.0 and m["loss_rate"] == 0.5

    @given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=20))
    def test_exact_mean_property(self, xs):
        assert exact_mean(xs) == float(sum(map(Fraction, xs)) / len(xs))


class TestReport:
    def _report(self):
        rng = random.Random(1)
        rounds = [metrics(p50_ms=rng.uniform(1, 100), p90_ms=None if i == 2 else 5.0) for i in range(3)]
        return BenchReport({"x": 1}, 7, "virtual", [ScenarioResult("federated", 10, 100, rounds)])

    def test_csv_header_and_rows(self):
        text = self._report().to_csv()
        assert text.splitlines()[0] == (
            "backend,rate_tps,n_tx,round,sent,committed,rejected_conflict,invalidated,dropped,timed_out,"
            "throughput_tps,p50_ms,p90_ms,mean_ms,min_ms,max_ms"
        )
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0]) == CSV_FIELDS
        assert [r["round"] for r in rows] == ["0", "1", "2"]
        assert rows[2]["p90_ms"] == ""

    def test_json_is_canonical(self):
        r = self._report()
        text = r.to_json()
        assert text == r.to_json()
        doc = json.loads(text)
        assert doc["seed"] == 7 and doc["mode"] == "virtual"
        assert doc["scenarios"][0]["mean"]["p50_ms"] == exact_mean(x.p50_ms for x in r.scenarios[0].rounds)

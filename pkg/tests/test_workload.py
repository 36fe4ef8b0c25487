import pytest
from hypothesis import given
from hypothesis import strategies as st

from oirbench.airspace import volumes_conflict
from oirbench.federated import FederatedBackend, FederatedConfig
from oirbench.sim import MS, SECOND, DelayDistribution as D, Kernel
from oirbench.tx import Outcome
from oirbench.workload import InvalidSpec, WorkloadSpec, arrival_schedule, generate_workload, run_round
from oracles import conflict_oracle


class TestGenerateWorkload:
    def test_windows(self):
        reqs = generate_workload(WorkloadSpec(3, 10, window_duration_ms=60_000, gap_ms=1_000))
        assert [(r.volume.time_start, r.volume.time_end) for r in reqs] == [
            (0, 60_000), (61_000, 121_000), (122_000, 182_000)
        ]

    def test_ids_unique_and_seeded(self):
        a = generate_workload(WorkloadSpec(500, 10, seed=1))
        b = generate_workload(WorkloadSpec(500, 10, seed=1))
        c = generate_workload(WorkloadSpec(500, 10, seed=2))
        assert [r.id for r in a] == [r.id for r in b]
        assert len({r.id for r in a}) == 500
        assert {r.id for r in a}.isdisjoint(r.id for r in c)

    def test_conflict_fraction_forces_exact_count(self):
        reqs = generate_workload(WorkloadSpec(100, 10, conflict_fraction=0.1, seed=5))
        hits = [i for i in range(1, 100) if conflict_oracle(reqs[i - 1].volume, reqs[i].volume)]
        assert len(hits) == 10

    @given(st.integers(1, 120), st.floats(0, 1), st.integers(0, 10_000))
    def test_conflict_count_property(self, n, f, seed):
        spec = WorkloadSpec(n, 10, conflict_fraction=f, seed=seed)
        k = int(f * n)
        if k > n - 1:
            with pytest.raises(InvalidSpec):
                generate_workload(spec)
            return
        reqs = generate_workload(spec)
        assert sum(volumes_conflict(reqs[i - 1].volume, reqs[i].volume) for i in range(1, n)) == k

    @pytest.mark.parametrize(
        "kw", [dict(n_tx=0), dict(rate_tps=0), dict(workers=0), dict(gap_ms=-1), dict(conflict_fraction=1.5),
               dict(window_duration_ms=0)]
    )
    def test_invalid_specs(self, kw):
        base = dict(n_tx=10, rate_tps=10)
        base.update(kw)
        with pytest.raises(InvalidSpec):
            WorkloadSpec(**base).validate()

    def test_dict_round_trip(self):
        s = WorkloadSpec(10, 5.5, conflict_fraction=0.2, seed=4)
        assert WorkloadSpec.from_dict(s.to_dict()) == s


class TestArrivalSchedule:
    def test_example(self):
        assert arrival_schedule(4, 10, 2) == [[0, 200 * MS], [100 * MS, 300 * MS]]

    @given(st.integers(1, 500), st.floats(0.5, 200), st.integers(1, 8))
    def test_single_worker_same_instants(self, n, rate, w):
        merged = sorted(t for ts in arrival_schedule(n, rate, w) for t in ts)
        assert merged == arrival_schedule(n, rate, 1)[0]

    def test_rate_over_any_ten_second_window(self):
        inst = sorted(t for ts in arrival_schedule(5000, 27.8, 2) for t in ts)
        for start in range(0, 170 * SECOND, 7 * SECOND):
            count = sum(start <= t < start + 10 * SECOND for t in inst)
            assert abs(count - 278) <= 1


class TestRunRound:
    def _federated(self, seed=0):
        return FederatedBackend(FederatedConfig(network_delay=D.constant(10 * MS), service_time=D.constant(80 * MS)),
                                Kernel(), seed)

    def test_single_request(self):
        recs = run_round(self._federated(), generate_workload(WorkloadSpec(1, 10)), arrival_schedule(1, 10))
        assert len(recs) == 1 and recs[0].latency == 100 * MS and recs[0].outcome is Outcome.COMMITTED

    @given(st.integers(1, 60), st.sampled_from([5, 20, 80]), st.integers(1, 4))
    def test_record_per_request(self, n, rate, w):
        recs = run_round(self._federated(), generate_workload(WorkloadSpec(n, rate, workers=w)), arrival_schedule(n, rate, w))
        assert len(recs) == n
        assert {r.worker_id for r in recs} == set(range(min(n, w)))

    def test_deterministic_records(self):
        def go():
            cfg = FederatedConfig(network_delay=D.lognormal(10 * MS, 0.3), service_time=D.exponential(60 * MS),
                                  concurrency_limit=2, queue_capacity=4)
            spec = WorkloadSpec(200, 40, seed=8)
            return run_round(FederatedBackend(cfg, Kernel(), 8), generate_workload(spec), arrival_schedule(200, 40))

        assert go() == go()

    def test_mismatched_schedule(self):
        with pytest.raises(ValueError):
            run_round(self._federated(), generate_workload(WorkloadSpec(3, 10)), arrival_schedule(2, 10))

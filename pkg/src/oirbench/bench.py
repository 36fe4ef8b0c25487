"""Benchmark orchestration: scenarios of rounds, each on a fresh backend."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable

from .metrics import ScenarioResult, aggregate
from .sim import Kernel, WallKernel, derive_seed
from .workload import WorkloadSpec, arrival_schedule, generate_workload, run_round

log = logging.getLogger(__name__)

# (kernel, seed) -> backend exposing submit() and .kernel
BackendFactory = Callable[[object, int], object]


def run_scenario(
    name: str,
    factory: BackendFactory,
    spec: WorkloadSpec,
    rounds: int,
    seed: int,
    mode: str = "virtual",
) -> ScenarioResult:
    """Run `rounds` independent rounds of one (backend, rate, n) point.

    Each round draws its own seed from `seed` and the scenario labels, so a
    round's result does not depend on which other scenarios ran before it.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    results = []
    for r in range(rounds):
        rs = derive_seed(seed, name, spec.rate_tps, spec.n_tx, r)
        workload = generate_workload(replace(spec, seed=rs))
        schedule = arrival_schedule(spec.n_tx, spec.rate_tps, spec.workers)
        kernel = Kernel() if mode == "virtual" else WallKernel().start()
        backend = factory(kernel, rs)
        try:
            records = run_round(backend, workload, schedule)
        finally:
            close = getattr(backend, "close", None)
            if close is not None:
                close()
            if isinstance(kernel, WallKernel):
                kernel.stop()
        m = aggregate(records)
        log.info(
            "%s rate=%s n=%d round=%d committed=%d/%d p50=%s ms",
            name, spec.rate_tps, spec.n_tx, r, m.committed, m.sent, m.p50_ms,
        )
        results.append(m)
    return ScenarioResult(name, spec.rate_tps, spec.n_tx, results)


def sweep(
    name: str,
    factory: BackendFactory,
    base: WorkloadSpec,
    rates,
    sizes,
    rounds: int,
    seed: int,
    mode: str = "virtual",
) -> list[ScenarioResult]:
    """Cross product of sizes and rates, sizes outermost."""
    return [
        run_scenario(name, factory, replace(base, n_tx=n, rate_tps=rate), rounds, seed, mode)
        for n in sizes
        for rate in rates
    ]

"""Benchmark harness comparing a federated OIR registry with a permissioned-ledger model."""

from .airspace import (
    CreateOirRequest,
    GeoPoint,
    InvalidField,
    OirIndex,
    OirState,
    OperationalIntentReference,
    Volume4D,
    check_conflicts,
    compute_ovn,
    haversine_distance,
    volumes_conflict,
)
from .federated import FederatedBackend, FederatedConfig
from .ledger import LedgerBackend, LedgerConfig
from .metrics import BenchReport, RoundMetrics, aggregate, percentile
from .sim import MS, SECOND, DelayDistribution, Kernel, WallKernel
from .tx import Outcome, TxHandle, TxRecord
from .workload import WorkloadSpec, arrival_schedule, generate_workload, run_round

__version__ = "0.1.0"

__all__ = [
    "BenchReport", "CreateOirRequest", "DelayDistribution", "FederatedBackend", "FederatedConfig",
    "GeoPoint", "InvalidField", "Kernel", "LedgerBackend", "LedgerConfig", "MS", "OirIndex", "OirState",
    "OperationalIntentReference", "Outcome", "RoundMetrics", "SECOND", "TxHandle", "TxRecord",
    "Volume4D", "WallKernel", "WorkloadSpec", "aggregate", "arrival_schedule", "check_conflicts",
    "compute_ovn", "generate_workload", "haversine_distance", "percentile", "run_round", "volumes_conflict",
]

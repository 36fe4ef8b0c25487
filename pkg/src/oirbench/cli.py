"""``oirbench run`` and ``oirbench serve``.

Exit status: 0 on success, 2 for configuration errors, 3 when a backend is
unavailable or the service cannot bind its port.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .bench import run_scenario
from .config import BackendSpec, ConfigInvalid, RunConfig, load_config, remote_deadline
from .federated import FederatedBackend
from .ledger import LedgerBackend
from .metrics import BenchReport
from .remote import RemoteBackend
from .service import DssService
from .sim import WallKernel
from .tx import BackendUnavailable

EXIT_OK, EXIT_CONFIG, EXIT_BACKEND = 0, 2, 3

log = logging.getLogger("oirbench")


def make_factory(spec: BackendSpec):
    if spec.kind == "federated":
        return lambda kernel, seed: FederatedBackend(spec.config, kernel, seed)
    if spec.kind == "ledger":
        return lambda kernel, seed: LedgerBackend(spec.config, kernel, seed)
    opts = {k: v for k, v in spec.remote.items() if k in ("pool_size", "keepalive", "cleanup")}
    deadline = remote_deadline(spec)
    return lambda kernel, seed: RemoteBackend(spec.url, kernel, request_deadline=deadline, **opts)


def check_remote(spec: BackendSpec) -> None:
    probe = RemoteBackend(spec.url, pool_size=1)
    try:
        probe.health_check()
    finally:
        probe.close()


def run_benchmark(cfg: RunConfig, progress=None) -> BenchReport:
    for spec in cfg.backends:
        if spec.kind == "remote":
            check_remote(spec)
    scenarios = []
    for spec in cfg.backends:
        factory = make_factory(spec)
        for n in cfg.sizes:
            for rate in cfg.rates:
                w = replace(cfg.workload, n_tx=n, rate_tps=rate)
                s = run_scenario(spec.label, factory, w, cfg.rounds, cfg.seed, cfg.mode)
                if progress is not None:
                    progress(s)
                scenarios.append(s)
    return BenchReport(cfg.describe(), cfg.seed, cfg.mode, scenarios)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_reports(report: BenchReport, cfg: RunConfig) -> None:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(cfg.csv_path, report.to_csv())
    _atomic_write(cfg.json_path, report.to_json())


def _fmt(x, unit=""):
    return "-" if x is None else f"{x:.1f}{unit}"


def _progress(s) -> None:
    m = s.mean
    print(
        f"{s.backend:>10} rate={s.rate_tps:g} n={s.n_tx} p50={_fmt(m['p50_ms'], 'ms')} "
        f"p90={_fmt(m['p90_ms'], 'ms')} loss={m['loss_rate']:.2%} tput={m['throughput_tps']:.2f}",
        file=sys.stderr,
    )


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, seed=args.seed, mode=args.mode, out_dir=args.out_dir)
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_benchmark(cfg, progress=None if args.quiet else _progress)
    except BackendUnavailable as e:
        print(f"backend unavailable: {e}", file=sys.stderr)
        return EXIT_BACKEND
    write_reports(report, cfg)
    print(f"wrote {cfg.csv_path} and {cfg.json_path}", file=sys.stderr)
    return EXIT_OK


def build_served_backend(cfg: RunConfig):
    """The in-process backend behind `serve`, on a started WallKernel."""
    if len(cfg.backends) != 1 or cfg.backends[0].kind == "remote":
        raise ConfigInvalid("serve needs exactly one federated or ledger backend")
    spec = cfg.backends[0]
    bcfg = spec.config if spec.inject_delays else spec.config.without_delays()
    kernel = WallKernel().start()
    cls = FederatedBackend if spec.kind == "federated" else LedgerBackend
    return cls(bcfg, kernel, cfg.seed)


def cmd_serve(args) -> int:
    try:
        cfg = load_config(args.config, seed=args.seed, mode="wall")
        backend = build_served_backend(cfg)
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        svc = DssService(backend, cfg.serve_host, cfg.serve_port)
    except OSError as e:
        backend.kernel.stop()
        print(f"cannot bind {cfg.serve_host}:{cfg.serve_port}: {e}", file=sys.stderr)
        return EXIT_BACKEND
    print(f"serving {backend.name} on {svc.url}", file=sys.stderr, flush=True)
    try:
        svc.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        svc.close()
        backend.kernel.stop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oirbench", description="OIR registration benchmark harness")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured benchmark and write CSV + JSON reports")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int, help="override the config seed and OIRBENCH_SEED")
    run.add_argument("--out-dir", type=Path, help="override the config output directory")
    run.add_argument("--mode", choices=["virtual", "wall"], help="override the config mode")
    run.add_argument("-q", "--quiet", action="store_true", help="no per-scenario progress lines")
    run.set_defaults(func=cmd_run)

    serve = sub.add_parser("serve", help="expose the configured backend over HTTP")
    serve.add_argument("--config", required=True, type=Path)
    serve.add_argument("--seed", type=int)
    serve.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("OIRBENCH_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Helpers shared by the experiment scripts."""

from __future__ import annotations

from pathlib import Path

from oirbench.cli import run_benchmark, write_reports
from oirbench.config import parse_config

BOTH = [{"kind": "federated", "preset": "calibrated"}, {"kind": "ledger", "preset": "calibrated"}]


def run(doc: dict, out_dir: str | None = None, quiet: bool = False):
    cfg = parse_config(doc, out_dir=Path(out_dir) if out_dir else None, env={})
    progress = None if quiet else (lambda s: print(f"  {s.backend:>9} {s.rate_tps:>6} TPS n={s.n_tx:<5} done", flush=True))
    report = run_benchmark(cfg, progress)
    if out_dir:
        write_reports(report, cfg)
        print(f"reports written to {cfg.csv_path} and {cfg.json_path}")
    return report


def fmt_ms(x) -> str:
    if x is None:
        return "-"
    return f"{x / 1000:.2f} s" if x >= 1000 else f"{x:.1f} ms"


def table(report, cols=("p50_ms", "p90_ms", "loss_rate", "throughput_tps")) -> str:
    head = f"{'backend':<10}{'n_tx':>6}{'TPS':>7}" + "".join(f"{c:>16}" for c in cols)
    lines = [head, "-" * len(head)]
    for s in report.scenarios:
        cells = []
        for c in cols:
            v = s.mean[c]
            if c.endswith("_ms"):
                cells.append(fmt_ms(v))
            elif c == "loss_rate":
                cells.append(f"{v:.1%}")
            else:
                cells.append(f"{v:.2f}")
        lines.append(f"{s.backend:<10}{s.n_tx:>6}{s.rate_tps:>7}" + "".join(f"{x:>16}" for x in cells))
    return "\n".join(lines)

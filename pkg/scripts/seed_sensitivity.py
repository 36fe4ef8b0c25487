#!/usr/bin/env python3
"""Spread of the headline ledger numbers across seeds.

The calibrated presets are tuned against seed 1; this shows how far other
seeds drift from it.
"""

import argparse

from _common import run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(1, 9)))
    ap.add_argument("--rounds", type=int, default=10)
    args = ap.parse_args()
    print(f"{'seed':>5}{'p90@20 s':>10}{'p90@30 s':>10}{'loss@50':>9}")
    for seed in args.seeds:
        report = run({"backend": {"kind": "ledger", "preset": "calibrated"},
                      "workload": {"n_tx": 2000, "rate_tps": [20, 30, 50]},
                      "rounds": args.rounds, "seed": seed}, quiet=True)
        m = {s.rate_tps: s.mean for s in report.scenarios}
        print(f"{seed:>5}{m[20]['p90_ms'] / 1000:>10.2f}{m[30]['p90_ms'] / 1000:>10.2f}{m[50]['loss_rate']:>9.1%}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Rate sweep of both calibrated backends at n_tx=2000, printed as a table.

    python3 scripts/reproduce_trend.py [--seed 1] [--rounds 10] [--out results/trend]
"""

import argparse
import time

from _common import BOTH, run, table

from oirbench.presets import CALIBRATION_N_TX, SWEEP_RATES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--rounds", type=int, default=10)
    ap.add_argument("--n-tx", type=int, default=CALIBRATION_N_TX)
    ap.add_argument("--out", help="directory for report.csv / report.json")
    args = ap.parse_args()

    t = time.perf_counter()
    report = run({"backend": BOTH, "workload": {"n_tx": args.n_tx, "rate_tps": SWEEP_RATES},
                  "rounds": args.rounds, "seed": args.seed}, args.out)
    print()
    print(table(report))
    print(f"\n{time.perf_counter() - t:.1f} s wall")


if __name__ == "__main__":
    main()

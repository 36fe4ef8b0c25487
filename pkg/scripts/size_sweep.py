#!/usr/bin/env python3
"""Full grid: n_tx 100..2000 step 100 against 10..50 TPS, both backends.

Takes a couple of minutes at 10 rounds. Use --rounds 2 for a quick look.
"""

import argparse

from _common import BOTH, run, table

from oirbench.presets import SWEEP_N_TX, SWEEP_RATES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--rounds", type=int, default=10)
    ap.add_argument("--out", default="results/size-sweep")
    args = ap.parse_args()
    report = run({"backend": BOTH, "workload": {"n_tx": list(SWEEP_N_TX), "rate_tps": SWEEP_RATES},
                  "rounds": args.rounds, "seed": args.seed}, args.out, quiet=True)
    print(table(report, ("p50_ms", "loss_rate")))


if __name__ == "__main__":
    main()

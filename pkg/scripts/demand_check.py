#!/usr/bin/env python3
"""Can each calibrated backend absorb the projected demand levels without loss?"""

import argparse

from _common import BOTH, run, table

from oirbench.presets import CALIBRATION_N_TX, DEMAND_TPS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--rounds", type=int, default=10)
    args = ap.parse_args()
    for name, tps in DEMAND_TPS.items():
        print(f"\n{name}: {tps} TPS")
        report = run({"backend": BOTH, "workload": {"n_tx": CALIBRATION_N_TX, "rate_tps": tps},
                      "rounds": args.rounds, "seed": args.seed}, quiet=True)
        print(table(report))


if __name__ == "__main__":
    main()

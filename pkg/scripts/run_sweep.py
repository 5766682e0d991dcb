#!/usr/bin/env python3
"""Capacity convergence sweep: median errors vs c with fitted log-log slopes.

Example:
    python3 scripts/run_sweep.py --out sweep.csv --c-list 1e-2,1e-3,1e-4
"""

import argparse

from alesim import harness
from alesim.analysis import convergence_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="sweep-capacity",
                    choices=sorted(harness.PRESETS))
    ap.add_argument("--c-list", default="1e-2,1e-3,1e-4")
    ap.add_argument("--replicas", type=int, default=20)
    ap.add_argument("--sigma-exponent", type=float, default=0.2)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", required=True, help="output CSV")
    args = ap.parse_args()

    cfg = harness.preset_config(args.preset)
    c_list = [float(x) for x in args.c_list.split(",") if x]
    table = convergence_sweep(cfg, c_list, args.replicas,
                              sigma_exponent=args.sigma_exponent,
                              seed=args.seed)
    table.to_csv(args.out)
    for metric, slope in sorted(table.slopes.items()):
        print(f"{metric}: slope {slope:.4f}")
    print(f"table written to {args.out}")


if __name__ == "__main__":
    main()

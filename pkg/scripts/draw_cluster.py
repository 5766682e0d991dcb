#!/usr/bin/env python3
"""Grow one cluster and dump its boundary polyline as CSV (re,im rows).

Example:
    python3 scripts/draw_cluster.py --alpha 1 --eta 0 --c 1e-3 --out b.csv
"""

import argparse

from alesim import chain
from alesim.config import SimConfig
from alesim.conformal import boundary_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--eta", type=float, default=0.0)
    ap.add_argument("--c", type=float, default=1e-3)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=2048)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    cfg = SimConfig.from_dict({"alpha": args.alpha, "eta": args.eta,
                               "c": args.c, "T": args.T, "seed": args.seed,
                               "keep_events": False})
    traj = chain.run(cfg, seed=cfg.master_seed, replica=0)
    pts = boundary_trace(traj.cluster, M=args.samples, rho=1 + 1e-6)
    with open(args.out, "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("re,im\n")
        for w in pts:
            fh.write(f"{w.real:.12g},{w.imag:.12g}\n")
    print(f"{traj.cluster.n_particles} particles, "
          f"capacity {traj.cluster.total_capacity:.4f} -> {args.out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Run the bulk scaling-limit experiment and print per-run capacity errors.

Example:
    python3 scripts/run_bulk.py --preset bulk-hl1 --out runs/bulk-hl1 -j 4
"""

import argparse
import json
from pathlib import Path

import numpy as np

from alesim import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="bulk-hl1",
                    choices=sorted(harness.PRESETS))
    ap.add_argument("--config", help="JSON config overriding the preset")
    ap.add_argument("--out", required=True)
    ap.add_argument("-j", "--parallelism", type=int, default=1)
    args = ap.parse_args()

    cfg = (harness.load_config(args.config) if args.config
           else harness.preset_config(args.preset))
    out = harness.run_batch(cfg, args.out, parallelism=args.parallelism)

    manifest = json.loads((Path(out) / "manifest.json").read_text())
    errs = [s["sup_cap_err"] for s in manifest["summaries"] if "error" not in s]
    print(f"config hash      {manifest['config_hash']}")
    print(f"replicas done    {len(errs)}/{manifest['replicas']}")
    print(f"sup|T_t - tau_t| median {np.median(errs):.5f}  "
          f"p90 {np.percentile(errs, 90):.5f}  max {max(errs):.5f}")
    print(f"envelope violations: {manifest['envelope_violations']}")


if __name__ == "__main__":
    main()

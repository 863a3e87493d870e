"""Histograms of the geodesic count at lambda = 20, r0 = 1 for L = 2.5 and 3.5.

Writes one CSV per distance (sigma,freq,ci_lo,ci_hi) plus a manifest, and
prints the sample moments next to the analytic ones.  Plotting is left to
the reader's toolchain.

    python3 scripts/reproduce_fig2.py --out-dir fig2 --trials 1000000
"""

import argparse
import os
import sys

from geostat.cli import main as cli


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="fig2")
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-sigma", type=int, default=600)
    return p.parse_args()


def main():
    args = parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for L in ("2.5", "3.5"):
        out = os.path.join(args.out_dir, f"pmf_L{L}.csv")
        print(f"L = {L}: {out}")
        code = cli(["pmf", "--lambda", "20", "--r0", "1", "--L", L, "--trials", str(args.trials),
                    "--seed", str(args.seed), "--workers", str(args.workers),
                    "--max-sigma", str(args.max_sigma), "--out", out])
        if code:
            return code
        cli(["analytic", "--lambda", "20", "--r0", "1", "--L", L])
    return 0


if __name__ == "__main__":
    sys.exit(main())

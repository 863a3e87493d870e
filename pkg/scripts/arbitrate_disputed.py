"""Compare the published Var(sigma_4) and 3-hop third central moment with the
exact engines and a Monte Carlo estimate.

    python3 scripts/arbitrate_disputed.py --trials 10000000
"""

import argparse
import sys
from fractions import Fraction

from geostat.analytics import (
    compare_variance,
    mecke_central_moment,
    third_central_moment_paper,
    variance_sigma_paper,
)
from geostat.model import Scenario
from geostat.montecarlo import EnsembleConfig, run_ensemble


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=10**7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--big-lambda", type=float, nargs="+", default=[2, 5, 10])
    args = p.parse_args()

    cmp4 = compare_variance(4)
    print("Var(sigma_4)")
    print(f"  published : {cmp4.paper}")
    print(f"  mecke     : {cmp4.mecke}")
    print(f"  recursion : {cmp4.recursion}")
    print(f"  engines agree: {cmp4.engines_agree}; powers differing from published: {cmp4.differing_powers()}")
    print("third central moment, k = 3")
    print(f"  published : {third_central_moment_paper()}")
    print(f"  mecke     : {mecke_central_moment(3, 3)}")
    print()

    print(f"{'quantity':>14} {'Lambda':>6} {'MC':>14} {'SE':>10} {'mecke':>14} {'z':>7} {'published':>14} {'z':>9}")
    for big in args.big_lambda:
        exact = Fraction(big)
        for k, name, pick, se_pick, oracle, paper in (
            (4, "Var(sigma_4)", lambda s: s.variance, lambda s: s.standard_error_variance,
             mecke_central_moment(4, 2), variance_sigma_paper(4)),
            (3, "m3(sigma_3)", lambda s: s.central_moment_3, lambda s: s.standard_error_m3,
             mecke_central_moment(3, 3), third_central_moment_paper()),
        ):
            sc = Scenario(20, 1, k - big / 20)
            s = run_ensemble(EnsembleConfig(sc, args.trials, args.seed, workers=args.workers))
            est, se = pick(s), se_pick(s)
            o, q = float(oracle(exact)), float(paper(exact))
            print(f"{name:>14} {big:6g} {est:14.6g} {se:10.4g} {o:14.6g} {(est - o) / se:7.2f} "
                  f"{q:14.6g} {(est - q) / se:9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

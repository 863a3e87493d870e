"""Parameter sweeps over Lambda for the collapse check.

For each grid value of Lambda and each (lambda, r0) combination the
distance L is solved from Lambda = lambda (k r0 - L); combinations that put
L outside ((k-1) r0, k r0) are skipped.  Lambda = 0 maps to the
degenerate distance L = k r0, where sigma is 0 almost surely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .analytics import MECKE_MAX_K, mean_sigma, mecke_central_moment, variance_sigma_paper
from .model import Scenario
from .montecarlo import EnsembleConfig, run_ensemble

DEFAULT_GRID = tuple(range(1, 21))
DEFAULT_COMBOS = ((10.0, 1.0), (20.0, 1.0), (50.0, 1.0))

COLUMNS = ("big_lambda", "lambda", "r0", "L", "mean_mc", "var_mc",
           "mean_an", "var_an_paper", "var_an_mecke", "se_mean")


def solve_distance(k: int, big_lambda: float, lam: float, r0: float) -> float | None:
    """L with lambda (k r0 - L) = Lambda, or None when that L is not a k-hop distance."""
    if big_lambda == 0:
        return float(k * r0)
    L = k * r0 - big_lambda / lam
    if not (k - 1) * r0 < L < k * r0:
        return None
    sc = Scenario(lam, r0, L)
    return L if sc.hop_count == k and not sc.degenerate else None


def feasible_points(k: int, grid, combos) -> list[tuple[float, float, float, float]]:
    out = []
    for big in grid:
        for lam, r0 in combos:
            L = solve_distance(k, big, lam, r0)
            if L is not None:
                out.append((float(big), float(lam), float(r0), L))
    return out


def row_seed(root_seed: int, row: int) -> int:
    """Independent 64-bit root seed for sweep row ``row``."""
    words = np.random.SeedSequence([int(root_seed), int(row)]).generate_state(2, np.uint32)
    return int(words[0]) | int(words[1]) << 32


@dataclass(frozen=True)
class SweepRow:
    big_lambda: float
    lam: float
    r0: float
    L: float
    mean_mc: float
    var_mc: float
    mean_an: float
    var_an_paper: float | None
    var_an_mecke: float | None
    se_mean: float

    def as_tuple(self):
        return (self.big_lambda, self.lam, self.r0, self.L, self.mean_mc, self.var_mc,
                self.mean_an, self.var_an_paper, self.var_an_mecke, self.se_mean)


def run_sweep(k: int, grid=DEFAULT_GRID, combos=DEFAULT_COMBOS, trials: int = 10**5,
              root_seed: int = 0, workers: int = 1) -> list[SweepRow]:
    mean_poly = mean_sigma(k)
    paper = variance_sigma_paper(k) if k in (3, 4) else None
    mecke = mecke_central_moment(k, 2) if 2 <= k <= MECKE_MAX_K else None
    rows = []
    for i, (big, lam, r0, L) in enumerate(feasible_points(k, grid, combos)):
        sc = Scenario(lam, r0, L)
        s = run_ensemble(EnsembleConfig(sc, trials, row_seed(root_seed, i), workers=workers))
        # analytic values at the nominal grid Lambda, not the rounded lam * W
        exact = Fraction(big)
        rows.append(SweepRow(
            big, lam, r0, L, s.mean, s.variance,
            float(mean_poly(exact)),
            None if paper is None else float(paper(exact)),
            None if mecke is None else float(mecke(exact)),
            s.standard_error_mean,
        ))
    return rows

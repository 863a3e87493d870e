"""Reproducible Monte Carlo ensembles of the geodesic count.

Trials are processed in fixed blocks of ``BLOCK_TRIALS``; block ``b`` draws
from its own counter-based stream keyed by ``(root_seed, b)``.  Workers
return whole blocks, the parent merges them in block order, and every
statistic is accumulated from exact integer power sums, so the summary
does not depend on the number of workers.

The default ``lens_chains`` algorithm samples only the k - 1 lenses and
counts chains for a whole block at once with numpy.  ``bfs`` samples the
full road and runs the BFS counter per trial; ``both`` does that and also
counts lens chains on the same realisation, failing loudly on any
disagreement.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Iterable, Iterator

import numpy as np

from .analytics import (
    MECKE_MAX_K,
    PAPER,
    RECURSION_MAX_K,
    mean_sigma,
    mecke_central_moment,
    recursion_moments,
    third_central_moment_paper,
    variance_sigma_paper,
)
from .errors import AlgorithmMismatch
from .geodesics import GeodesicCount, count_bfs, count_lens_chains, split_into_lenses
from .model import Scenario, lens_decomposition
from .sampling import BLOCK_STREAM, PointSample, stream

BLOCK_TRIALS = 1 << 15
N_BATCHES = 100
ALGORITHMS = ("lens_chains", "bfs", "both")

_UBITS = 48
_USCALE = float(1 << _UBITS)
_INT64_SAFE = float(1 << 62)


@dataclass(frozen=True)
class EnsembleConfig:
    scenario: Scenario
    trials: int = 10**6
    root_seed: int = 0
    algorithm: str = "lens_chains"
    workers: int = 1
    margin: float = 0.0

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 0 <= int(self.root_seed) < 2**64:
            raise ValueError(f"root_seed must be an unsigned 64-bit integer, got {self.root_seed}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")

    @property
    def n_blocks(self) -> int:
        return -(-self.trials // BLOCK_TRIALS)

    def block_size(self, block: int) -> int:
        return min(BLOCK_TRIALS, self.trials - block * BLOCK_TRIALS)


@dataclass
class BlockResult:
    start: int
    sigma: np.ndarray
    counts: list[GeodesicCount] | None = None
    points: list[tuple[int, float]] | None = None


# ---------------------------------------------------------------------------
# block kernels


def _chain_sigmas(k: int, big_lambda: float, rng: np.random.Generator, n: int):
    """Vectorised chain count for ``n`` trials.

    Lens points are encoded as ``trial << 48 | u`` with u a 48-bit uniform,
    so one sort orders them by trial and then by normalized position.  The
    chain weight of a lens-(i+1) point is the sum of weights of lens-i
    points of the same trial at or above it: a difference of suffix sums.
    """
    if k == 1:
        return np.ones(n, dtype=np.int64), []
    counts = rng.poisson(big_lambda, size=(k - 1, n))
    dtype = np.int64
    if n and np.prod(counts.astype(float), axis=0).max() >= _INT64_SAFE:
        dtype = object
    trial_ids = np.arange(n, dtype=np.int64)
    keys = []
    prev = weights = None
    for i in range(k - 1):
        tid = np.repeat(trial_ids, counts[i])
        cur = (tid << _UBITS) | rng.integers(0, 1 << _UBITS, size=tid.size, dtype=np.int64)
        cur.sort()
        if i == 0:
            weights = np.ones(cur.size, dtype=dtype)
        else:
            suffix = np.zeros(prev.size + 1, dtype=dtype)
            suffix[:-1] = np.cumsum(weights[::-1])[::-1]
            first = np.searchsorted(prev, cur, side="left")
            prev_bounds = np.searchsorted(prev >> _UBITS, trial_ids + 1, side="left")
            end = prev_bounds[cur >> _UBITS]
            weights = suffix[first] - suffix[end]
        keys.append(cur)
        prev = cur
    owner = prev >> _UBITS
    bounds = np.searchsorted(owner, np.arange(n + 1, dtype=np.int64), side="left")
    cum = np.zeros(prev.size + 1, dtype=dtype)
    cum[1:] = np.cumsum(weights)
    return cum[bounds[1:]] - cum[bounds[:-1]], keys


def _lens_block(config: EnsembleConfig, block: int, with_points: bool) -> BlockResult:
    sc = config.scenario
    n = config.block_size(block)
    start = block * BLOCK_TRIALS
    k = sc.hop_count
    if k == 1 or sc.degenerate:
        # direct link: exactly one 1-hop path; exact multiple: no geodesic almost surely
        sigma = np.full(n, 1 if k == 1 else 0, dtype=np.int64)
        return BlockResult(start, sigma, points=[] if with_points else None)
    rng = stream(config.root_seed, BLOCK_STREAM, block)
    sigma, keys = _chain_sigmas(k, sc.big_lambda, rng, n)
    points = None
    if with_points:
        decomp = lens_decomposition(sc)
        rows = []
        for (lo, _), cur in zip(decomp.lenses, keys):
            tid = cur >> _UBITS
            x = lo + decomp.width * ((cur & ((1 << _UBITS) - 1)) / _USCALE)
            rows.extend(zip((start + tid).tolist(), x.tolist()))
        rows.sort()
        points = rows
    return BlockResult(start, sigma, points=points)


def _road_block(config: EnsembleConfig, block: int, with_points: bool) -> BlockResult:
    sc = config.scenario
    n = config.block_size(block)
    start = block * BLOCK_TRIALS
    lo, hi = -config.margin, sc.L + config.margin
    rng = stream(config.root_seed, BLOCK_STREAM, block)
    counts = rng.poisson(sc.lam * (hi - lo), size=n)
    xs = lo + (hi - lo) * rng.random(int(counts.sum()))
    np.clip(xs, lo, hi, out=xs)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    decomp = None
    if config.algorithm == "both" and not sc.degenerate and sc.hop_count > 1:
        decomp = lens_decomposition(sc)
    sigma = np.zeros(n, dtype=object)
    results = []
    rows = [] if with_points else None
    for j in range(n):
        sample = PointSample(tuple(np.sort(xs[offsets[j]:offsets[j + 1]]).tolist()), (lo, hi))
        g = count_bfs(sample, sc)
        if config.algorithm == "both":
            chain = count_lens_chains(split_into_lenses(sample, decomp), decomp).sigma if decomp else g.sigma
            if sc.hop_count == 1:
                chain = 1
            if chain != g.sigma:
                raise AlgorithmMismatch(start + j, config.root_seed, g.sigma, chain, sample.positions)
        sigma[j] = g.sigma
        results.append(g)
        if rows is not None:
            rows.extend((start + j, x) for x in sample.positions)
    if all(isinstance(s, int) and s < 2**62 for s in sigma):
        sigma = sigma.astype(np.int64)
    return BlockResult(start, sigma, counts=results, points=rows)


def _run_block(args) -> BlockResult:
    config, block, with_points = args
    if config.algorithm == "lens_chains":
        return _lens_block(config, block, with_points)
    return _road_block(config, block, with_points)


def iter_blocks(config: EnsembleConfig, with_points: bool = False) -> Iterator[BlockResult]:
    """Block results in trial order, computed with ``config.workers`` processes."""
    tasks = [(config, b, with_points) for b in range(config.n_blocks)]
    if config.workers == 1 or len(tasks) == 1:
        for t in tasks:
            yield _run_block(t)
        return
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        yield from pool.map(_run_block, tasks)


# ---------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class EnsembleSummary:
    scenario: Scenario
    root_seed: int
    algorithm: str
    trials: int
    k: int
    big_lambda: float
    mean: float
    variance: float
    central_moment_3: float
    pmf: dict[int, float]
    standard_error_mean: float
    standard_error_variance: float | None
    standard_error_m3: float | None
    zero_fraction: float
    histogram: dict[int, int] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario.to_json(),
            "trials": self.trials,
            "seed": self.root_seed,
            "algorithm": self.algorithm,
            "k": self.k,
            "big_lambda": self.big_lambda,
            "mean": self.mean,
            "variance": self.variance,
            "m3": self.central_moment_3,
            "se_mean": self.standard_error_mean,
            "se_variance": self.standard_error_variance,
            "se_m3": self.standard_error_m3,
            "zero_fraction": self.zero_fraction,
            "pmf": [[s, f] for s, f in self.pmf.items()],
        }


class _PowerSums:
    __slots__ = ("n", "s")

    def __init__(self):
        self.n = 0
        self.s = [0, 0, 0]

    def add(self, values, counts):
        for v, c in zip(values, counts):
            v, c = int(v), int(c)
            self.n += c
            self.s[0] += c * v
            self.s[1] += c * v * v
            self.s[2] += c * v * v * v

    def moments(self) -> tuple[Fraction, Fraction | None, Fraction]:
        n = self.n
        s1, s2, s3 = self.s
        mean = Fraction(s1, n)
        var = Fraction(s2 * n - s1 * s1, n * (n - 1)) if n > 1 else None
        m3 = Fraction(s3, n) - 3 * mean * Fraction(s2, n) + 2 * mean**3
        return mean, var, m3


def _batch_se(values: list[Fraction]) -> float | None:
    b = len(values)
    if b < 2:
        return None
    avg = sum(values, Fraction(0)) / b
    s2 = sum(((v - avg) ** 2 for v in values), Fraction(0)) / (b - 1)
    return math.sqrt(s2 / b)


def summarize(config: EnsembleConfig, blocks: Iterable[BlockResult]) -> EnsembleSummary:
    """Fold block results into a summary; batch means use 100 contiguous batches."""
    trials = config.trials
    n_batches = min(N_BATCHES, trials // 2)
    batches = [_PowerSums() for _ in range(max(n_batches, 1))]
    hist: dict[int, int] = {}
    for res in blocks:
        sig = res.sigma
        idx = np.arange(res.start, res.start + len(sig), dtype=np.int64)
        bid = idx * max(n_batches, 1) // trials
        for b in np.unique(bid):
            values, counts = np.unique(sig[bid == b], return_counts=True)
            batches[int(b)].add(values, counts)
            for v, c in zip(values.tolist(), counts.tolist()):
                hist[int(v)] = hist.get(int(v), 0) + int(c)

    total = _PowerSums()
    total.add(list(hist), list(hist.values()))
    mean, var, m3 = total.moments()
    var = var if var is not None else Fraction(0)
    se_var = se_m3 = None
    if n_batches >= 2:
        per = [b.moments() for b in batches]
        se_var = _batch_se([v for _, v, _ in per])
        se_m3 = _batch_se([m for _, _, m in per])
    sc = config.scenario
    return EnsembleSummary(
        scenario=sc,
        root_seed=int(config.root_seed),
        algorithm=config.algorithm,
        trials=trials,
        k=sc.hop_count,
        big_lambda=sc.big_lambda,
        mean=float(mean),
        variance=float(var),
        central_moment_3=float(m3),
        pmf={s: hist[s] / trials for s in sorted(hist)},
        standard_error_mean=math.sqrt(var / trials),
        standard_error_variance=se_var,
        standard_error_m3=se_m3,
        zero_fraction=hist.get(0, 0) / trials,
        histogram=dict(sorted(hist.items())),
    )


def run_ensemble(config: EnsembleConfig) -> EnsembleSummary:
    return summarize(config, iter_blocks(config))


# ---------------------------------------------------------------------------
# pmf estimate


_Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class PmfBin:
    label: str
    count: int
    freq: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class PmfEstimate:
    bins: list[PmfBin]
    max_sigma: int
    summary: EnsembleSummary

    @property
    def total_mass(self) -> float:
        return math.fsum(b.freq for b in self.bins)


def pmf_from_summary(summary: EnsembleSummary, max_sigma: int) -> PmfEstimate:
    if max_sigma < 0:
        raise ValueError("max_sigma must be >= 0")
    n = summary.trials
    hist = summary.histogram
    bins = []
    for s in range(max_sigma + 1):
        c = hist.get(s, 0)
        bins.append(PmfBin(str(s), c, c / n, *wilson_interval(c, n)))
    over = sum(c for s, c in hist.items() if s > max_sigma)
    bins.append(PmfBin(f">{max_sigma}", over, over / n, *wilson_interval(over, n)))
    return PmfEstimate(bins, max_sigma, summary)


def estimate_pmf(config: EnsembleConfig, max_sigma: int) -> PmfEstimate:
    """Relative-frequency histogram with 95% Wilson intervals; the tail above
    ``max_sigma`` is pooled into one overflow bin."""
    return pmf_from_summary(run_ensemble(config), max_sigma)


# ---------------------------------------------------------------------------
# comparison against the analytic results

MECKE = "oracle:mecke"
RECURSION = "oracle:recursion"
CLOSED_FORM = "closed-form"
Z_PASS = 4.0


@dataclass(frozen=True)
class Check:
    quantity: str
    source: str
    analytic: float
    estimate: float
    standard_error: float | None
    z: float | None

    @property
    def passed(self) -> bool:
        return self.z is not None and abs(self.z) <= Z_PASS


@dataclass(frozen=True)
class ComparisonReport:
    k: int
    big_lambda: float
    checks: list[Check]

    def get(self, quantity: str, source: str) -> Check:
        for c in self.checks:
            if c.quantity == quantity and c.source == source:
                return c
        raise KeyError((quantity, source))

    def sources(self, quantity: str) -> list[str]:
        return [c.source for c in self.checks if c.quantity == quantity]

    def winners(self, quantity: str) -> list[str]:
        """Sources whose analytic value the simulation does not reject."""
        return [c.source for c in self.checks if c.quantity == quantity and c.passed]

    @property
    def mean_passed(self) -> bool:
        return self.get("mean", CLOSED_FORM).passed

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "big_lambda": self.big_lambda,
            "checks": [
                {"quantity": c.quantity, "source": c.source, "analytic": c.analytic,
                 "estimate": c.estimate, "se": c.standard_error, "z": c.z, "pass": c.passed}
                for c in self.checks
            ],
        }


def _z(estimate: float, analytic: float, se: float | None) -> float | None:
    if se is None:
        return None
    diff = estimate - analytic
    if se == 0:
        # relative tolerance absorbs float rounding of exact-zero-variance cases
        return 0.0 if abs(diff) <= 1e-9 * max(1.0, abs(analytic)) else math.copysign(math.inf, diff)
    return diff / se


def compare_to_analytic(summary: EnsembleSummary) -> ComparisonReport:
    """z-scores of the sample mean, variance and third central moment against
    every available analytic source, each labelled with its provenance."""
    k, big = summary.k, summary.big_lambda
    checks = []

    def add(quantity, source, analytic, estimate, se):
        checks.append(Check(quantity, source, analytic, estimate, se, _z(estimate, analytic, se)))

    add("mean", CLOSED_FORM, mean_sigma(k)(big), summary.mean, summary.standard_error_mean)
    if k == 1:
        add("variance", CLOSED_FORM, 0.0, summary.variance, summary.standard_error_variance)
        return ComparisonReport(k, big, checks)
    var_sources = []
    if k in (3, 4):
        var_sources.append((PAPER, variance_sigma_paper(k)))
    if k <= MECKE_MAX_K:
        var_sources.append((MECKE, mecke_central_moment(k, 2)))
    if 3 <= k <= RECURSION_MAX_K:
        var_sources.append((RECURSION, recursion_moments(k)[1]))
    for source, poly in var_sources:
        add("variance", source, poly(big), summary.variance, summary.standard_error_variance)
    if k == 3:
        add("m3", PAPER, third_central_moment_paper()(big), summary.central_moment_3, summary.standard_error_m3)
    if k <= MECKE_MAX_K:
        add("m3", MECKE, mecke_central_moment(k, 3)(big), summary.central_moment_3, summary.standard_error_m3)
    return ComparisonReport(k, big, checks)

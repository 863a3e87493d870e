"""Reproducible sampling of homogeneous Poisson point processes on intervals.

Every random stream is a Philox generator keyed through ``SeedSequence``
from ``(root_seed, stream domain, index)``.  Nothing depends on global
state or on how many workers run, so any trial can be regenerated from its
seed alone.

Two stream domains exist: per-trial streams used by the functions in this
module, and per-block streams used by the vectorized ensemble engine
(``BLOCK_TRIALS`` consecutive trials share one stream).  The two never
coincide, so sampling a trial here does not reproduce the positions the
ensemble engine drew for the same trial index.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import InvalidInterval
from .model import LensDecomposition, Scenario

TRIAL_STREAM = 0
BLOCK_STREAM = 1

_U64 = 2**64


def stream(root_seed: int, domain: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(root_seed), spawn_key=(int(domain), int(index)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SampleSeed:
    root_seed: int
    trial_index: int = 0

    def __post_init__(self):
        for name in ("root_seed", "trial_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    def generator(self) -> np.random.Generator:
        return stream(self.root_seed, TRIAL_STREAM, self.trial_index)


@dataclass(frozen=True)
class PointSample:
    positions: tuple[float, ...]
    interval: tuple[float, float]

    def __len__(self):
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    @classmethod
    def of(cls, positions: Iterable[float], interval: tuple[float, float]) -> "PointSample":
        return cls(tuple(sorted(float(x) for x in positions)), (float(interval[0]), float(interval[1])))


def draw_interval(rng: np.random.Generator, rate: float, lo: float, hi: float) -> PointSample:
    """Poisson count, then that many uniforms on ``[lo, hi]``, sorted."""
    if lo > hi:
        raise InvalidInterval(f"interval [{lo}, {hi}] has lo > hi")
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    n = int(rng.poisson(rate * (hi - lo)))
    x = lo + (hi - lo) * rng.random(n)
    np.clip(x, lo, hi, out=x)
    x.sort()
    return PointSample(tuple(x.tolist()), (float(lo), float(hi)))


def sample_ppp(rate: float, interval: tuple[float, float], seed: SampleSeed) -> PointSample:
    lo, hi = interval
    return draw_interval(seed.generator(), rate, lo, hi)


def sample_lenses(decomp: LensDecomposition, lam: float, seed: SampleSeed) -> list[PointSample]:
    """One independent PPP of density ``lam`` per lens, drawn from a single stream."""
    rng = seed.generator()
    return [draw_interval(rng, lam, lo, hi) for lo, hi in decomp.lenses]


def sample_road(scenario: Scenario, margin: float, seed: SampleSeed) -> PointSample:
    """Relays on ``[-margin, L + margin]``; source and destination are not included."""
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    return draw_interval(seed.generator(), scenario.lam, -margin, scenario.L + margin)


def write_points_csv(rows: Iterable[tuple[int, float]], out: TextIO) -> None:
    """Dump ``(trial, position)`` rows as CSV with 17 significant digits."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "position"])
    for trial, x in rows:
        w.writerow([int(trial), format(float(x), ".17g")])


def points_csv(samples: Iterable[tuple[int, PointSample]]) -> str:
    buf = io.StringIO()
    write_points_csv(((t, x) for t, s in samples for x in s.positions), buf)
    return buf.getvalue()

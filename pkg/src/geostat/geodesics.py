"""Counting geodesic (minimum-hop) paths between source and destination.

Two independent routes: a layered BFS over the whole road, and a chain
count over the lenses only.  For k = 3 there is also the window form, in
which lens 2 is cut at ``d_i + r0`` and a relay in window ``i`` links to
exactly ``i`` relays of lens 1.

All routes test links with the same float predicate ``b - a <= r0`` so they
agree bit for bit, not merely almost surely.
"""

from __future__ import annotations

import bisect
import csv
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

from .errors import WrongHopCount
from .model import LensDecomposition, Scenario
from .sampling import PointSample


@dataclass(frozen=True)
class GeodesicCount:
    """``shortest_hops_found`` is None when no path was found (unreachable).

    Lens-chain counting only looks at paths of exactly ``k_target`` hops, so
    there None means "no geodesic", not necessarily "disconnected".
    """

    k_target: int
    shortest_hops_found: int | None
    sigma: int

    def __post_init__(self):
        if self.sigma > 0 and self.shortest_hops_found != self.k_target:
            raise ValueError("sigma > 0 requires a path of exactly k_target hops")

    @property
    def reachable(self) -> bool:
        return self.shortest_hops_found is not None


def _first_true(lo: int, hi: int, pred: Callable[[int], bool]) -> int:
    """Smallest i in [lo, hi) with pred(i), for pred monotone False..True; hi if none."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _nodes(points: PointSample, L: float) -> tuple[list[float], int, int]:
    pos = list(points.positions)
    s = bisect.bisect_left(pos, 0.0)
    pos.insert(s, 0.0)
    d = bisect.bisect_right(pos, L)
    pos.insert(d, L)
    return pos, s, d


def count_bfs(points: PointSample, scenario: Scenario) -> GeodesicCount:
    """Shortest-path count on the unit-disk graph of relays plus source and destination.

    The set of nodes within ``h`` hops of the source is a contiguous run of
    sorted indices, and so is each node's neighbourhood, so every layer is
    at most two runs and predecessor counts come from prefix sums over those
    runs.  O(n log n).
    """
    r0 = scenario.r0
    k = scenario.hop_count
    pos, src, dst = _nodes(points, scenario.L)
    n = len(pos)

    def right_reach(i):
        return _first_true(i, n, lambda j: not (pos[j] - pos[i] <= r0)) - 1

    def left_reach(i):
        return _first_true(0, i + 1, lambda j: pos[i] - pos[j] <= r0)

    cnt = {src: 1}
    a = b = src
    prev_runs = [(src, src)]
    hops = 0
    while not a <= dst <= b:
        na, nb = left_reach(a), right_reach(b)
        runs = [r for r in ((na, a - 1), (b + 1, nb)) if r[0] <= r[1]]
        if not runs:
            return GeodesicCount(k, None, 0)
        hops += 1
        sums = []
        for lo, hi in prev_runs:
            acc = [0]
            for u in range(lo, hi + 1):
                acc.append(acc[-1] + cnt[u])
            sums.append(acc)
        layer = {}
        for lo, hi in runs:
            for v in range(lo, hi + 1):
                vl, vr = left_reach(v), right_reach(v)
                total = 0
                for (plo, phi), acc in zip(prev_runs, sums):
                    x, y = max(plo, vl), min(phi, vr)
                    if x <= y:
                        total += acc[y - plo + 1] - acc[x - plo]
                layer[v] = total
        cnt.update(layer)
        prev_runs = runs
        a, b = na, nb
    sigma = cnt[dst] if hops == k else 0
    return GeodesicCount(k, hops, sigma)


def count_bfs_naive(points: PointSample, scenario: Scenario) -> GeodesicCount:
    """Textbook BFS with explicit O(n^2) neighbour scans; reference for tests."""
    r0 = scenario.r0
    pos, src, dst = _nodes(points, scenario.L)
    n = len(pos)
    dist = [None] * n
    dist[src] = 0
    order = [src]
    q = deque([src])
    while q:
        u = q.popleft()
        for v in range(n):
            if dist[v] is None and abs(pos[v] - pos[u]) <= r0:
                dist[v] = dist[u] + 1
                order.append(v)
                q.append(v)
    k = scenario.hop_count
    if dist[dst] is None:
        return GeodesicCount(k, None, 0)
    cnt = [0] * n
    cnt[src] = 1
    for v in order[1:]:
        cnt[v] = sum(cnt[u] for u in range(n)
                     if dist[u] == dist[v] - 1 and abs(pos[v] - pos[u]) <= r0)
    hops = dist[dst]
    return GeodesicCount(k, hops, cnt[dst] if hops == k else 0)


def _in_lens(sample: Iterable[float], lo: float, hi: float) -> list[float]:
    return sorted(x for x in sample if lo <= x <= hi)


def count_lens_chains(lens_samples: Sequence[PointSample], decomp: LensDecomposition) -> GeodesicCount:
    """Number of relay tuples, one per lens, with every consecutive gap <= r0.

    Dynamic programme over lenses: a relay in lens i+1 inherits the summed
    chain counts of the lens-i relays it can hear, which form a suffix of
    the sorted lens-i positions.  Points outside their lens are ignored.
    """
    if len(lens_samples) != len(decomp.lenses):
        raise ValueError(f"expected {len(decomp.lenses)} lens samples, got {len(lens_samples)}")
    r0 = decomp.r0
    xs = _in_lens(lens_samples[0], *decomp.lenses[0])
    weights = [1] * len(xs)
    for sample, (lo, hi) in zip(lens_samples[1:], decomp.lenses[1:]):
        ys = _in_lens(sample, lo, hi)
        suffix = [0] * (len(xs) + 1)
        for j in range(len(xs) - 1, -1, -1):
            suffix[j] = suffix[j + 1] + weights[j]
        weights = [suffix[_first_true(0, len(xs), lambda j: y - xs[j] <= r0)] for y in ys]
        xs = ys
    sigma = sum(weights)
    return GeodesicCount(decomp.k, decomp.k if sigma else None, sigma)


def split_into_lenses(points: PointSample, decomp: LensDecomposition) -> list[PointSample]:
    """Restrict a road sample to each lens (closed intervals)."""
    return [PointSample(tuple(_in_lens(points, lo, hi)), (lo, hi)) for lo, hi in decomp.lenses]


@dataclass(frozen=True)
class WindowDecomposition:
    """Lens-2 windows induced by the lens-1 relays (k = 3 only).

    ``d`` holds the lens-1 relay positions in descending order.  ``edges``
    runs from the top of lens 2 (``2 r0``) down through ``d_i + r0`` to the
    bottom of lens 2 (``L - r0``); window ``i`` is ``[edges[i+1], edges[i]]``
    and ``w[i]`` its width.
    """

    d: tuple[float, ...]
    w: tuple[float, ...]
    edges: tuple[float, ...]

    def window_of(self, y: float) -> int:
        # number of d_i + r0 edges lying at or above y
        inner = self.edges[1:-1]
        return _first_true(0, len(inner), lambda j: not (y <= inner[j]))

    def occupancy(self, lens2: Iterable[float]) -> list[int]:
        n = [0] * len(self.w)
        lo, hi = self.edges[-1], self.edges[0]
        for y in lens2:
            if lo <= y <= hi:
                n[self.window_of(y)] += 1
        return n

    def sigma(self, lens2: Iterable[float]) -> int:
        """sum_i i * n_i."""
        return sum(i * n for i, n in enumerate(self.occupancy(lens2)))


def window_decomposition(lens1: PointSample, decomp: LensDecomposition) -> WindowDecomposition:
    if decomp.k != 3:
        raise WrongHopCount(f"window decomposition needs k = 3, got k = {decomp.k}")
    r0, L = decomp.r0, decomp.L
    top, bottom = 2 * r0, L - r0
    lo, hi = decomp.lenses[0]
    d = tuple(sorted(_in_lens(lens1, lo, hi), reverse=True))
    edges = (top, *(min(top, max(bottom, x + r0)) for x in d), bottom)
    w = tuple(max(0.0, edges[i] - edges[i + 1]) for i in range(len(edges) - 1))
    return WindowDecomposition(d, w, edges)


def write_counts_csv(rows: Iterable[tuple[int, GeodesicCount]], out: TextIO) -> None:
    """Per-trial dump: ``trial,k_target,shortest_hops,sigma`` (empty hops = unreachable)."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "k_target", "shortest_hops", "sigma"])
    for trial, g in rows:
        hops = "" if g.shortest_hops_found is None else g.shortest_hops_found
        w.writerow([int(trial), g.k_target, hops, g.sigma])

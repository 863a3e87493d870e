import io
import math

import pytest
from hypothesis import assume, given, strategies as st

from geostat.errors import WrongHopCount
from geostat.geodesics import (
    GeodesicCount,
    count_bfs,
    count_bfs_naive,
    count_lens_chains,
    split_into_lenses,
    window_decomposition,
    write_counts_csv,
)
from geostat.model import Scenario, lens_decomposition
from geostat.sampling import PointSample, SampleSeed, sample_road

SC3 = Scenario(20, 1, 2.5)


def road(points, sc=SC3):
    return PointSample.of(points, (0, sc.L))


def lens_samples(*groups):
    return [PointSample.of(g, (0, 0)) for g in groups]


def brute_force_paths(points, sc):
    """Enumerate every increasing k-hop relay sequence; the oracle for small cases."""
    k = sc.hop_count
    pts = sorted(points)

    def extend(last, hops_left):
        if hops_left == 1:
            return 1 if sc.L - last <= sc.r0 else 0
        return sum(extend(x, hops_left - 1) for x in pts if last < x and x - last <= sc.r0)

    return extend(0.0, k)


def test_spec_example_two_paths():
    g = count_bfs(road([0.7, 0.9, 1.6]), SC3)
    assert (g.shortest_hops_found, g.sigma) == (3, 2)
    assert count_bfs_naive(road([0.7, 0.9, 1.6]), SC3) == g


def test_spec_example_unreachable():
    g = count_bfs(road([0.6, 1.7]), SC3)
    assert g.shortest_hops_found is None and g.sigma == 0 and not g.reachable
    g = count_bfs(road([]), SC3)
    assert g.shortest_hops_found is None and g.sigma == 0


def test_direct_connection():
    sc = Scenario(5, 2, 1)
    g = count_bfs(road([0.2, 0.5], sc), sc)
    assert (g.k_target, g.shortest_hops_found, g.sigma) == (1, 1, 1)


def test_longer_path_only_gives_zero():
    # 0.3 -> 1.2 -> 2.1 -> 2.5 takes four hops; no three-hop path exists
    g = count_bfs(road([0.3, 1.2, 2.1]), SC3)
    assert g.shortest_hops_found == 4 and g.sigma == 0


def test_closed_ball_link():
    sc = Scenario(1, 1, 2)
    g = count_bfs(road([1.0], sc), sc)
    assert g.sigma == 1


def test_geodesic_count_invariant():
    with pytest.raises(ValueError):
        GeodesicCount(3, 4, 1)
    with pytest.raises(ValueError):
        GeodesicCount(3, None, 2)


def test_lens_chain_examples():
    d = lens_decomposition(SC3)
    assert count_lens_chains(lens_samples([0.7, 0.9], [1.6]), d).sigma == 2
    assert count_lens_chains(lens_samples([0.55], [1.9]), d).sigma == 0
    assert count_lens_chains(lens_samples([], [1.6]), d).sigma == 0
    assert count_lens_chains(lens_samples([0.7], []), d).sigma == 0
    # points outside their lens are ignored
    assert count_lens_chains(lens_samples([0.2, 0.7], [1.6, 2.2]), d).sigma == 1
    with pytest.raises(ValueError):
        count_lens_chains(lens_samples([0.7]), d)


def test_lens_boundaries_are_closed():
    d = lens_decomposition(SC3)
    assert count_lens_chains(lens_samples([0.5, 1.0], [1.5, 2.0]), d).sigma == 3


def test_window_example():
    d = lens_decomposition(SC3)
    w = window_decomposition(PointSample.of([0.7, 0.9], (0.5, 1)), d)
    assert w.d == (0.9, 0.7)
    assert w.w == pytest.approx((0.1, 0.2, 0.2))
    assert sum(w.w) == pytest.approx(0.5)
    assert w.sigma([1.6]) == 2
    assert w.occupancy([1.95, 1.8, 1.6, 1.55]) == [1, 1, 2]


def test_window_empty_lens():
    d = lens_decomposition(SC3)
    w = window_decomposition(PointSample.of([], (0.5, 1)), d)
    assert w.w == (0.5,)
    assert w.sigma([1.6, 1.7]) == 0


def test_window_needs_k3():
    with pytest.raises(WrongHopCount):
        window_decomposition(PointSample.of([], (0, 1)), lens_decomposition(Scenario(20, 1, 3.5)))


def test_counts_csv():
    buf = io.StringIO()
    write_counts_csv([(0, GeodesicCount(3, 3, 2)), (1, GeodesicCount(3, None, 0))], buf)
    assert buf.getvalue() == "trial,k_target,shortest_hops,sigma\n0,3,3,2\n1,3,,0\n"


coords = st.floats(-0.5, 5.0, allow_nan=False, width=32)
scenarios = st.builds(
    lambda r0, ratio: Scenario(1.0, r0, r0 * ratio),
    st.sampled_from([0.5, 1.0, 1.3]),
    st.floats(0.5, 4.6),
)


@given(scenarios, st.lists(coords, max_size=30))
def test_fast_bfs_matches_naive(sc, pts):
    sample = PointSample.of(pts, (-0.5, 5))
    fast, slow = count_bfs(sample, sc), count_bfs_naive(sample, sc)
    assert fast == slow


@given(scenarios, st.lists(st.floats(0, 6, width=32), max_size=12))
def test_bfs_matches_brute_force(sc, pts):
    assume(sc.hop_count <= 5)
    g = count_bfs(PointSample.of(pts, (0, sc.L)), sc)
    assert g.sigma == brute_force_paths(pts, sc)


@given(scenarios, st.lists(coords, max_size=30))
def test_never_shorter_than_k(sc, pts):
    g = count_bfs(PointSample.of(pts, (-0.5, 5)), sc)
    assert g.shortest_hops_found is None or g.shortest_hops_found >= g.k_target


@given(scenarios, st.lists(coords, max_size=25), coords)
def test_adding_a_relay_never_lowers_sigma(sc, pts, extra):
    before = count_bfs(PointSample.of(pts, (-0.5, 5)), sc)
    after = count_bfs(PointSample.of(pts + [extra], (-0.5, 5)), sc)
    if after.shortest_hops_found == sc.hop_count:
        assert after.sigma >= before.sigma


@given(scenarios, st.lists(st.floats(0, 5, width=32), max_size=40))
def test_lens_chains_match_bfs(sc, pts):
    assume(sc.hop_count >= 2 and not sc.degenerate)
    d = lens_decomposition(sc)
    sample = PointSample.of([x for x in pts if x <= sc.L], (0, sc.L))
    assert count_lens_chains(split_into_lenses(sample, d), d).sigma == count_bfs(sample, sc).sigma


@given(st.floats(2.05, 2.95), st.lists(st.floats(0, 3, width=32), max_size=40))
def test_window_formula_matches(L, pts):
    sc = Scenario(1.0, 1.0, L)
    d = lens_decomposition(sc)
    sample = PointSample.of([x for x in pts if x <= L], (0, L))
    lenses = split_into_lenses(sample, d)
    w = window_decomposition(lenses[0], d)
    assert sum(w.w) == pytest.approx(3 - L, abs=1e-12)
    assert all(x >= 0 for x in w.w)
    assert w.sigma(lenses[1]) == count_lens_chains(lenses, d).sigma


@pytest.mark.parametrize("k,big", [(3, 2.0), (4, 5.0), (5, 1.0), (6, 0.5)])
def test_random_realisations_agree(k, big):
    sc = Scenario(10.0, 1.0, k - big / 10.0)
    d = lens_decomposition(sc)
    for t in range(300):
        s = sample_road(sc, 0.3, SampleSeed(k, t))
        g = count_bfs(s, sc)
        assert g == count_bfs_naive(s, sc) if t < 30 else True
        assert g.sigma == count_lens_chains(split_into_lenses(s, d), d).sigma


def test_grid_counts_match_multiset_formula():
    # dyadic positions are exact floats; lens i holds 0.5 + i + j/64, j < 32.
    # Chains are non-increasing j sequences of length 5: C(32 + 5 - 1, 5).
    sc = Scenario(1, 1, 5.5)
    d = lens_decomposition(sc)
    pts = PointSample.of([0.5 + i + j / 64 for i in range(5) for j in range(32)], (0, 5.5))
    g = count_bfs(pts, sc)
    assert g.sigma == math.comb(36, 5)
    assert count_lens_chains(split_into_lenses(pts, d), d).sigma == g.sigma

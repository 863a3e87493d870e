import math

import pytest
from hypothesis import given, strategies as st

from geostat.errors import DegenerateScenario, DirectConnection, InvalidScenario
from geostat.model import Scenario, derive_hop_count, lens_decomposition


@pytest.mark.parametrize("lam,r0,L,k", [(20, 1, 2.5, 3), (20, 1, 3.5, 4), (5, 2, 1, 1), (1, 1, 1, 1), (1, 1, 3, 3)])
def test_hop_count(lam, r0, L, k):
    assert derive_hop_count(Scenario(lam, r0, L)) == k


def test_hop_count_is_exact_for_decimal_inputs():
    # as binary floats 0.9 / 0.3 exceeds 3; the written decimals are an exact multiple
    sc = Scenario(1, 0.3, 0.9)
    assert sc.hop_count == 3 and sc.degenerate and sc.big_lambda == 0
    assert Scenario(100, 0.3, 1).hop_count == 4
    assert Scenario(100, 0.3, 1).big_lambda == 20.0


def test_lenses_k3():
    d = lens_decomposition(Scenario(20, 1, 2.5))
    assert d.k == 3
    assert d.lenses == ((0.5, 1.0), (1.5, 2.0))
    assert d.width == 0.5
    assert d.big_lambda == 10


def test_lenses_worked_example():
    d = lens_decomposition(Scenario(100, 0.3, 1))
    assert d.k == 4
    assert len(d.lenses) == 3
    assert d.width == 0.2
    assert d.big_lambda == 20
    assert d.lenses == ((0.1, 0.3), (0.4, 0.6), (0.7, 0.9))


def test_single_lens_for_two_hops():
    d = lens_decomposition(Scenario(3, 1, 1.4))
    assert d.lenses == ((0.4, 1.0),)
    assert d.big_lambda == pytest.approx(3 * 0.6)


def test_degenerate_and_direct():
    with pytest.raises(DegenerateScenario):
        lens_decomposition(Scenario(1, 1, 3))
    with pytest.raises(DirectConnection):
        lens_decomposition(Scenario(5, 2, 1))
    sc = Scenario(1, 1, 3)
    assert sc.degenerate and sc.big_lambda == 0


@pytest.mark.parametrize("bad", [(-1, 1, 1), (1, 0, 1), (1, 1, 0), (1, math.inf, 1), (1, 1, math.nan), ("1", 1, 1)])
def test_invalid(bad):
    with pytest.raises(InvalidScenario):
        Scenario(*bad)


def test_zero_density_allowed():
    sc = Scenario(0, 1, 2.5)
    assert sc.big_lambda == 0 and not sc.degenerate


def test_json_round_trip():
    sc = Scenario(20, 1, 2.5)
    assert sc.to_json() == {"lambda": 20.0, "r0": 1.0, "L": 2.5}
    assert Scenario.from_json(sc.to_json()) == sc
    with pytest.raises(InvalidScenario):
        Scenario.from_json({"lambda": 1, "r0": 1})


pos = st.floats(0.05, 20, allow_nan=False)


@given(lam=pos, r0=pos, ratio=st.floats(1.01, 9.99), c=st.sampled_from([0.5, 2.0, 4.0, 0.25]))
def test_scale_covariance(lam, r0, ratio, c):
    sc = Scenario(lam, r0, r0 * ratio)
    if sc.degenerate:
        return
    scaled = sc.scaled(c)  # powers of two scale floats exactly
    assert scaled.hop_count == sc.hop_count
    assert scaled.big_lambda == pytest.approx(sc.big_lambda, rel=1e-12)


@given(r0=pos, ratio=st.floats(2.01, 9.99))
def test_lens_structure(r0, ratio):
    sc = Scenario(1.0, r0, r0 * ratio)
    if sc.degenerate:
        return
    d = lens_decomposition(sc)
    assert len(d.lenses) == d.k - 1
    for i, (lo, hi) in enumerate(d.lenses, start=1):
        assert hi - lo == pytest.approx(d.width, abs=1e-9 * r0)
        assert hi == pytest.approx(i * r0)
        assert lo == pytest.approx(sc.L - (d.k - i) * r0)
    for (_, hi), (lo, _) in zip(d.lenses, d.lenses[1:]):
        assert hi < lo
    assert d.lenses[0][0] > 0 and d.lenses[-1][1] < sc.L


@given(r0=pos, ratio=st.floats(0.1, 9.99))
def test_positive_lambda_iff_strictly_between(r0, ratio):
    sc = Scenario(2.0, r0, r0 * ratio)
    k = sc.hop_count
    inside = (k - 1) * r0 < sc.L < k * r0
    if k > 1:
        assert (sc.big_lambda > 0) == (inside and not sc.degenerate)


def test_chain_scenario():
    ch = lens_decomposition(Scenario(20, 1, 3.5)).chain()
    assert (ch.k, ch.big_lambda, ch.normalized, ch.n_lenses) == (4, 10, True, 3)

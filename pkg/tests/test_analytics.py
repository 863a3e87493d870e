import math
from fractions import Fraction

import pytest

from geostat.analytics import (
    RebroadcastQuery,
    compare_variance,
    mean_sigma,
    mecke_central_moment,
    mecke_moment,
    mecke_term_count,
    rebroadcast_probability,
    recursion_moments,
    recursion_state,
    set_partitions,
    third_central_moment_paper,
    variance_sigma_paper,
)
from geostat.errors import DegenerateScenario, TermBudgetExceeded, UnsupportedK
from geostat.model import Scenario
from geostat.polynomial import MomentPolynomial as MP

F = Fraction


def test_mean_closed_form():
    assert mean_sigma(1) == MP.constant(1)
    assert mean_sigma(2) == MP.monomial(1)
    assert mean_sigma(3) == MP({2: F(1, 2)})
    assert mean_sigma(4)(20) == F(4000, 3)
    with pytest.raises(ValueError):
        mean_sigma(0)


def test_published_values_verbatim():
    assert variance_sigma_paper(3) == MP({3: F(2, 3), 2: F(1, 2)})
    assert variance_sigma_paper(4) == MP({5: F(1, 10), 4: F(1, 4), 3: F(1, 6)})
    assert variance_sigma_paper(3)(0) == 0
    assert third_central_moment_paper() == MP({5: F(-5, 6), 4: F(-1, 5)})
    assert third_central_moment_paper()(0) == 0
    with pytest.raises(UnsupportedK):
        variance_sigma_paper(5)


def test_bell_numbers():
    assert [len(set_partitions(m)) for m in range(1, 5)] == [1, 2, 5, 15]
    assert mecke_term_count(7, 4) == 15**6


@pytest.mark.parametrize("k", range(2, 8))
def test_mecke_mean(k):
    assert mecke_moment(k, 1) == mean_sigma(k)


def test_mecke_second_moments():
    assert mecke_moment(2, 2) == MP({2: 1, 1: 1})
    assert mecke_moment(3, 2) == MP({4: F(1, 4), 3: F(2, 3), 2: F(1, 2)})
    assert mecke_central_moment(3, 2) == variance_sigma_paper(3)
    assert mecke_central_moment(4, 1) == MP()


@pytest.mark.parametrize("m,touchard", [(3, {3: 1, 2: 3, 1: 1}), (4, {4: 1, 3: 6, 2: 7, 1: 1})])
def test_single_lens_is_poisson(m, touchard):
    assert mecke_moment(2, m) == MP(touchard)


def test_k4_variance_structure():
    v = mecke_central_moment(4, 2)
    assert v.degree == 5
    assert v.coefficient(4) == F(1, 4) and v.coefficient(3) == F(1, 6)
    # the leading term the simulation supports; the published value is 1/10
    assert v.coefficient(5) == F(2, 15)


def test_k3_third_central_moment():
    assert mecke_central_moment(3, 3) == MP({4: F(7, 4), 3: 2, 2: F(1, 2)})


def test_budget():
    with pytest.raises(TermBudgetExceeded):
        mecke_moment(7, 4)
    with pytest.raises(TermBudgetExceeded):
        mecke_moment(8, 1)
    with pytest.raises(TermBudgetExceeded):
        mecke_moment(3, 5)
    with pytest.raises(TermBudgetExceeded):
        mecke_moment(3, 2, max_terms=3)


def test_recursion_k3():
    mean, var = recursion_moments(3)
    assert mean == mean_sigma(3)
    assert var == variance_sigma_paper(3)


@pytest.mark.parametrize("k", range(3, 9))
def test_recursion_mean(k):
    assert recursion_moments(k)[0] == mean_sigma(k)


@pytest.mark.parametrize("k", range(3, 8))
def test_engines_agree_on_variance(k):
    assert recursion_moments(k)[1] == mecke_central_moment(k, 2)


def test_recursion_limits():
    with pytest.raises(UnsupportedK):
        recursion_moments(2)
    with pytest.raises(UnsupportedK):
        recursion_state(9)
    assert recursion_state(2).stage == 2


def test_variance_comparison_report():
    c4 = compare_variance(4)
    assert c4.engines_agree and c4.paper_agrees is False
    assert c4.differing_powers() == [5]
    c3 = compare_variance(3)
    assert c3.engines_agree and c3.paper_agrees
    assert compare_variance(5).paper is None and compare_variance(5).paper_agrees is None


@pytest.mark.parametrize("poly", [
    lambda: mecke_central_moment(3, 2), lambda: mecke_central_moment(4, 2),
    lambda: recursion_moments(5)[1], lambda: recursion_moments(8)[1],
])
def test_variances_non_negative(poly):
    p = poly()
    assert all(p(F(i, 10)) >= 0 for i in range(501))


# re-broadcast

WORKED = Scenario(100, 0.3, 1)


def test_rebroadcast_worked_example():
    r = rebroadcast_probability(RebroadcastQuery(10, WORKED))
    assert abs(r.nu - 0.1957) <= 0.0005
    assert r.k == 4 and r.big_lambda == 20 and not r.clamped
    assert r.implied_target == pytest.approx(10, rel=1e-12)


def test_rebroadcast_target_60():
    nu = rebroadcast_probability(RebroadcastQuery(60, WORKED)).nu
    assert nu == pytest.approx(360 ** (1 / 3) / 20, rel=1e-12)
    # independent check: bisection on the thinned mean
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if (mid * 20) ** 3 / 6 < 60 else (lo, mid)
    assert nu == pytest.approx(lo, abs=1e-12)


def test_rebroadcast_no_thinning_needed():
    full = float(mean_sigma(4)(20))
    assert rebroadcast_probability(RebroadcastQuery(full, WORKED)).nu == pytest.approx(1.0, rel=1e-12)
    r = rebroadcast_probability(RebroadcastQuery(10 * full, WORKED))
    assert r.nu == 1.0 and r.clamped and r.raw_nu > 1


@pytest.mark.parametrize("target", [0.5, 3.0, 77.0, 1234.5])
@pytest.mark.parametrize("L", [2.5, 3.5, 4.25, 1.5])
def test_thinning_round_trip(target, L):
    sc = Scenario(20, 1, L)
    r = rebroadcast_probability(RebroadcastQuery(target, sc))
    if not r.clamped:
        back = float(mean_sigma(sc.hop_count)(r.nu * sc.big_lambda))
        assert math.isclose(back, target, rel_tol=1e-12)


def test_rebroadcast_errors():
    with pytest.raises(ValueError):
        RebroadcastQuery(0, WORKED)
    with pytest.raises(DegenerateScenario):
        rebroadcast_probability(RebroadcastQuery(1, Scenario(1, 1, 3)))
    with pytest.raises(ValueError):
        rebroadcast_probability(RebroadcastQuery(1, Scenario(1, 1, 0.5)))

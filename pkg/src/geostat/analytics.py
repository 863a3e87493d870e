"""Closed forms and exact symbolic moment engines for the geodesic count.

Three independent sources of moments live here:

* the published closed forms (``mean_sigma`` and the ``*_paper`` values,
  reproduced exactly as printed, misprints included);
* ``recursion_moments``: the cell-discretisation recursion carried out in
  the continuum limit, with sums over cells replaced by integrals of
  polynomial profiles;
* ``mecke_moment``: E[sigma^m] from the chain representation.  Raising the
  count to the m-th power and sorting the m copies by which relays they
  share in each lens turns every term into Lambda^(#distinct relays) times
  the volume of an order polytope, which is a linear-extension count.

Everything is exact rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DegenerateScenario, TermBudgetExceeded, UnsupportedK
from .model import Scenario
from .polynomial import MomentPolynomial, Poly
from .poset import Poset, order_volume

MECKE_MAX_ORDER = 4
MECKE_MAX_K = 7
RECURSION_MAX_K = 8
# about a minute of pure-Python work; (k=7, m=4) needs 15^6 terms and is refused
MECKE_MAX_TERMS = 10**6

PAPER = "paper-as-printed"
ORACLE = "oracle"


def mean_sigma(k: int) -> MomentPolynomial:
    """Lambda^(k-1) / (k-1)!."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return MomentPolynomial.monomial(k - 1, Fraction(1, math.factorial(k - 1)))


def variance_sigma_paper(k: int) -> MomentPolynomial:
    """Published variance for k = 3 and k = 4, verbatim."""
    if k == 3:
        return MomentPolynomial({3: Fraction(2, 3), 2: Fraction(1, 2)})
    if k == 4:
        return MomentPolynomial({5: Fraction(6, 60), 4: Fraction(15, 60), 3: Fraction(10, 60)})
    raise UnsupportedK(f"no published variance for k = {k}")


def third_central_moment_paper() -> MomentPolynomial:
    """Published third central moment for k = 3, verbatim.

    Not trusted: the oracle engines disagree with it (see
    ``mecke_central_moment(3, 3)``).
    """
    return MomentPolynomial({5: Fraction(-5, 6), 4: Fraction(-1, 5)})


# ---------------------------------------------------------------------------
# Mecke expansion over the chain representation


@lru_cache(maxsize=None)
def set_partitions(m: int) -> tuple[tuple[int, ...], ...]:
    """All set partitions of m labelled copies as restricted growth strings."""
    out = []

    def grow(prefix, nblocks):
        if len(prefix) == m:
            out.append(tuple(prefix))
            return
        for b in range(nblocks + 1):
            grow(prefix + [b], max(nblocks, b + 1))

    grow([], 0)
    return tuple(out)


def _mecke_term_volume(parts: tuple[tuple[int, ...], ...]) -> Fraction:
    """Order-region volume for one choice of per-lens partitions.

    One variable per (lens, block).  Copy c contributes the chain
    ``x[0, block_0(c)] >= x[1, block_1(c)] >= ...``.
    """
    offsets = []
    n = 0
    for rgs in parts:
        offsets.append(n)
        n += max(rgs) + 1
    edges = set()
    for i in range(len(parts) - 1):
        for c in range(len(parts[i])):
            upper = offsets[i] + parts[i][c]
            lower = offsets[i + 1] + parts[i + 1][c]
            edges.add((lower, upper))
    # lens-to-lens edges always point forward, so the poset is acyclic and
    # its width is at most m; the downset DP stays small past 20 elements
    return order_volume(Poset(n, edges), max_size=None)


def mecke_term_count(k: int, m: int) -> int:
    return len(set_partitions(m)) ** (k - 1)


@lru_cache(maxsize=None)
def mecke_moment(k: int, m: int, max_terms: int = MECKE_MAX_TERMS) -> MomentPolynomial:
    """Exact raw moment E[sigma_k^m] as a polynomial in Lambda.

    Sums Bell(m)^(k-1) terms; refuses when that exceeds ``max_terms``.
    """
    if m < 1 or k < 2 or m > MECKE_MAX_ORDER or k > MECKE_MAX_K:
        raise TermBudgetExceeded(
            f"(k={k}, m={m}) outside the supported range 2 <= k <= {MECKE_MAX_K}, 1 <= m <= {MECKE_MAX_ORDER}"
        )
    if mecke_term_count(k, m) > max_terms:
        raise TermBudgetExceeded(f"(k={k}, m={m}) needs {mecke_term_count(k, m)} terms, budget is {max_terms}")
    coeffs: dict[int, Fraction] = {}
    for parts in itertools.product(set_partitions(m), repeat=k - 1):
        power = sum(max(rgs) + 1 for rgs in parts)
        coeffs[power] = coeffs.get(power, Fraction(0)) + _mecke_term_volume(parts)
    return MomentPolynomial(coeffs)


@lru_cache(maxsize=None)
def mecke_central_moment(k: int, order: int, max_terms: int = MECKE_MAX_TERMS) -> MomentPolynomial:
    """E[(sigma_k - E sigma_k)^order] by binomial recombination of raw moments."""
    mu = mecke_moment(k, 1)
    out = MomentPolynomial()
    for j in range(order + 1):
        raw = MomentPolynomial.constant(1) if j == 0 else mecke_moment(k, j, max_terms)
        out = out + math.comb(order, j) * raw * (-mu) ** (order - j)
    return out


# ---------------------------------------------------------------------------
# Discretisation recursion in the continuum limit

_NV = 5
_LAM, _X, _Y, _P, _R = range(_NV)


def _v(i: int, power: int = 1) -> Poly:
    return Poly.var(_NV, i, power)


_ZERO = Poly.const(_NV, 0)
_ONE = Poly.const(_NV, 1)


@dataclass(frozen=True)
class RecursionState:
    """Moment profiles of the partial sum tau^(n) up to normalized position.

    ``mean_profile`` and ``variance_profile`` are polynomials in (Lambda, x);
    ``covariance_profile`` is Cov(tau(x), tau(y)) for x <= y, a polynomial
    in (Lambda, x, y).  Evaluating at x = 1 gives the stage-n moments.
    """

    stage: int
    mean_profile: Poly
    variance_profile: Poly
    covariance_profile: Poly

    def mean(self) -> MomentPolynomial:
        return self.mean_profile.substitute(_X, _ONE).to_moment()

    def variance(self) -> MomentPolynomial:
        return self.variance_profile.substitute(_X, _ONE).to_moment()


def poisson_stage() -> RecursionState:
    """Running sum of the first-lens cell counts: a Poisson process in x."""
    lam_x = _v(_LAM) * _v(_X)
    return RecursionState(2, lam_x, lam_x, lam_x)


def advance(state: RecursionState) -> RecursionState:
    """One more lens: T_q = Y_q * tau_q with Y_q ~ Poisson(Lambda / l).

    Per cell, Var(T_q) = (Lambda/l) (Var tau_q + E[tau_q]^2) + O(l^-2) and,
    for p < r, Cov(T_p, T_r) = (Lambda/l)^2 Cov(tau_p, tau_r).  Summing
    over cells and letting l -> infinity gives integrals of the profiles.
    """
    lam = _v(_LAM)
    M, V, C = state.mean_profile, state.variance_profile, state.covariance_profile
    x, y = _v(_X), _v(_Y)

    mean = lam * M.integrate(_X, _ZERO, x)

    diag = lam * (V + M * M).integrate(_X, _ZERO, x)
    c_pr = C.substitute(_X, _v(_P)).substitute(_Y, _v(_R))
    below = c_pr.integrate(_P, _ZERO, _v(_R)).integrate(_R, _ZERO, x)
    var = diag + 2 * lam * lam * below

    # Cov(tau(x), tau(y)) = Var tau(x) + sum_{p <= x < r <= y} Cov(T_p, T_r)
    cross = c_pr.integrate(_R, x, y).integrate(_P, _ZERO, x)
    cov = var + lam * lam * cross
    return RecursionState(state.stage + 1, mean, var, cov)


def recursion_state(k: int) -> RecursionState:
    if not 2 <= k <= RECURSION_MAX_K:
        raise UnsupportedK(f"recursion supports 2 <= k <= {RECURSION_MAX_K}, got {k}")
    state = poisson_stage()
    while state.stage < k:
        state = advance(state)
    return state


@lru_cache(maxsize=None)
def recursion_moments(k: int) -> tuple[MomentPolynomial, MomentPolynomial]:
    """(mean, variance) of sigma_k from the recursion, for 3 <= k <= 8."""
    if k < 3:
        raise UnsupportedK(f"the recursion starts at k = 3, got {k}")
    state = recursion_state(k)
    return state.mean(), state.variance()


@dataclass(frozen=True)
class VarianceComparison:
    k: int
    paper: MomentPolynomial | None
    recursion: MomentPolynomial
    mecke: MomentPolynomial

    @property
    def engines_agree(self) -> bool:
        return self.recursion == self.mecke

    @property
    def paper_agrees(self) -> bool | None:
        return None if self.paper is None else self.paper == self.mecke

    def differing_powers(self) -> list[int]:
        if self.paper is None:
            return []
        powers = set(self.paper.coefficients) | set(self.mecke.coefficients)
        return sorted(p for p in powers if self.paper.coefficient(p) != self.mecke.coefficient(p))


def compare_variance(k: int) -> VarianceComparison:
    paper = variance_sigma_paper(k) if k in (3, 4) else None
    return VarianceComparison(k, paper, recursion_moments(k)[1], mecke_central_moment(k, 2))


# ---------------------------------------------------------------------------
# Re-broadcast probability


@dataclass(frozen=True)
class RebroadcastQuery:
    target_paths: float
    scenario: Scenario

    def __post_init__(self):
        if not self.target_paths > 0:
            raise ValueError(f"target number of paths must be > 0, got {self.target_paths}")


@dataclass(frozen=True)
class RebroadcastResult:
    nu: float
    raw_nu: float
    clamped: bool
    implied_target: float
    k: int
    big_lambda: float


def rebroadcast_probability(query: RebroadcastQuery) -> RebroadcastResult:
    """Thinning probability that brings E[sigma_k] down to the target.

    Thinning the relays by nu scales Lambda to nu * Lambda, so nu solves
    (nu Lambda)^(k-1) / (k-1)! = target; capped at 1.
    """
    sc = query.scenario
    k = sc.hop_count
    if sc.degenerate:
        raise DegenerateScenario(f"L={sc.L} is an exact multiple of r0={sc.r0}")
    if k < 2:
        raise ValueError("re-broadcasting is pointless when source reaches destination directly (k = 1)")
    big = sc.big_lambda
    if big <= 0:
        raise DegenerateScenario("Lambda = 0: no relays to thin")
    raw = (query.target_paths * math.factorial(k - 1)) ** (1.0 / (k - 1)) / big
    nu = min(1.0, raw)
    implied = mean_sigma(k)(nu * big)
    return RebroadcastResult(nu, raw, raw > 1.0, implied, k, big)

"""Scenario geometry: hop count, lenses and the normalized chain picture.

A scenario places the source at 0 and the destination at ``L`` on a road
where relays form a Poisson process of density ``lambda``.  Two nodes are
linked when their distance is at most ``r0`` (closed ball).

Hop count and lens width are computed in exact rational arithmetic.  L is
an exact multiple of r0 when it is one either as written in decimal
(0.9 and 0.3) or as binary floats (``L = 3.0 * r0`` computed in code);
otherwise the decimal values decide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateScenario, DirectConnection, InvalidScenario


def exact(x: float) -> Fraction:
    """The decimal a float was written as: 0.3 is 3/10, not its binary neighbour."""
    return Fraction(repr(float(x)))


def _geometry(lam: float, r0: float, L: float) -> tuple[int, bool, Fraction]:
    """(k, degenerate, k r0 - L) in exact arithmetic."""
    for q in (Fraction(L) / Fraction(r0), exact(L) / exact(r0)):
        if q.denominator == 1:
            return max(1, q.numerator), q.numerator >= 1, Fraction(0) if q >= 1 else exact(r0) - exact(L)
    k = max(1, math.ceil(exact(L) / exact(r0)))
    return k, False, k * exact(r0) - exact(L)


@dataclass(frozen=True)
class Scenario:
    """Road geometry.  ``lam = 0`` is accepted and means an empty road."""

    lam: float
    r0: float
    L: float

    def __post_init__(self):
        for name, value in (("lambda", self.lam), ("r0", self.r0), ("L", self.L)):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidScenario(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or value < 0 or (value == 0 and name != "lambda"):
                bound = ">= 0" if name == "lambda" else "> 0"
                raise InvalidScenario(f"{name} must be finite and {bound}, got {value!r}")
        # normalise ints so that equality/hash/JSON are type-stable
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "L", float(self.L))

    @property
    def hop_count(self) -> int:
        return derive_hop_count(self)

    @property
    def lens_width(self) -> float:
        """kr0 - L; zero when L is an exact multiple of r0, r0 - L for k = 1."""
        return float(_geometry(self.lam, self.r0, self.L)[2])

    @property
    def big_lambda(self) -> float:
        return float(exact(self.lam) * _geometry(self.lam, self.r0, self.L)[2])

    @property
    def degenerate(self) -> bool:
        return _geometry(self.lam, self.r0, self.L)[1]

    def to_json(self) -> dict:
        return {"lambda": self.lam, "r0": self.r0, "L": self.L}

    @classmethod
    def from_json(cls, obj: dict) -> "Scenario":
        try:
            return cls(obj["lambda"], obj["r0"], obj["L"])
        except KeyError as exc:
            raise InvalidScenario(f"scenario JSON is missing field {exc}") from None

    def scaled(self, c: float) -> "Scenario":
        """Same scenario in units multiplied by ``c`` (density divided by ``c``)."""
        return Scenario(self.lam / c, self.r0 * c, self.L * c)


@dataclass(frozen=True)
class LensDecomposition:
    k: int
    lenses: tuple[tuple[float, float], ...]
    width: float
    big_lambda: float
    r0: float
    L: float

    def lens_of(self, x: float) -> int | None:
        """0-based index of the lens containing ``x`` (closed), or None."""
        for i, (lo, hi) in enumerate(self.lenses):
            if lo <= x <= hi:
                return i
        return None

    def normalize(self, i: int, x: float) -> float:
        lo, _ = self.lenses[i]
        return (x - lo) / self.width

    def chain(self) -> "ChainScenario":
        return ChainScenario(self.k, self.big_lambda)


@dataclass(frozen=True)
class ChainScenario:
    """Lens coordinates mapped to [0, 1].

    With ``u_i = (d_i - lo_i) / W`` a choice of one relay per lens is a
    k-hop path exactly when ``u_1 >= u_2 >= ... >= u_{k-1}``.  Only ``k``
    and ``big_lambda`` survive the normalization, which is why the law of
    the path count depends on nothing else.
    """

    k: int
    big_lambda: float
    normalized: bool = True

    @property
    def n_lenses(self) -> int:
        return max(self.k - 1, 0)


def derive_hop_count(scenario: Scenario) -> int:
    """Smallest k with k * r0 >= L, i.e. ceil(L / r0) evaluated exactly."""
    return _geometry(scenario.lam, scenario.r0, scenario.L)[0]


def lens_decomposition(scenario: Scenario) -> LensDecomposition:
    """The k - 1 lenses ``[L - (k - i) r0, i r0]`` that geodesic relays occupy.

    k = 2 yields the single lens ``[L - r0, r0]``.
    """
    k = scenario.hop_count
    if k == 1:
        raise DirectConnection(f"L={scenario.L} <= r0={scenario.r0}: source reaches destination directly")
    if scenario.degenerate:
        raise DegenerateScenario(f"L={scenario.L} is an exact multiple of r0={scenario.r0}; lens width is 0")
    r0, L = exact(scenario.r0), exact(scenario.L)
    lenses = tuple((float(L - (k - i) * r0), float(i * r0)) for i in range(1, k))
    return LensDecomposition(
        k=k,
        lenses=lenses,
        width=scenario.lens_width,
        big_lambda=scenario.big_lambda,
        r0=scenario.r0,
        L=scenario.L,
    )

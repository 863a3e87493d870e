"""Exact polynomials with rational coefficients.

``MomentPolynomial`` is the univariate result type (a polynomial in the
lens mean Lambda).  ``Poly`` is a small sparse multivariate polynomial used
internally by the recursion engine; variable 0 is always Lambda.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Mapping


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"exact coefficient expected, got {type(x).__name__}")


class MomentPolynomial:
    """Polynomial in Lambda with exact rational coefficients.

    Zero coefficients are never stored, so two polynomials are equal iff
    their coefficient maps are equal.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Mapping[int, object] | None = None):
        clean = {}
        for p, c in (coefficients or {}).items():
            if int(p) != p or p < 0:
                raise ValueError(f"power must be a non-negative integer, got {p!r}")
            c = _frac(c)
            if c:
                clean[int(p)] = clean.get(int(p), Fraction(0)) + c
        self.coefficients = {p: c for p, c in sorted(clean.items()) if c}

    @classmethod
    def constant(cls, c) -> "MomentPolynomial":
        return cls({0: c})

    @classmethod
    def monomial(cls, power: int, c=1) -> "MomentPolynomial":
        return cls({power: c})

    @property
    def degree(self) -> int:
        return max(self.coefficients, default=-1)

    def coefficient(self, power: int) -> Fraction:
        return self.coefficients.get(power, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, big_lambda):
        """Evaluate; exact for int/Fraction input, float otherwise."""
        if isinstance(big_lambda, (int, Fraction)):
            x = Fraction(big_lambda)
            return sum((c * x**p for p, c in self.coefficients.items()), Fraction(0))
        x = float(big_lambda)
        acc = 0.0
        for p in range(self.degree, -1, -1):
            acc = acc * x + float(self.coefficient(p))
        return acc

    evaluate = __call__

    def _coerce(self, other) -> "MomentPolynomial":
        if isinstance(other, MomentPolynomial):
            return other
        return MomentPolynomial.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coefficients)
        for p, c in other.coefficients.items():
            out[p] = out.get(p, Fraction(0)) + c
        return MomentPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return MomentPolynomial({p: -c for p, c in self.coefficients.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[int, Fraction] = {}
        for p, a in self.coefficients.items():
            for q, b in other.coefficients.items():
                out[p + q] = out.get(p + q, Fraction(0)) + a * b
        return MomentPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = MomentPolynomial.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, MomentPolynomial):
            try:
                other = MomentPolynomial.constant(other)
            except TypeError:
                return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(tuple(self.coefficients.items()))

    def __repr__(self):
        return f"MomentPolynomial({self})"

    def __str__(self):
        if not self.coefficients:
            return "0"
        terms = []
        for p in sorted(self.coefficients, reverse=True):
            c = self.coefficients[p]
            mono = "" if p == 0 else ("L" if p == 1 else f"L^{p}")
            if p == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"({c})*{mono}")
        return " + ".join(terms)

    def to_json(self) -> dict:
        return {"powers": {str(p): f"{c.numerator}/{c.denominator}" for p, c in self.coefficients.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "MomentPolynomial":
        return cls({int(p): Fraction(c) for p, c in obj["powers"].items()})


class Poly:
    """Sparse polynomial in ``nvars`` variables, exponent tuples -> Fraction."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], object] | None = None):
        self.nvars = nvars
        clean: dict[tuple[int, ...], Fraction] = {}
        for e, c in (terms or {}).items():
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has wrong arity for {nvars} variables")
            c = _frac(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int, power: int = 1, c=1) -> "Poly":
        e = [0] * nvars
        e[i] = power
        return cls(nvars, {tuple(e): c})

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Poly(self.nvars, out)

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(self.nvars, {e: v * c for e, v in self.terms.items()})
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms!r})"

    def substitute(self, i: int, value: "Poly") -> "Poly":
        """Replace variable ``i`` by the polynomial ``value``."""
        powers = [Poly.const(self.nvars, 1)]
        out = Poly(self.nvars)
        for e, c in self.terms.items():
            while len(powers) <= e[i]:
                powers.append(powers[-1] * value)
            rest = list(e)
            rest[i] = 0
            out = out + Poly(self.nvars, {tuple(rest): c}) * powers[e[i]]
        return out

    def antiderivative(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[i] += 1
            out[tuple(e2)] = c / e2[i]
        return Poly(self.nvars, out)

    def integrate(self, i: int, lower: "Poly", upper: "Poly") -> "Poly":
        """Definite integral over variable ``i`` between polynomial limits."""
        F = self.antiderivative(i)
        return F.substitute(i, upper) - F.substitute(i, lower)

    def depends_on(self, i: int) -> bool:
        return any(e[i] for e in self.terms)

    def to_moment(self) -> MomentPolynomial:
        """Project onto Lambda (variable 0); all other variables must be absent."""
        out: dict[int, Fraction] = {}
        for e, c in self.terms.items():
            if any(e[1:]):
                raise ValueError(f"polynomial still depends on a non-Lambda variable: {e}")
            out[e[0]] = out.get(e[0], Fraction(0)) + c
        return MomentPolynomial(out)

"""Linear extensions and order-polytope volumes.

The region of ``[0, 1]^n`` where ``x_a <= x_b`` for every edge ``(a, b)``
has volume ``e(P) / n!``, where ``e(P)`` counts linear extensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable

from .errors import CyclicOrder, SizeExceeded

MAX_SIZE = 20


@dataclass(frozen=True)
class Poset:
    """``edges`` holds pairs ``(a, b)`` meaning variable a <= variable b."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        es = frozenset((int(a), int(b)) for a, b in edges if a != b)
        for a, b in es:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside 0..{n - 1}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", es)

    def predecessor_masks(self) -> list[int]:
        masks = [0] * self.n
        for a, b in self.edges:
            masks[b] |= 1 << a
        return masks

    def is_acyclic(self) -> bool:
        preds = self.predecessor_masks()
        done = 0
        progressed = True
        while progressed:
            progressed = False
            for v in range(self.n):
                if not done >> v & 1 and preds[v] & ~done == 0:
                    done |= 1 << v
                    progressed = True
        return done == (1 << self.n) - 1


def count_linear_extensions(poset: Poset, max_size: int | None = MAX_SIZE) -> int:
    """Number of orderings of 0..n-1 compatible with the poset.

    Dynamic programme over downsets, visiting only downsets that are
    actually reachable; for narrow posets this is far fewer than 2^n.
    ``max_size=None`` lifts the size guard.
    """
    n = poset.n
    if max_size is not None and n > max_size:
        raise SizeExceeded(f"poset has {n} elements, limit is {max_size}")
    if not poset.is_acyclic():
        raise CyclicOrder("order constraints contain a cycle")
    preds = poset.predecessor_masks()
    full = (1 << n) - 1
    level = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for mask, ways in level.items():
            free = full & ~mask
            while free:
                bit = free & -free
                free ^= bit
                v = bit.bit_length() - 1
                if preds[v] & ~mask == 0:
                    m2 = mask | bit
                    nxt[m2] = nxt.get(m2, 0) + ways
        level = nxt
    return level.get(full, 0) if n else 1


def order_volume(poset: Poset, max_size: int | None = MAX_SIZE) -> Fraction:
    """Volume of the order region in the unit cube; 0 for cyclic constraints."""
    try:
        return Fraction(count_linear_extensions(poset, max_size), factorial(poset.n))
    except CyclicOrder:
        return Fraction(0)

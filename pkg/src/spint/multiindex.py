"""Multi-index bookkeeping for mixed step-size/noise expansions.

A multi-index ``alpha = (alpha_0, ..., alpha_m)`` labels the monomial
``h^{alpha_0} (dW_1)^{alpha_1} ... (dW_m)^{alpha_m}``.  Because an increment
scales like ``sqrt(h)``, the natural grading counts the step-size exponent
twice::

    weight(alpha) = alpha_0 + |alpha| = 2*alpha_0 + alpha_1 + ... + alpha_m

All truncations and order conditions in this package are expressed in this
weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["MultiIndex", "enumerate_multiindices", "moment_constant"]


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector over (step size, noise 1, ..., noise m)."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be nonnegative: {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zero(cls, m: int) -> "MultiIndex":
        return cls((0,) * (m + 1))

    @classmethod
    def unit(cls, m: int, position: int) -> "MultiIndex":
        """Index with a single 1 at ``position`` (0 = step size, r = noise r)."""
        return cls(tuple(1 if i == position else 0 for i in range(m + 1)))

    @property
    def m(self) -> int:
        return len(self.entries) - 1

    @property
    def order(self) -> int:
        """Raw degree |alpha|."""
        return sum(self.entries)

    @property
    def weight(self) -> int:
        """Mean-square grading: the step-size exponent counts twice."""
        return self.entries[0] + self.order

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self):
        return f"MultiIndex{self.entries}"


def enumerate_multiindices(m: int, max_weight: int) -> list[MultiIndex]:
    """All multi-indices over m noises with weight <= max_weight.

    Deterministic order: ascending weight, then descending lexicographic on
    the entry tuples, so within each weight class the pure step-size powers
    come first and the pure increment powers last.
    """
    if m < 0 or max_weight < 0:
        raise ValueError("m and max_weight must be nonnegative")
    found = []

    def fill(prefix, budget):
        pos = len(prefix)
        if pos == m + 1:
            found.append(MultiIndex(tuple(prefix)))
            return
        step = 2 if pos == 0 else 1
        for e in range(budget // step + 1):
            fill(prefix + [e], budget - e * step)

    fill([], max_weight)
    found.sort(key=lambda a: (a.weight, tuple(-e for e in a.entries)))
    return found


def moment_constant(alpha1: MultiIndex, alpha2: MultiIndex) -> float:
    """Gaussian moment product attached to an admissible index pair.

    For componentwise-even sums ``s_i = alpha1_i + alpha2_i`` (noise
    positions only) this is ``prod_i 2^{-s_i/2} s_i! / (s_i/2)!``, i.e. the
    product of raw moments ``E[xi^{s_i}]`` of independent standard normals.
    Pairs with an odd component sum do not contribute to any mean-square
    expectation and are rejected.
    """
    if alpha1.m != alpha2.m:
        raise ValueError("multi-indices have different noise counts")
    out = 1.0
    for i in range(1, alpha1.m + 1):
        s = alpha1[i] + alpha2[i]
        if s % 2:
            raise ValueError(
                f"odd component sum at noise {i}: pair ({alpha1}, {alpha2}) "
                "has vanishing Gaussian moment")
        half = s // 2
        out *= math.factorial(s) / (2.0 ** half * math.factorial(half))
    return out

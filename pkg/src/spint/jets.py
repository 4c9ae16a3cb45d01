"""Truncated multivariate Taylor (jet) arithmetic with weighted grading.

A jet is a polynomial in formal variables truncated by a *weighted* degree:
each variable carries an integer weight and a term survives only while the
sum of ``exponent * weight`` stays within the space's budget.  Running an
algebra-generic program on jets extracts its expansion coefficients
mechanically, which is how all series coefficients in this package are
obtained (no symbolic algebra, no divided differences).

Two gradings appear in practice:

* expansion variables for a one-step map: a step-size variable of weight 2
  and one weight-1 variable per noise channel, so truncation at weight W
  matches the mean-square ``h^{1/2}`` bookkeeping;
* state-displacement variables of weight 0, capped separately by plain
  degree, which turn every extracted coefficient into a spatial Taylor
  polynomial around the base point.

Spaces are interned: :func:`jet_space` caches the exponent enumeration and
the (sparse) multiplication table, so jet products reduce to a single
``np.bincount`` over precomputed index triples.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = ["Jet", "JetSpace", "jet_space"]

_SPACE_CACHE: dict[tuple, "JetSpace"] = {}


def jet_space(weights: Sequence[int], max_weight: int,
              degree_caps: Iterable[tuple[Iterable[int], int]] = ()) -> "JetSpace":
    """Return the interned jet space for the given grading.

    ``weights`` assigns an integer weight to each variable; ``max_weight``
    bounds the weighted degree.  ``degree_caps`` is a collection of
    ``(variable_indices, cap)`` pairs bounding the plain total degree of a
    variable group; every weight-0 variable must be covered by some cap,
    otherwise the exponent set would be infinite.
    """
    key = (tuple(int(w) for w in weights), int(max_weight),
           tuple((tuple(sorted(int(i) for i in grp)), int(c)) for grp, c in degree_caps))
    space = _SPACE_CACHE.get(key)
    if space is None:
        space = JetSpace(key[0], key[1], key[2])
        _SPACE_CACHE[key] = space
    return space


class JetSpace:
    """Exponent bookkeeping shared by all jets of one shape.

    Exponent tuples are enumerated once (ordered by weighted degree, then
    lexicographically), the all-zero exponent sitting at index 0.  The
    multiplication table lists every ordered pair of in-space exponents
    whose sum is in space; since the exponent set is downward closed, the
    table is exactly the divisor structure of the set.
    """

    __slots__ = ("nvars", "weights", "max_weight", "degree_caps", "exponents",
                 "index", "size", "degrees", "nilpotency", "_mul_i", "_mul_j",
                 "_mul_k", "_deriv_tables")

    def __init__(self, weights, max_weight, degree_caps=()):
        self.nvars = len(weights)
        self.weights = tuple(weights)
        self.max_weight = int(max_weight)
        self.degree_caps = tuple(degree_caps)
        if any(w < 0 for w in self.weights):
            raise ValueError("variable weights must be nonnegative")
        capped = set()
        for grp, _ in self.degree_caps:
            capped.update(grp)
        for i, w in enumerate(self.weights):
            if w == 0 and i not in capped:
                raise ValueError(f"weight-0 variable {i} needs a degree cap")

        self.exponents = self._enumerate()
        self.index = {e: k for k, e in enumerate(self.exponents)}
        self.size = len(self.exponents)
        self.degrees = np.array(
            [sum(e * w for e, w in zip(exp, self.weights)) for exp in self.exponents],
            dtype=np.int64)
        self.nilpotency = max(sum(e) for e in self.exponents)
        self._build_mul_table()
        self._deriv_tables = {}

    # -- construction helpers -------------------------------------------------

    def _admissible(self, exp) -> bool:
        if sum(e * w for e, w in zip(exp, self.weights)) > self.max_weight:
            return False
        for grp, cap in self.degree_caps:
            if sum(exp[i] for i in grp) > cap:
                return False
        return True

    def _enumerate(self):
        exps = [()]
        for i in range(self.nvars):
            w = self.weights[i]
            top = self.max_weight // w if w > 0 else self.max_weight
            for grp, cap in self.degree_caps:
                if i in grp:
                    top = min(top, cap)
            new = []
            for head in exps:
                for e in range(top + 1):
                    cand = head + (e,)
                    if self._admissible(cand + (0,) * (self.nvars - len(cand))):
                        new.append(cand)
                    else:
                        break
            exps = new
        exps.sort(key=lambda exp: (sum(e * w for e, w in zip(exp, self.weights)), exp))
        return exps

    def _build_mul_table(self):
        ii, jj, kk = [], [], []
        idx = self.index
        for k, exp in enumerate(self.exponents):
            for split in product(*(range(e + 1) for e in exp)):
                rest = tuple(e - s for e, s in zip(exp, split))
                ii.append(idx[split])
                jj.append(idx[rest])
                kk.append(k)
        self._mul_i = np.asarray(ii, dtype=np.intp)
        self._mul_j = np.asarray(jj, dtype=np.intp)
        self._mul_k = np.asarray(kk, dtype=np.intp)

    def _deriv_table(self, var):
        tab = self._deriv_tables.get(var)
        if tab is None:
            src, dst, fac = [], [], []
            for k, exp in enumerate(self.exponents):
                e = exp[var]
                if e > 0:
                    low = exp[:var] + (e - 1,) + exp[var + 1:]
                    src.append(k)
                    dst.append(self.index[low])
                    fac.append(float(e))
            tab = (np.asarray(src, dtype=np.intp), np.asarray(dst, dtype=np.intp),
                   np.asarray(fac))
            self._deriv_tables[var] = tab
        return tab

    # -- jet constructors ------------------------------------------------------

    def zero(self) -> "Jet":
        return Jet(self, np.zeros(self.size))

    def constant(self, value) -> "Jet":
        c = np.zeros(self.size)
        c[0] = value
        return Jet(self, c)

    def variable(self, var: int, scale=1.0) -> "Jet":
        c = np.zeros(self.size)
        exp = tuple(1 if i == var else 0 for i in range(self.nvars))
        c[self.index[exp]] = scale
        return Jet(self, c)

    def mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bincount(self._mul_k, weights=a[self._mul_i] * b[self._mul_j],
                           minlength=self.size)

    def __repr__(self):
        return (f"JetSpace(nvars={self.nvars}, weights={self.weights}, "
                f"max_weight={self.max_weight}, size={self.size})")


class Jet:
    """A truncated Taylor polynomial; immutable by convention.

    Supports ring arithmetic with scalars and same-space jets, division by
    jets with nonzero constant term, and the elementary functions needed by
    the system catalog (cos, sin, exp, log, sqrt).  Elementary functions are
    univariate Taylor compositions around the constant term.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    # -- inspection -------------------------------------------------------------

    @property
    def value(self) -> float:
        """Constant (weight-0, degree-0) term."""
        return float(self.coeffs[0])

    def coefficient(self, exponents) -> float:
        idx = self.space.index.get(tuple(exponents))
        if idx is None:
            raise KeyError(f"exponent {tuple(exponents)} outside jet space")
        return float(self.coeffs[idx])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def nonconstant(self) -> "Jet":
        c = self.coeffs.copy()
        c[0] = 0.0
        return Jet(self.space, c)

    def derivative(self, var: int) -> "Jet":
        src, dst, fac = self.space._deriv_table(var)
        out = np.zeros(self.space.size)
        np.add.at(out, dst, self.coeffs[src] * fac)
        return Jet(self.space, out)

    def __repr__(self):
        terms = []
        for k in np.flatnonzero(self.coeffs)[:6]:
            terms.append(f"{self.coeffs[k]:.6g}*{self.space.exponents[k]}")
        tail = " + ..." if np.count_nonzero(self.coeffs) > 6 else ""
        return f"Jet({' + '.join(terms) or '0'}{tail})"

    # -- ring operations ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return self.space.constant(float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, o.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces")
            return Jet(self.space, self.space.mul_coeffs(self.coeffs, other.coeffs))
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Jet(self.space, self.coeffs * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other._reciprocal()
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Jet(self.space, self.coeffs / float(other))
        return NotImplemented

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            return NotImplemented
        out = self.space.constant(1.0)
        base = self
        k = int(n)
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other):
        return (isinstance(other, Jet) and other.space is self.space
                and np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    # -- elementary functions -------------------------------------------------

    def _compose(self, taylor_coeffs) -> "Jet":
        """Evaluate sum_k a_k * (self - const)^k by Horner."""
        n = self.nonconstant()
        out = self.space.constant(taylor_coeffs[-1])
        for a in reversed(taylor_coeffs[:-1]):
            out = out * n
            out.coeffs[0] += a
        return out

    def _reciprocal(self) -> "Jet":
        c = self.value
        if c == 0.0:
            raise DomainError("division by a jet with zero constant term")
        order = self.space.nilpotency
        coeffs = [(-1.0) ** k / c ** (k + 1) for k in range(order + 1)]
        return self._compose(coeffs)

    def exp(self) -> "Jet":
        c = self.value
        e = math.exp(c)
        order = self.space.nilpotency
        return self._compose([e / math.factorial(k) for k in range(order + 1)])

    def log(self) -> "Jet":
        c = self.value
        if c <= 0.0:
            raise DomainError(f"log of jet with nonpositive constant term {c}")
        order = self.space.nilpotency
        coeffs = [math.log(c)]
        coeffs += [(-1.0) ** (k - 1) / (k * c ** k) for k in range(1, order + 1)]
        return self._compose(coeffs)

    def sqrt(self) -> "Jet":
        c = self.value
        if c <= 0.0:
            raise DomainError(f"sqrt of jet with nonpositive constant term {c}")
        order = self.space.nilpotency
        coeffs, binom = [], 1.0
        for k in range(order + 1):
            coeffs.append(binom * c ** (0.5 - k))
            binom *= (0.5 - k) / (k + 1)
        return self._compose(coeffs)

    def sin(self) -> "Jet":
        return self._trig(math.sin(self.value), math.cos(self.value))

    def cos(self) -> "Jet":
        return self._trig(math.cos(self.value), -math.sin(self.value))

    def _trig(self, f0, f1) -> "Jet":
        order = self.space.nilpotency
        cycle = (f0, f1, -f0, -f1)
        return self._compose([cycle[k % 4] / math.factorial(k) for k in range(order + 1)])

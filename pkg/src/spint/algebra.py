"""Algebra-generic elementary functions and small vector helpers.

System right-hand sides, gradients and steppers are written once against
this module and then run unchanged on plain floats, on numpy arrays
(vectorized post-processing of trajectories) and on :class:`~spint.jets.Jet`
values (series extraction).  The dispatch is deliberately boring: jets get
their Taylor-composition methods, arrays get numpy ufuncs with explicit
domain checks, scalars get ``math``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .jets import Jet

__all__ = ["cos", "sin", "exp", "log", "sqrt", "supnorm", "as_vector", "as_matrix"]


def cos(x):
    if isinstance(x, Jet):
        return x.cos()
    if isinstance(x, np.ndarray):
        return np.cos(x)
    return math.cos(x)


def sin(x):
    if isinstance(x, Jet):
        return x.sin()
    if isinstance(x, np.ndarray):
        return np.sin(x)
    return math.sin(x)


def exp(x):
    if isinstance(x, Jet):
        return x.exp()
    if isinstance(x, np.ndarray):
        return np.exp(x)
    return math.exp(x)


def log(x):
    if isinstance(x, Jet):
        return x.log()
    if isinstance(x, np.ndarray):
        if np.any(x <= 0.0):
            raise DomainError("log evaluated at a nonpositive coordinate")
        return np.log(x)
    if x <= 0.0:
        raise DomainError(f"log evaluated at nonpositive value {x}")
    return math.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if isinstance(x, np.ndarray):
        if np.any(x < 0.0):
            raise DomainError("sqrt evaluated at a negative coordinate")
        return np.sqrt(x)
    if x < 0.0:
        raise DomainError(f"sqrt evaluated at negative value {x}")
    return math.sqrt(x)


def supnorm(vec) -> float:
    """Max-norm of a vector of floats or jets (max over all coefficients)."""
    worst = 0.0
    for entry in vec:
        mag = entry.max_abs() if isinstance(entry, Jet) else abs(float(entry))
        if mag > worst:
            worst = mag
    return worst


def as_vector(entries) -> np.ndarray:
    """Stack entries into a numpy vector, object-dtyped when jets appear."""
    try:
        return np.asarray(entries, dtype=float)
    except (TypeError, ValueError):
        out = np.empty(len(entries), dtype=object)
        for i, e in enumerate(entries):
            out[i] = e
        return out


def as_matrix(rows) -> np.ndarray:
    """Stack rows into a numpy matrix, object-dtyped when jets appear."""
    if any(isinstance(e, Jet) for row in rows for e in row):
        out = np.empty((len(rows), len(rows[0])), dtype=object)
        for i, row in enumerate(rows):
            for j, e in enumerate(row):
                out[i, j] = e
        return out
    return np.asarray(rows, dtype=float)

"""Seeded Brownian increments, truncation, and level coupling.

Increment streams are counter-based: each trajectory owns a Philox stream
keyed by ``(master_seed, trajectory_id)``, so Monte Carlo fan-out is
order-independent and every batch is bit-reproducible.  Coarse/fine grids
are coupled by summing fine increments (:func:`aggregate_increments`),
which realizes the same Brownian path at every resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

__all__ = ["SeedSpec", "IncrementBatch", "TruncationPolicy", "sample_increments",
           "truncate_increments", "wong_zakai_value", "aggregate_increments",
           "clamp_threshold"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one trajectory's increment stream."""

    master_seed: int
    trajectory_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed & _MASK64, self.trajectory_id & _MASK64],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class IncrementBatch:
    """A block of Brownian increments on a uniform grid.

    ``dw[n, r]`` is the increment of noise ``r+1`` over step ``n``; each
    entry is N(0, h) under the generator.
    """

    h: float
    dw: np.ndarray  # shape (n_steps, m)

    @property
    def n_steps(self) -> int:
        return self.dw.shape[0]

    @property
    def m(self) -> int:
        return self.dw.shape[1]


@dataclass(frozen=True)
class TruncationPolicy:
    """Clamp policy for the bounded-increment variant of a scheme.

    When enabled, a standardized increment ``xi`` is clamped to the window
    ``[-A_h, A_h]`` with ``A_h = sqrt(rho * |log h|)``; requires h < 1.
    """

    rho: float = 1.0
    enabled: bool = False

    def __post_init__(self):
        if self.rho < 1.0:
            raise ValueError(f"rho must be >= 1, got {self.rho}")


def clamp_threshold(h: float, rho: float) -> float:
    """Window half-width A_h = sqrt(rho |log h|); defined for h < 1."""
    if not 0.0 < h < 1.0:
        raise ValueError(f"clamp threshold needs 0 < h < 1, got h={h}")
    return math.sqrt(rho * abs(math.log(h)))


def sample_increments(seed: SeedSpec, h: float, m: int, n_steps: int) -> IncrementBatch:
    """Draw an (n_steps, m) block of N(0, h) increments for one trajectory."""
    if h <= 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    if m < 1:
        raise ValueError(f"need at least one noise channel, got m={m}")
    if n_steps < 1:
        raise ValueError(f"need at least one step, got n_steps={n_steps}")
    rng = seed.generator()
    dw = rng.standard_normal((n_steps, m)) * math.sqrt(h)
    dw.setflags(write=False)
    return IncrementBatch(h=float(h), dw=dw)


def truncate_increments(batch: IncrementBatch, policy: TruncationPolicy) -> IncrementBatch:
    """Replace each increment sqrt(h)*xi by sqrt(h)*clamp(xi, -A_h, A_h)."""
    if not policy.enabled:
        return batch
    a = clamp_threshold(batch.h, policy.rho)
    root_h = math.sqrt(batch.h)
    clipped = np.clip(batch.dw / root_h, -a, a) * root_h
    clipped.setflags(write=False)
    return IncrementBatch(h=batch.h, dw=clipped)


def wong_zakai_value(t: float, t_n: float, h: float, w_at_tn: float, dw: float) -> float:
    """Piecewise-linear path value W(t_n) + (t - t_n)/h * dW on one step."""
    if not t_n <= t <= t_n + h:
        raise ValueError(f"t={t} outside step interval [{t_n}, {t_n + h}]")
    return w_at_tn + (t - t_n) / h * dw

def aggregate_increments(fine: IncrementBatch, factor: int) -> IncrementBatch:
    """Sum blocks of ``factor`` fine increments into a coarse batch.

    The result is a coupling: coarse and fine batches realize the same
    Brownian path, with h' = factor * h and identical terminal values.
    """
    factor = int(factor)
    if factor < 1:
        raise ValueError(f"aggregation factor must be >= 1, got {factor}")
    if fine.n_steps % factor:
        raise ValueError(
            f"{fine.n_steps} fine steps not divisible by factor {factor}")
    if factor == 1:
        return fine
    coarse = fine.dw.reshape(fine.n_steps // factor, factor, fine.m).sum(axis=1)
    coarse.setflags(write=False)
    return IncrementBatch(h=fine.h * factor, dw=coarse)

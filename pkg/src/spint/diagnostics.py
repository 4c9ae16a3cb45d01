"""Quantitative conservation and convergence diagnostics.

Everything here is an empirical check of a structural claim: the Poisson-map
defect of a step map (exact forward-mode Jacobian), drift of tracked
functionals over long runs, the step-size scaling of the random-Hamiltonian
drift, and coupled-path strong-order estimation.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .brownian import SeedSpec, IncrementBatch, aggregate_increments, sample_increments
from .errors import EstimationError, TrackError
from .integrators import Trajectory, integrate
from .jets import jet_space
from .modified import effective_order, method_coefficients, modified_coefficients_matching
from .systems import PoissonSystem, sample_domain_points

__all__ = ["DriftSeries", "OrderEstimate", "DriftScaling", "poisson_map_residual",
           "functional_drift", "envelope_slope", "drift_scaling_exponent",
           "strong_order_estimate"]


@dataclass(frozen=True)
class DriftSeries:
    """Deviation of a tracked functional from its initial value."""

    t: np.ndarray
    values: np.ndarray
    label: str

    def max_abs(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(np.max(np.abs(finite))) if finite.size else math.inf


@dataclass(frozen=True)
class OrderEstimate:
    """Mean strong errors against a coupled fine reference, with a fitted slope."""

    h_values: np.ndarray
    errors: np.ndarray
    half_widths: np.ndarray
    slope: float
    n_paths: int


@dataclass(frozen=True)
class DriftScaling:
    """Scaling of the worst cumulative random-Hamiltonian residual with h."""

    h_values: np.ndarray
    mean_max_residuals: np.ndarray
    slope: float
    p: int
    target: float


def poisson_map_residual(stepper, sys: PoissonSystem, y, h: float, dw) -> float:
    """Sup-norm of  Phi'(y) B(y) Phi'(y)^T - B(Phi(y))  for one step.

    The Jacobian Phi' comes from running the stepper on first-order state
    jets, so it is exact to rounding (no finite differencing).
    """
    d = sys.d
    space = jet_space((1,) * d, 1)
    yj = np.empty(d, dtype=object)
    for i in range(d):
        yj[i] = space.constant(float(y[i])) + space.variable(i)
    out = stepper.step(sys, yj, h, dw)
    units = [tuple(1 if k == j else 0 for k in range(d)) for j in range(d)]
    jac = np.zeros((d, d))
    image = np.zeros(d)
    for i in range(d):
        image[i] = out[i].value
        for j in range(d):
            jac[i, j] = out[i].coefficient(units[j])
    b_here = np.asarray(sys.structure(np.asarray(y, dtype=float)), dtype=float)
    b_there = np.asarray(sys.structure(image), dtype=float)
    return float(np.max(np.abs(jac @ b_here @ jac.T - b_there)))


def functional_drift(traj: Trajectory, functional: str) -> DriftSeries:
    """Deviation series of a tracked functional.

    ``hamiltonian`` and ``casimir:<i>`` are referenced to their initial
    value; ``random-hamiltonian`` returns the cumulative sum of the
    step-local residuals (which starts at zero by construction).
    """
    if functional == "random-hamiltonian":
        series = traj.functionals.get("rh-cum")
        if series is None:
            raise TrackError("random-hamiltonian was not tracked")
        return DriftSeries(t=traj.t, values=series.copy(), label=functional)
    series = traj.functionals.get(functional)
    if series is None:
        raise TrackError(f"functional {functional!r} was not tracked; "
                         f"available: {sorted(traj.functionals)}")
    return DriftSeries(t=traj.t, values=series - series[0], label=functional)


def envelope_slope(series: DriftSeries) -> float:
    """Least-squares growth rate of |deviation| per unit time.

    Fitted on the finite prefix of the series, so a blown-up baseline run
    still yields a (huge) slope instead of NaNs.
    """
    finite = np.isfinite(series.values)
    if finite.all():
        t, v = series.t, np.abs(series.values)
    else:
        stop = int(np.argmin(finite))
        if stop < 3:
            return math.inf
        t, v = series.t[:stop], np.abs(series.values[:stop])
    design = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    return float(coef[1])


def _fit_loglog(h_values, errors) -> float:
    coef = np.polyfit(np.log(np.asarray(h_values, dtype=float)),
                      np.log(np.asarray(errors, dtype=float)), 1)
    return float(coef[0])


def drift_scaling_exponent(sys: PoissonSystem, stepper, y0, T: float, h_values,
                           n_paths: int = 100, seed: int = 0,
                           table_weight: int = 4) -> DriftScaling:
    """Fit the h-scaling of max_n |cumulative random-Hamiltonian residual|.

    All resolutions are coupled through one fine Brownian path per
    trajectory; the fitted slope is reported against p/2 with p the
    effective perturbation order of the stepper's modified field (detected
    at a generic base point away from symmetry axes).
    """
    h_values = sorted(float(h) for h in h_values)
    if len(h_values) < 3:
        raise EstimationError("drift scaling needs at least three step sizes")
    h_fine = h_values[0]
    factors = []
    for h in h_values:
        ratio = h / h_fine
        if abs(ratio - round(ratio)) > 1e-9:
            raise EstimationError(f"step {h} is not a multiple of the finest {h_fine}")
        factors.append(int(round(ratio)))
    common = math.lcm(*factors)
    n_fine = (int(round(T / h_fine)) // common) * common
    if n_fine == 0:
        raise EstimationError("horizon too short for the coarsest step size")

    sums = np.zeros(len(h_values))
    for path in range(n_paths):
        fine = sample_increments(SeedSpec(seed, path), h_fine, sys.m, n_fine)
        for i, factor in enumerate(factors):
            batch = aggregate_increments(fine, factor)
            n_steps = n_fine // factor
            traj = integrate(sys, stepper, y0, batch.h, n_steps, batch,
                             tracks=("random-hamiltonian",))
            sums[i] += np.max(np.abs(traj.functionals["rh-cum"]))
    means = sums / n_paths
    if np.max(means) < 1e-13:
        raise EstimationError(
            "all drifts sit at the rounding floor; scaling fit is meaningless")
    base = sample_domain_points(sys, 1, seed=seed + 7)[0]
    table = method_coefficients(stepper, sys, base, table_weight)
    p = effective_order(modified_coefficients_matching(table, sys)).p
    return DriftScaling(h_values=np.asarray(h_values), mean_max_residuals=means,
                        slope=_fit_loglog(h_values, means), p=p, target=p / 2.0)


def strong_order_estimate(sys: PoissonSystem, stepper, y0, T: float, h_values,
                          n_paths: int = 200, seed: int = 0,
                          refinement: int = 4) -> OrderEstimate:
    """Coupled-path self-convergence study.

    The finest step defines the reference: the same method run at
    ``min(h)/refinement`` on the shared Brownian path (obtained by
    aggregating the reference increments).  Mean terminal errors get CLT
    half-widths; the slope is the log-log fit.
    """
    h_values = sorted((float(h) for h in h_values), reverse=True)
    if len(h_values) < 2:
        raise EstimationError("strong-order fit needs at least two step sizes")
    h_ref = min(h_values) / refinement
    factors = []
    for h in h_values:
        ratio = h / h_ref
        if abs(ratio - round(ratio)) > 1e-9:
            raise EstimationError(
                f"step {h} is not a multiple of the reference step {h_ref}")
        factors.append(int(round(ratio)))
    common = math.lcm(*factors)
    n_ref = (int(round(T / h_ref)) // common) * common
    if n_ref == 0:
        raise EstimationError("horizon too short for the coarsest step size")

    errs = np.zeros((n_paths, len(h_values)))
    for path in range(n_paths):
        fine = sample_increments(SeedSpec(seed, path), h_ref, sys.m, n_ref)
        ref = integrate(sys, stepper, y0, h_ref, n_ref, fine).states[-1]
        for i, factor in enumerate(factors):
            batch = aggregate_increments(fine, factor)
            end = integrate(sys, stepper, y0, batch.h, n_ref // factor, batch).states[-1]
            errs[path, i] = np.linalg.norm(end - ref)
    means = errs.mean(axis=0)
    halves = 1.96 * errs.std(axis=0, ddof=1) / math.sqrt(n_paths)
    if np.any(halves > 0.5 * means):
        raise EstimationError(
            "strong-order fit is unstable: a confidence half-width exceeds "
            "half its mean error; increase n_paths")
    return OrderEstimate(h_values=np.asarray(h_values), errors=means,
                         half_widths=halves, slope=_fit_loglog(h_values, means),
                         n_paths=n_paths)

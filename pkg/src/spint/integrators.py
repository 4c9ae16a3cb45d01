"""One-step schemes and trajectory integration.

Three steppers are provided:

* :class:`ImplicitMidpoint` -- the stochastic implicit midpoint rule for
  canonical systems (constant structure matrix); symplectic, hence a
  Poisson integrator in the canonical case.
* :class:`MaxwellBlochSplitting` -- explicit composition of the four exact
  subflows of the maxwell-bloch system; preserves the Casimir exactly and
  is a Poisson map.  The scheme composes a rotation by the first noise, a
  shear by the second noise, then the deterministic rotation and shear.
  Each factor is evaluated at the current intermediate state by default
  (each subflow is then the exact flow of its own Poisson subsystem); the
  frozen-argument variant, which reuses the initial first coordinate for
  the second rotation angle, is kept for comparison.
* :class:`HeunStepper` -- explicit Stratonovich-consistent trapezoidal
  predictor-corrector; deliberately not structure-preserving, used as the
  drift-growth baseline.

All steppers are algebra-generic: state entries may be floats or jets, and
the step size / increments may themselves be jets (series extraction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .brownian import IncrementBatch
from .errors import ConvergenceError, StepError, TrackError
from .jets import Jet, jet_space
from .systems import PoissonSystem

__all__ = ["SolverConfig", "Trajectory", "ImplicitMidpoint", "MaxwellBlochSplitting",
           "HeunStepper", "implicit_solve", "fixed_point_iterations", "integrate",
           "make_stepper", "STEPPER_FACTORIES", "TRACK_NAMES"]


@dataclass(frozen=True)
class SolverConfig:
    """Stage-solver settings for implicit schemes.

    ``fixed-point`` iterates the stage map directly (always correct on
    jets, where every sweep settles one more weight order); ``newton``
    solves the stage residual with an exact forward-mode Jacobian and is
    the right tool for large steps.
    """

    mode: str = "fixed-point"
    tolerance: float = 1e-12
    max_iterations: int = 50

    def __post_init__(self):
        if self.mode not in ("fixed-point", "newton"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.tolerance <= 0.0:
            raise ValueError("solver tolerance must be positive")


def _difference_norm(a, b) -> float:
    return alg.supnorm([x - y for x, y in zip(a, b)])


def _has_jets(vec) -> bool:
    return any(isinstance(v, Jet) for v in vec)


def fixed_point_iterations(update: Callable, guess, config: SolverConfig):
    """Iterate ``Y <- update(Y)`` until stationary; returns (solution, sweeps).

    On jets over formal step/noise variables, each sweep settles one more
    weight order, so the iteration reaches an exact fixed point in at most
    ``max_weight`` sweeps; the reported sweep count excludes the final
    confirming application.
    """
    current = list(guess)
    residuals = []
    for sweep in range(1, config.max_iterations + 1):
        nxt = list(update(current))
        res = _difference_norm(nxt, current)
        residuals.append(res)
        if res == 0.0:
            return nxt, sweep - 1
        if res <= config.tolerance:
            return nxt, sweep
        current = nxt
    raise ConvergenceError(
        f"fixed-point stage stalled after {config.max_iterations} sweeps "
        f"(last residual {residuals[-1]:.3e})",
        iterations=config.max_iterations, residuals=residuals)


def _newton_solve(update: Callable, guess, config: SolverConfig):
    """Newton iteration on the residual Y - update(Y), Jacobian via first-order jets."""
    d = len(guess)
    space = jet_space((1,) * d, 1)
    units = [tuple(1 if k == i else 0 for k in range(d)) for i in range(d)]
    current = np.asarray(guess, dtype=float)
    residuals = []
    for it in range(1, config.max_iterations + 1):
        res_vec = current - np.asarray(update(current), dtype=float)
        res = float(np.max(np.abs(res_vec)))
        residuals.append(res)
        if res <= config.tolerance:
            return current, it
        yj = alg.as_vector([space.constant(current[i]) + space.variable(i)
                            for i in range(d)])
        upd_j = update(yj)
        jac = np.eye(d)
        for i in range(d):
            entry = upd_j[i]
            if isinstance(entry, Jet):
                for j in range(d):
                    jac[i, j] -= entry.coefficient(units[j])
        try:
            step = np.linalg.solve(jac, res_vec)
        except np.linalg.LinAlgError:
            # singular stage Jacobian: retry with plain sweeps before giving up
            return fixed_point_iterations(update, current, config)
        current = current - step
    raise ConvergenceError(
        f"Newton stage stalled after {config.max_iterations} iterations "
        f"(last residual {residuals[-1]:.3e})",
        iterations=config.max_iterations, residuals=residuals)


def implicit_solve(update: Callable, guess, config: SolverConfig | None = None):
    """Solve the fixed-point problem Y = update(Y) from ``guess``.

    Jet-valued problems always use fixed-point sweeps (finite termination);
    float problems follow ``config.mode``.
    """
    config = config or SolverConfig()
    if config.mode == "newton" and not _has_jets(guess):
        solution, _ = _newton_solve(update, guess, config)
        return solution
    solution, _ = fixed_point_iterations(update, guess, config)
    return solution


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

class ImplicitMidpoint:
    """Stochastic implicit midpoint rule for canonical systems.

    Stage: Y = y + (1/2) J^{-1} (h grad H0(Y) + sum_r dW_r grad H_r(Y));
    update: y' = 2Y - y.  Time-symmetric and symplectic for constant
    structure matrices, which is the only case it accepts.
    """

    label = "midpoint"
    algebra_generic = True

    def __init__(self, config: SolverConfig | None = None):
        self.config = config or SolverConfig()

    def step(self, sys: PoissonSystem, y, h, dw):
        if not sys.canonical or sys.constant_structure is None:
            raise ValueError(
                f"implicit midpoint requires a canonical system, got {sys.label!r}")
        j_inv = sys.constant_structure
        coeffs = (h,) + tuple(dw[r] for r in range(sys.m))
        formal = any(isinstance(c, Jet) for c in coeffs) or _has_jets(y)
        if not formal and self.config.mode == "fixed-point":
            # same stage map and stopping rule as the generic path, with the
            # list/dispatch plumbing stripped for long float runs
            y_vec = np.asarray(y, dtype=float)
            tol = self.config.tolerance
            stage = y_vec
            residuals = []
            for _ in range(self.config.max_iterations):
                total = sys.total_gradient(coeffs, stage)
                nxt = y_vec + 0.5 * np.dot(j_inv, total)
                res = float(np.abs(nxt - stage).max())
                residuals.append(res)
                stage = nxt
                if res <= tol:
                    return 2.0 * stage - y_vec
            raise ConvergenceError(
                f"fixed-point stage stalled after {self.config.max_iterations} "
                f"sweeps at h={h} (last residual {residuals[-1]:.3e})",
                iterations=self.config.max_iterations, residuals=residuals)

        y_vec = y if _has_jets(y) else np.asarray(y, dtype=float)

        def stage_map(stage):
            total = sys.total_gradient(coeffs, stage)
            return y_vec + 0.5 * np.dot(j_inv, total)

        stage = implicit_solve(stage_map, y_vec, self.config)
        return [2.0 * s - v for s, v in zip(stage, y_vec)]


def _mb_rotation(y, angle):
    """Exact flow of the first-noise generator: (y2, y3) rotates by ``angle``."""
    c = alg.cos(angle)
    s = alg.sin(angle)
    return [y[0], y[1] * c + y[2] * s, -y[1] * s + y[2] * c]


def _mb_shear(y, t):
    """Exact flow of the second-noise generator: y1 gains t * y2."""
    return [y[0] + t * y[1], y[1], y[2]]


class MaxwellBlochSplitting:
    """Explicit splitting integrator for the maxwell-bloch system.

    Applies, in order, the exact rotation by sigma1*W1, the exact shear by
    sigma2*W2, the rotation by h and the shear by h.  With
    ``frozen=True`` the second rotation uses the *initial* first coordinate
    as its angular rate instead of the current one.
    """

    algebra_generic = True

    def __init__(self, frozen: bool = False):
        self.frozen = frozen
        self.label = "mb-splitting-frozen" if frozen else "mb-splitting"

    def step(self, sys: PoissonSystem, y, h, dw):
        if sys.label != "maxwell-bloch":
            raise ValueError(
                f"splitting scheme is specific to maxwell-bloch, got {sys.label!r}")
        s1, s2 = sys.params["sigma"]
        u = _mb_rotation(y, y[0] * (s1 * dw[0]))
        v = _mb_shear(u, s2 * dw[1])
        rate = y[0] if self.frozen else v[0]
        w = _mb_rotation(v, rate * h)
        return _mb_shear(w, h)


class HeunStepper:
    """Stratonovich trapezoidal predictor-corrector (not structure-preserving)."""

    label = "heun"
    algebra_generic = True

    def step(self, sys: PoissonSystem, y, h, dw):
        y_vec = y if _has_jets(y) else np.asarray(y, dtype=float)
        f0 = sys.drift(y_vec)
        g0 = [sys.diffusion(r, y_vec) for r in range(1, sys.m + 1)]
        pred = y_vec + h * f0
        for r in range(sys.m):
            pred = pred + dw[r] * g0[r]
        f1 = sys.drift(pred)
        out = y_vec + (h * 0.5) * (f0 + f1)
        for r in range(sys.m):
            out = out + (dw[r] * 0.5) * (g0[r] + sys.diffusion(r + 1, pred))
        return out


STEPPER_FACTORIES: dict[str, Callable] = {
    "midpoint": ImplicitMidpoint,
    "mb-splitting": MaxwellBlochSplitting,
    "mb-splitting-frozen": lambda: MaxwellBlochSplitting(frozen=True),
    "heun": HeunStepper,
}


def make_stepper(label: str, solver: SolverConfig | None = None):
    factory = STEPPER_FACTORIES.get(label)
    if factory is None:
        raise KeyError(f"unknown stepper label {label!r}; known: {sorted(STEPPER_FACTORIES)}")
    if label == "midpoint":
        return ImplicitMidpoint(solver)
    return factory()


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

TRACK_NAMES = ("hamiltonian", "casimirs", "random-hamiltonian")


@dataclass
class Trajectory:
    """A realized path with tracked functionals.

    ``functionals`` maps series names to arrays: ``hamiltonian`` and
    ``casimir:<i>`` have one value per grid point; ``rh-step`` holds the
    per-step residual of the step-local random Hamiltonian and ``rh-cum``
    its running sum (leading zero included).
    """

    t: np.ndarray
    states: np.ndarray
    increments: IncrementBatch
    functionals: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def n_steps(self) -> int:
        return len(self.t) - 1


def integrate(sys: PoissonSystem, stepper, y0, h: float, n_steps: int,
              increments: IncrementBatch, tracks: Sequence[str] = ()) -> Trajectory:
    """Iterate the stepper and fill the requested functional tracks."""
    if increments.n_steps < n_steps:
        raise ValueError(
            f"{n_steps} steps requested but batch holds {increments.n_steps}")
    if increments.m != sys.m:
        raise ValueError(
            f"batch has {increments.m} noise channels, system needs {sys.m}")
    if increments.h != h:
        raise ValueError(f"batch step {increments.h} != requested step {h}")
    unknown = set(tracks) - set(TRACK_NAMES)
    if unknown:
        raise TrackError(f"unknown tracks {sorted(unknown)}; available: {TRACK_NAMES}")

    d = sys.d
    states = np.empty((n_steps + 1, d))
    states[0] = np.asarray(y0, dtype=float)
    dw = increments.dw
    current = states[0]
    for n in range(n_steps):
        try:
            nxt = stepper.step(sys, current, h, dw[n])
        except Exception as exc:
            raise StepError(f"stepper {stepper.label!r} failed at step {n}: {exc}",
                            step=n) from exc
        states[n + 1] = nxt
        current = nxt

    t = np.arange(n_steps + 1) * h
    traj = Trajectory(t=t, states=states, increments=increments)
    stacked = states.T
    if "hamiltonian" in tracks:
        traj.functionals["hamiltonian"] = np.asarray(
            sys.hamiltonians[0].value(stacked), dtype=float)
    if "casimirs" in tracks:
        for i, cas in enumerate(sys.casimirs):
            traj.functionals[f"casimir:{i}"] = np.asarray(
                cas.value(stacked), dtype=float)
    if "random-hamiltonian" in tracks:
        values = [np.asarray(ham.value(stacked), dtype=float)
                  for ham in sys.hamiltonians]
        jumps = np.diff(values[0])
        for r in range(1, sys.m + 1):
            jumps = jumps + (dw[:n_steps, r - 1] / h) * np.diff(values[r])
        traj.functionals["rh-step"] = jumps
        traj.functionals["rh-cum"] = np.concatenate(([0.0], np.cumsum(jumps)))
    return traj

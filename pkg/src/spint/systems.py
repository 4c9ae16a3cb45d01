"""Stochastic Poisson systems and the builtin catalog.

A system is dy = B(y) grad(H0) dt + sum_r B(y) grad(H_r) o dW_r with a
skew-symmetric structure matrix B satisfying the Jacobi identity.  All
right-hand sides are algebra-generic: they accept float vectors, stacked
float arrays (for vectorized trajectory post-processing) and jet vectors.

The catalog carries the systems used throughout the test harness:

* ``oscillator``      canonical linear oscillator, proportional noise
* ``pendulum``        canonical pendulum with m proportional noises
* ``double-well``     canonical pendulum drift with harmonic + double-well
                      noise Hamiltonians (two channels)
* ``lotka-volterra``  quadratic structure matrix on the positive quadrant
* ``maxwell-bloch``   three-dimensional Lie-Poisson system with a quartic
                      Casimir and an explicit splitting integrator

Note on ``maxwell-bloch``: the drift Hamiltonian is ``y1^2/2 + y3`` (with
noise Hamiltonians ``y1^2/2`` and ``y3``); this is the version consistent
with the generator matrices of the splitting scheme, where B(y) grad(H0)
equals (A2 + A1(y)) y.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from . import algebra as alg
from .errors import DomainError
from .jets import Jet, jet_space

__all__ = ["ScalarField", "PoissonSystem", "StructureReport", "structure_check",
           "poisson_bracket", "canonical_system", "oscillator", "pendulum_m_noises",
           "two_noise_doublewell", "lotka_volterra", "maxwell_bloch", "make_system",
           "SYSTEM_FACTORIES", "sample_domain_points"]


@dataclass(frozen=True)
class ScalarField:
    """A scalar function with its closed-form gradient."""

    value: Callable
    gradient: Callable


@dataclass(frozen=True)
class PoissonSystem:
    """Structure matrix plus Hamiltonians and Casimirs.

    ``hamiltonians[0]`` drives the drift; ``hamiltonians[r]`` (r >= 1)
    drives noise channel r.  For canonical systems the constant structure
    matrix is also stored directly, which the implicit midpoint scheme
    requires.
    """

    label: str
    d: int
    m: int
    structure: Callable
    hamiltonians: tuple[ScalarField, ...]
    casimirs: tuple[ScalarField, ...] = ()
    canonical: bool = False
    constant_structure: np.ndarray | None = None
    params: Mapping = field(default_factory=dict)
    domain_sampler: Callable | None = None
    combined_gradient: Callable | None = None

    def __post_init__(self):
        if len(self.hamiltonians) != self.m + 1:
            raise ValueError(
                f"need {self.m + 1} Hamiltonians (drift + {self.m} noises), "
                f"got {len(self.hamiltonians)}")

    def total_gradient(self, coeffs, y):
        """sum_k coeffs[k] * grad(H_k)(y), fused per system when available.

        Implicit stages evaluate this once per sweep, so the catalog ships
        hand-fused closures for the canonical systems; the fallback just
        accumulates the individual gradients.
        """
        if self.combined_gradient is not None:
            return self.combined_gradient(coeffs, y)
        total = coeffs[0] * self.hamiltonians[0].gradient(y)
        for r in range(1, self.m + 1):
            total = total + coeffs[r] * self.hamiltonians[r].gradient(y)
        return total

    def drift(self, y):
        """B(y) grad(H0)(y)."""
        return np.dot(self.structure(y), self.hamiltonians[0].gradient(y))

    def diffusion(self, r: int, y):
        """B(y) grad(H_r)(y) for noise channel r in 1..m."""
        if not 1 <= r <= self.m:
            raise IndexError(f"noise index {r} outside 1..{self.m}")
        return np.dot(self.structure(y), self.hamiltonians[r].gradient(y))

    def random_hamiltonian(self, dw, h: float, y):
        """Conserved quantity of the piecewise-linear-noise step system.

        H0(y) + sum_r (dW_r / h) H_r(y); conserved exactly by the flow of
        :meth:`wz_field` on the step that produced ``dw``.
        """
        if h == 0.0:
            raise ValueError("random Hamiltonian needs h > 0")
        total = self.hamiltonians[0].value(y)
        for r in range(1, self.m + 1):
            total = total + (dw[r - 1] / h) * self.hamiltonians[r].value(y)
        return total

    def random_hamiltonian_gradient(self, dw, h: float, y):
        if h == 0.0:
            raise ValueError("random Hamiltonian needs h > 0")
        total = self.hamiltonians[0].gradient(y)
        for r in range(1, self.m + 1):
            total = total + (dw[r - 1] / h) * self.hamiltonians[r].gradient(y)
        return total

    def wz_field(self, dw, h: float) -> Callable:
        """Frozen-increment vector field y -> B(y) grad(Hbar)(y)."""
        if h == 0.0:
            raise ValueError("frozen-increment field needs h > 0")

        def field(y):
            return np.dot(self.structure(y), self.random_hamiltonian_gradient(dw, h, y))

        return field


def poisson_bracket(sys: PoissonSystem, f: ScalarField, g: ScalarField, y):
    """{f, g}(y) = grad(f)^T B(y) grad(g)."""
    return np.dot(f.gradient(y), np.dot(sys.structure(y), g.gradient(y)))


# ---------------------------------------------------------------------------
# structure checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureReport:
    """Worst-case residuals of the structure-matrix conditions."""

    max_skew: float
    max_jacobi: float
    max_casimir: float
    tolerance: float
    n_points: int

    @property
    def passed(self) -> bool:
        return max(self.max_skew, self.max_jacobi, self.max_casimir) <= self.tolerance


def _structure_with_jacobian(sys: PoissonSystem, y: np.ndarray):
    """Evaluate B(y) and the tensor dB[i, j, l] = dB_ij/dy_l via first-order jets."""
    d = sys.d
    space = jet_space((1,) * d, 1)
    yj = np.empty(d, dtype=object)
    for i in range(d):
        yj[i] = space.constant(float(y[i])) + space.variable(i)
    bj = sys.structure(yj)
    b = np.zeros((d, d))
    db = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            entry = bj[i][j]
            if isinstance(entry, Jet):
                b[i, j] = entry.value
                for l in range(d):
                    db[i, j, l] = entry.coefficient(
                        tuple(1 if k == l else 0 for k in range(d)))
            else:
                b[i, j] = float(entry)
    return b, db


def structure_check(sys: PoissonSystem, points, tolerance: float = 1e-12) -> StructureReport:
    """Skew-symmetry, Jacobi and Casimir residuals over sample points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("structure check needs at least one sample point")
    worst_skew = worst_jacobi = worst_casimir = 0.0
    for y in points:
        b, db = _structure_with_jacobian(sys, y)
        worst_skew = max(worst_skew, float(np.max(np.abs(b + b.T))))
        jac = (np.einsum("ijl,lk->ijk", db, b)
               + np.einsum("jkl,li->ijk", db, b)
               + np.einsum("kil,lj->ijk", db, b))
        worst_jacobi = max(worst_jacobi, float(np.max(np.abs(jac))))
        for cas in sys.casimirs:
            res = np.dot(np.asarray(cas.gradient(y), dtype=float), b)
            worst_casimir = max(worst_casimir, float(np.max(np.abs(res))))
    return StructureReport(worst_skew, worst_jacobi, worst_casimir,
                           tolerance, len(points))


def sample_domain_points(sys: PoissonSystem, n: int, seed: int = 0) -> np.ndarray:
    """Seeded sample points inside the system's domain, away from axes."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    if sys.domain_sampler is not None:
        return sys.domain_sampler(rng, n)
    mags = rng.uniform(0.3, 1.7, size=(n, sys.d))
    signs = rng.choice((-1.0, 1.0), size=(n, sys.d))
    return mags * signs


# ---------------------------------------------------------------------------
# builtin catalog
# ---------------------------------------------------------------------------

def _symplectic_inverse(k: int) -> np.ndarray:
    """Inverse of J = [[0, I], [-I, 0]]: the constant matrix [[0, -I], [I, 0]]."""
    j_inv = np.zeros((2 * k, 2 * k))
    j_inv[:k, k:] = -np.eye(k)
    j_inv[k:, :k] = np.eye(k)
    return j_inv


def canonical_system(k: int, hamiltonian: ScalarField,
                     noise_hamiltonians=(), label="canonical",
                     params=None, domain_sampler=None) -> PoissonSystem:
    """Canonical Hamiltonian system on R^{2k} with constant structure matrix."""
    j_inv = _symplectic_inverse(k)
    j_inv.setflags(write=False)
    noise = tuple(noise_hamiltonians)
    return PoissonSystem(
        label=label, d=2 * k, m=len(noise),
        structure=lambda y: j_inv,
        hamiltonians=(hamiltonian,) + noise,
        canonical=True, constant_structure=j_inv,
        params=dict(params or {}), domain_sampler=domain_sampler)


def _scaled(fieldfn: ScalarField, scale: float) -> ScalarField:
    return ScalarField(value=lambda y: scale * fieldfn.value(y),
                       gradient=lambda y: scale * fieldfn.gradient(y))


_PENDULUM = ScalarField(
    value=lambda y: 0.5 * y[1] * y[1] - alg.cos(y[0]),
    gradient=lambda y: alg.as_vector([alg.sin(y[0]), y[1]]))

_QUADRATIC = ScalarField(
    value=lambda y: 0.5 * (y[0] * y[0] + y[1] * y[1]),
    gradient=lambda y: alg.as_vector([y[0], y[1]]))

_DOUBLE_WELL = ScalarField(
    value=lambda y: 0.5 * y[1] * y[1] + 0.25 * y[0] ** 2 * y[0] ** 2 - 0.5 * y[0] * y[0],
    gradient=lambda y: alg.as_vector([y[0] ** 2 * y[0] - y[0], y[1]]))


_J2_INV = _symplectic_inverse(1)
_J2_INV.setflags(write=False)


def oscillator(sigma: float = 0.1) -> PoissonSystem:
    """Linear oscillator with one proportional noise channel."""

    def fused(c, y):
        scale = c[0] + c[1] * sigma
        return alg.as_vector([scale * y[0], scale * y[1]])

    base = canonical_system(1, _QUADRATIC, (_scaled(_QUADRATIC, sigma),),
                            label="oscillator", params={"sigma": (sigma,)})
    return replace(base, combined_gradient=fused)


def pendulum_m_noises(sigmas=(0.01, 0.02, 0.03)) -> PoissonSystem:
    """Pendulum with m proportional noise Hamiltonians sigma_r * H0."""
    sigmas = tuple(float(s) for s in sigmas)
    if not sigmas or any(s <= 0 for s in sigmas):
        raise ValueError(f"noise scales must be strictly positive, got {sigmas}")
    noise = tuple(_scaled(_PENDULUM, s) for s in sigmas)

    def fused(c, y):
        scale = c[0]
        for r, s in enumerate(sigmas, start=1):
            scale = scale + c[r] * s
        return alg.as_vector([scale * alg.sin(y[0]), scale * y[1]])

    return PoissonSystem(
        label="pendulum", d=2, m=len(sigmas),
        structure=lambda y: _J2_INV,
        hamiltonians=(_PENDULUM,) + noise,
        canonical=True, constant_structure=_J2_INV,
        params={"sigma": sigmas}, combined_gradient=fused)


def two_noise_doublewell(sigma1: float = 0.01, sigma2: float = 0.01) -> PoissonSystem:
    """Pendulum drift with harmonic and double-well noise Hamiltonians."""
    noise = (_scaled(_QUADRATIC, sigma1), _scaled(_DOUBLE_WELL, sigma2))

    def fused(c, y):
        a = c[1] * sigma1
        b = c[2] * sigma2
        return alg.as_vector([
            c[0] * alg.sin(y[0]) + a * y[0] + b * (y[0] ** 2 * y[0] - y[0]),
            (c[0] + a + b) * y[1]])

    return PoissonSystem(
        label="double-well", d=2, m=2,
        structure=lambda y: _J2_INV,
        hamiltonians=(_PENDULUM,) + noise,
        canonical=True, constant_structure=_J2_INV,
        params={"sigma": (sigma1, sigma2)}, combined_gradient=fused)


def _lv_guard(y):
    a, b = y[0], y[1]
    if isinstance(a, Jet):
        bad = a.value <= 0.0 or b.value <= 0.0
    else:
        bad = bool(np.any(np.asarray(a) <= 0.0) or np.any(np.asarray(b) <= 0.0))
    if bad:
        raise DomainError("Lotka-Volterra state left the positive quadrant")


def lotka_volterra(sigma: float = 1.0) -> PoissonSystem:
    """Two-dimensional predator-prey system with quadratic structure matrix.

    Defined on the open positive quadrant; evaluation outside raises
    :class:`DomainError`.  One noise channel with Hamiltonian
    sigma * (ln y2 - ln y1).
    """
    h0 = ScalarField(
        value=lambda y: y[0] - alg.log(y[0]) + y[1] - alg.log(y[1]),
        gradient=lambda y: alg.as_vector([1.0 - 1.0 / y[0], 1.0 - 1.0 / y[1]]))
    h1 = ScalarField(
        value=lambda y: sigma * (alg.log(y[1]) - alg.log(y[0])),
        gradient=lambda y: alg.as_vector([-sigma / y[0], sigma / y[1]]))

    def structure(y):
        _lv_guard(y)
        q = y[0] * y[1]
        return alg.as_matrix([[q * 0.0, q], [-q, q * 0.0]])

    def sampler(rng, n):
        return np.exp(rng.normal(0.0, 0.4, size=(n, 2))) + 0.1

    return PoissonSystem(
        label="lotka-volterra", d=2, m=1, structure=structure,
        hamiltonians=(h0, h1), params={"sigma": (sigma,)},
        domain_sampler=sampler)


def maxwell_bloch(sigma1: float = 1.0, sigma2: float = 1.0) -> PoissonSystem:
    """Three-dimensional Lie-Poisson system with a quartic Casimir.

    Structure matrix rows: (0, -y3, y2), (y3, 0, 0), (-y2, 0, 0).  Drift
    Hamiltonian y1^2/2 + y3; noise Hamiltonians sigma1 * y1^2/2 and
    sigma2 * y3.  Casimir: ((y2^2 + y3^2)^2) / 2.
    """
    h0 = ScalarField(
        value=lambda y: 0.5 * y[0] * y[0] + y[2],
        gradient=lambda y: alg.as_vector([y[0], y[0] * 0.0, y[0] * 0.0 + 1.0]))
    h1 = ScalarField(
        value=lambda y: sigma1 * 0.5 * y[0] * y[0],
        gradient=lambda y: alg.as_vector([sigma1 * y[0], y[0] * 0.0, y[0] * 0.0]))
    h2 = ScalarField(
        value=lambda y: sigma2 * y[2],
        gradient=lambda y: alg.as_vector([y[2] * 0.0, y[2] * 0.0, y[2] * 0.0 + sigma2]))
    casimir = ScalarField(
        value=lambda y: 0.5 * (y[1] * y[1] + y[2] * y[2]) ** 2,
        gradient=lambda y: alg.as_vector([
            y[0] * 0.0,
            2.0 * y[1] * (y[1] * y[1] + y[2] * y[2]),
            2.0 * y[2] * (y[1] * y[1] + y[2] * y[2])]))

    def structure(y):
        z = y[0] * 0.0
        return alg.as_matrix([[z, -y[2], y[1]], [y[2], z, z], [-y[1], z, z]])

    return PoissonSystem(
        label="maxwell-bloch", d=3, m=2, structure=structure,
        hamiltonians=(h0, h1, h2), casimirs=(casimir,),
        params={"sigma": (sigma1, sigma2)})


SYSTEM_FACTORIES: dict[str, Callable[..., PoissonSystem]] = {
    "oscillator": oscillator,
    "pendulum": pendulum_m_noises,
    "double-well": two_noise_doublewell,
    "lotka-volterra": lotka_volterra,
    "maxwell-bloch": maxwell_bloch,
}


def make_system(label: str, sigma=None) -> PoissonSystem:
    """Instantiate a catalog system by label, optionally rescaling noises."""
    factory = SYSTEM_FACTORIES.get(label)
    if factory is None:
        raise KeyError(f"unknown system label {label!r}; "
                       f"known: {sorted(SYSTEM_FACTORIES)}")
    if sigma is None:
        return factory()
    sigma = tuple(float(s) for s in sigma)
    if label == "pendulum":
        return pendulum_m_noises(sigma)
    if label == "double-well":
        return two_noise_doublewell(*sigma)
    if label == "maxwell-bloch":
        return maxwell_bloch(*sigma)
    if label == "lotka-volterra":
        return lotka_volterra(*sigma)
    if label == "oscillator":
        return oscillator(*sigma)
    raise KeyError(label)

"""Modified-equation engine: method/flow expansions and their matching.

Every one-step map Phi admits a formal expansion

    Phi(y) = y + sum_alpha d_alpha(y) h^{alpha_0} prod_r (dW_r)^{alpha_r},

and the modified field is the formal vector field whose exact step-flow
reproduces Phi term by term.  Everything here is computed mechanically:

* the method table comes from one stepper evaluation on jets whose
  variables are the step size (weight 2), the increments (weight 1 each)
  and state displacements (weight 0, plain-degree capped), so each
  extracted coefficient is a spatial Taylor polynomial around the base
  point;
* the flow of a field G with every term carrying positive weight follows
  from the terminating Lie series  flow = id + sum_k G^{[k]} / k!  with
  G^{[1]} = G and G^{[k+1]} = (dG^{[k]}/dy) G, where the state derivatives
  are exact derivatives of the displacement polynomials;
* the modified field solves  G = Z - sum_{k>=2} G^{[k]} / k!  (Z = method
  map minus identity), a fixed point that settles one weight order per
  sweep.

Tables are value tables; the displacement payload rides along privately so
matching and certification can differentiate the coefficient functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from .errors import ConsistencyError
from .jets import Jet, JetSpace, jet_space
from .multiindex import MultiIndex, enumerate_multiindices, moment_constant
from .systems import PoissonSystem, ScalarField

__all__ = ["CoefficientTable", "ModifiedField", "method_coefficients",
           "flow_coefficients", "modified_coefficients_matching",
           "modified_coefficients_direct", "flow_of_modified_field",
           "order_condition_residual", "regroup_modified_field", "RegroupedField",
           "poisson_certificate", "PoissonCertificate", "effective_order",
           "EffectiveOrder"]


# ---------------------------------------------------------------------------
# jet plumbing
# ---------------------------------------------------------------------------

def _combined_space(m: int, d: int, max_weight: int, spatial_degree: int) -> JetSpace:
    weights = (2,) + (1,) * m + (0,) * d
    caps = ((tuple(range(m + 1, m + 1 + d)), spatial_degree),)
    return jet_space(weights, max_weight, caps)


def _formal_inputs(space: JetSpace, y, m: int, d: int, spatial_degree: int):
    h_jet = space.variable(0)
    w_jets = [space.variable(1 + r) for r in range(m)]
    state = np.empty(d, dtype=object)
    for i in range(d):
        state[i] = space.constant(float(y[i]))
        if spatial_degree > 0:
            state[i] = state[i] + space.variable(m + 1 + i)
    return h_jet, w_jets, state


def _lie_terms(field_jets, space: JetSpace, m: int, d: int, kmax: int):
    """G^{[1]}..G^{[kmax]} with G^{[k+1]} = (dG^{[k]}/d state) . G."""
    terms = [list(field_jets)]
    for _ in range(2, kmax + 1):
        prev = terms[-1]
        nxt = []
        for i in range(d):
            acc = space.zero()
            for j in range(d):
                acc = acc + prev[i].derivative(m + 1 + j) * field_jets[j]
            nxt.append(acc)
        terms.append(nxt)
    return terms


def _lie_flow_sum(field_jets, space, m, d, kmax):
    """sum_{k=1..kmax} G^{[k]} / k! (the step-flow minus identity)."""
    terms = _lie_terms(field_jets, space, m, d, kmax)
    out = [space.zero() for _ in range(d)]
    for k, term in enumerate(terms, start=1):
        scale = 1.0 / math.factorial(k)
        for i in range(d):
            out[i] = out[i] + term[i] * scale
    return out


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass
class CoefficientTable:
    """Expansion coefficients of a one-step map at a base point.

    ``entries[alpha]`` is the d-vector attached to the monomial of
    ``alpha``; kind is ``method`` (d_alpha), ``flow`` (phi_alpha) or
    ``modified`` (f_alpha).  The private jet payload keeps the spatial
    Taylor polynomials of the same coefficients.
    """

    kind: str
    base_point: np.ndarray
    m: int
    max_weight: int
    spatial_degree: int
    entries: dict[MultiIndex, np.ndarray]
    jets: list = field(repr=False, default=None)
    space: JetSpace = field(repr=False, default=None)

    @property
    def d(self) -> int:
        return len(self.base_point)

    def coefficient_polynomial(self, alpha: MultiIndex):
        """f_alpha as a polynomial in the displacement around the base point.

        Returns a list of (delta_exponent, d-vector) pairs.
        """
        self._require_payload()
        lead = tuple(alpha.entries)
        poly = []
        for k, exp in enumerate(self.space.exponents):
            if exp[:self.m + 1] != lead:
                continue
            vec = np.array([jet.coeffs[k] for jet in self.jets])
            if np.any(vec != 0.0) or sum(exp) == sum(lead):
                poly.append((exp[self.m + 1:], vec))
        return poly

    def coefficient_jacobian(self, alpha: MultiIndex) -> np.ndarray:
        """Spatial Jacobian of the coefficient function at the base point."""
        self._require_payload()
        if self.spatial_degree < 1:
            raise ConsistencyError(
                "table built with spatial_degree=0 has no Jacobian information")
        d = self.d
        jac = np.zeros((d, d))
        for delta_exp, vec in self.coefficient_polynomial(alpha):
            if sum(delta_exp) == 1:
                jac[:, delta_exp.index(1)] = vec
        return jac

    def _require_payload(self):
        if self.jets is None or self.space is None:
            raise ConsistencyError("table carries no jet payload")


def _extract_table(kind, jets, space, y, m, max_weight, spatial_degree, d):
    zero_delta = (0,) * d
    entries = {}
    for alpha in enumerate_multiindices(m, max_weight):
        if alpha.order == 0:
            continue
        exp = tuple(alpha.entries) + zero_delta
        entries[alpha] = np.array([jet.coefficient(exp) for jet in jets])
    return CoefficientTable(kind=kind, base_point=np.asarray(y, dtype=float), m=m,
                            max_weight=max_weight, spatial_degree=spatial_degree,
                            entries=entries, jets=list(jets), space=space)


def _validate_weight_one(table: CoefficientTable, sys: PoissonSystem, what: str):
    y = table.base_point
    ref = [np.asarray(sys.drift(y), dtype=float)]
    ref += [np.asarray(sys.diffusion(r, y), dtype=float) for r in range(1, sys.m + 1)]
    for pos, vec in enumerate(ref):
        alpha = MultiIndex.unit(sys.m, pos)
        got = table.entries[alpha]
        scale = 1.0 + float(np.max(np.abs(vec)))
        if np.max(np.abs(got - vec)) > 1e-9 * scale:
            raise ConsistencyError(
                f"{what}: weight-1 entry at {alpha} is {got}, expected {vec}; "
                "the underlying map is not consistent with the system")


def method_coefficients(stepper, sys: PoissonSystem, y, max_weight: int,
                        spatial_degree: int | None = None) -> CoefficientTable:
    """Expansion table of one stepper step with formal step size and noises."""
    if max_weight < 2:
        raise ValueError("method expansion needs max_weight >= 2")
    m, d = sys.m, sys.d
    if spatial_degree is None:
        spatial_degree = max_weight - 1
    space = _combined_space(m, d, max_weight, spatial_degree)
    h_jet, w_jets, state = _formal_inputs(space, y, m, d, spatial_degree)
    out = stepper.step(sys, state, h_jet, w_jets)
    jets = [out[i] - state[i] for i in range(d)]
    table = _extract_table("method", jets, space, y, m, max_weight, spatial_degree, d)
    _validate_weight_one(table, sys, f"method table for {stepper.label!r}")
    return table


def flow_coefficients(sys: PoissonSystem, y, max_weight: int,
                      spatial_degree: int | None = None) -> CoefficientTable:
    """Expansion table of the exact step-flow of the frozen-increment field.

    The field h*f + sum_r w_r g_r carries weight >= 1 in every term, so its
    time-1 flow is the terminating Lie series; coefficients at weight 1 are
    the drift and diffusions themselves.
    """
    if max_weight < 2:
        raise ValueError("flow expansion needs max_weight >= 2")
    m, d = sys.m, sys.d
    if spatial_degree is None:
        spatial_degree = max_weight - 1
    space = _combined_space(m, d, max_weight, spatial_degree)
    h_jet, w_jets, state = _formal_inputs(space, y, m, d, spatial_degree)
    drift = sys.drift(state)
    g_field = [h_jet * drift[i] for i in range(d)]
    for r in range(1, m + 1):
        diff = sys.diffusion(r, state)
        for i in range(d):
            g_field[i] = g_field[i] + w_jets[r - 1] * diff[i]
    jets = _lie_flow_sum(g_field, space, m, d, max_weight)
    table = _extract_table("flow", jets, space, y, m, max_weight, spatial_degree, d)
    _validate_weight_one(table, sys, "flow table")
    return table


# ---------------------------------------------------------------------------
# modified field
# ---------------------------------------------------------------------------

@dataclass
class ModifiedField:
    """The field whose exact step-flow reproduces a numerical method.

    ``table.entries[alpha]`` holds f_alpha at the base point; the payload
    keeps the spatial polynomials, and :meth:`evaluate` assembles the field
    value  sum_alpha f_alpha(y) h^{alpha_0 - 1} prod_r dw_r^{alpha_r}
    within the truncation around the base point.
    """

    table: CoefficientTable

    @property
    def base_point(self) -> np.ndarray:
        return self.table.base_point

    @property
    def max_weight(self) -> int:
        return self.table.max_weight

    def coefficient(self, alpha: MultiIndex) -> np.ndarray:
        return self.table.entries[alpha]

    def coefficient_at(self, alpha: MultiIndex, y) -> np.ndarray:
        """Evaluate the spatial polynomial of f_alpha at a nearby point."""
        delta = np.asarray(y, dtype=float) - self.table.base_point
        out = np.zeros(self.table.d)
        for delta_exp, vec in self.table.coefficient_polynomial(alpha):
            out += vec * np.prod(delta ** np.asarray(delta_exp))
        return out

    def evaluate(self, y, h: float, dw) -> np.ndarray:
        total = np.zeros(self.table.d)
        for alpha, _ in self.table.entries.items():
            mono = h ** (alpha[0] - 1)
            for r in range(1, alpha.m + 1):
                mono *= dw[r - 1] ** alpha[r]
            total += self.coefficient_at(alpha, y) * mono
        return total


def modified_coefficients_matching(method_table: CoefficientTable,
                                   sys: PoissonSystem) -> ModifiedField:
    """Solve for the modified field matching a method table, weight by weight.

    Iterates G <- Z - sum_{k>=2} G^{[k]} / k!; each sweep settles one more
    weight order, so ``max_weight`` sweeps reach the exact (truncated)
    fixed point.
    """
    if method_table.kind not in ("method", "flow"):
        raise ConsistencyError(f"cannot match a table of kind {method_table.kind!r}")
    method_table._require_payload()
    _validate_weight_one(method_table, sys, "matching input")
    space = method_table.space
    m, d, w_max = method_table.m, method_table.d, method_table.max_weight
    z = method_table.jets
    g_field = [space.zero() for _ in range(d)]
    for _ in range(w_max):
        terms = _lie_terms(g_field, space, m, d, w_max)
        g_new = list(z)
        for k in range(2, w_max + 1):
            scale = 1.0 / math.factorial(k)
            for i in range(d):
                g_new[i] = g_new[i] - terms[k - 1][i] * scale
        g_field = g_new
    table = _extract_table("modified", g_field, space, method_table.base_point,
                           m, w_max, method_table.spatial_degree, d)
    return ModifiedField(table=table)


def flow_of_modified_field(fld: ModifiedField) -> CoefficientTable:
    """Expansion of the exact step-flow of a modified field (round-trip side)."""
    tab = fld.table
    tab._require_payload()
    jets = _lie_flow_sum(tab.jets, tab.space, tab.m, tab.d, tab.max_weight)
    return _extract_table("flow", jets, tab.space, tab.base_point, tab.m,
                          tab.max_weight, tab.spatial_degree, tab.d)


def _weight_one_jacobians(sys: PoissonSystem, y):
    """Jacobians of drift and diffusions via first-order state jets."""
    d = sys.d
    space = jet_space((1,) * d, 1)
    yj = np.empty(d, dtype=object)
    for i in range(d):
        yj[i] = space.constant(float(y[i])) + space.variable(i)
    units = [tuple(1 if k == j else 0 for k in range(d)) for j in range(d)]
    fields = [sys.drift(yj)] + [sys.diffusion(r, yj) for r in range(1, sys.m + 1)]
    jacobians = []
    for vec in fields:
        jac = np.zeros((d, d))
        for i in range(d):
            for j in range(d):
                jac[i, j] = vec[i].coefficient(units[j])
        jacobians.append(jac)
    return jacobians


def modified_coefficients_direct(method_table: CoefficientTable, sys: PoissonSystem,
                                 alpha: MultiIndex) -> np.ndarray:
    """Low-order closed form: f_alpha = d_alpha - (1/2) sum f'_{k2} f_{k1}.

    The sum runs over ordered pairs of weight-1 indices with k1 + k2 =
    alpha; only |alpha| <= 2 is supported (higher orders need derivatives
    of earlier modified coefficients, which the matching path supplies).
    """
    if alpha.order < 1:
        raise ValueError("alpha must have |alpha| >= 1")
    if alpha.order > 2:
        raise ValueError(
            f"direct recursion only covers |alpha| <= 2, got |alpha|={alpha.order}")
    d_alpha = method_table.entries[alpha]
    if alpha.order == 1:
        return d_alpha.copy()
    y = method_table.base_point
    values = [np.asarray(sys.drift(y), dtype=float)] + \
        [np.asarray(sys.diffusion(r, y), dtype=float) for r in range(1, sys.m + 1)]
    jacobians = _weight_one_jacobians(sys, y)
    out = d_alpha.astype(float).copy()
    m = alpha.m
    for p1 in range(m + 1):
        for p2 in range(m + 1):
            k1 = MultiIndex.unit(m, p1)
            k2 = MultiIndex.unit(m, p2)
            if tuple(a + b for a, b in zip(k1, k2)) == alpha.entries:
                out -= 0.5 * jacobians[p2] @ values[p1]
    return out


# ---------------------------------------------------------------------------
# order conditions
# ---------------------------------------------------------------------------

def order_condition_residual(flow_table: CoefficientTable,
                             method_table: CoefficientTable, k: int) -> float:
    """Mean-square order condition at level k.

    Sums K_{a1,a2} <phi_{a1} - d_{a1}, phi_{a2} - d_{a2}> over index pairs
    with weight(a1) + weight(a2) = 2k and componentwise-even increment
    exponents.  A method has mean-square order >= p iff these vanish for
    k = 1..2p.
    """
    if flow_table.m != method_table.m:
        raise ValueError("tables have different noise counts")
    if not np.array_equal(flow_table.base_point, method_table.base_point):
        raise ValueError("tables have different base points")
    w_max = min(flow_table.max_weight, method_table.max_weight)
    if 2 * k - 1 > w_max:
        raise ValueError(
            f"order condition at k={k} needs tables of weight >= {2 * k - 1}")
    deltas = {}
    for alpha, phi in flow_table.entries.items():
        if alpha.weight <= 2 * k - 1:
            deltas[alpha] = phi - method_table.entries[alpha]
    by_weight: dict[int, list[MultiIndex]] = {}
    for alpha in deltas:
        by_weight.setdefault(alpha.weight, []).append(alpha)
    total = 0.0
    for w1 in range(1, 2 * k):
        w2 = 2 * k - w1
        if w2 < 1 or w2 not in by_weight or w1 not in by_weight:
            continue
        for a1 in by_weight[w1]:
            for a2 in by_weight[w2]:
                if any((a1[i] + a2[i]) % 2 for i in range(1, a1.m + 1)):
                    continue
                total += (moment_constant(a1, a2)
                          * float(np.dot(deltas[a1], deltas[a2])))
    return total


# ---------------------------------------------------------------------------
# regrouping into modified drift and diffusions
# ---------------------------------------------------------------------------

@dataclass
class RegroupedField:
    """Modified field split into one drift series and m diffusion series.

    Terms with no increment exponent feed the drift; every other term goes
    to the channel whose exponent is minimal among the nonzero increment
    exponents (ties to the smallest channel index).  The full multi-index
    is kept with each term so the split can be reassembled exactly.
    """

    drift_terms: dict[MultiIndex, np.ndarray]
    diffusion_terms: list[dict[MultiIndex, np.ndarray]]


def regroup_modified_field(fld: ModifiedField) -> RegroupedField:
    m = fld.table.m
    drift: dict[MultiIndex, np.ndarray] = {}
    channels: list[dict[MultiIndex, np.ndarray]] = [dict() for _ in range(m)]
    for alpha, vec in fld.table.entries.items():
        noise = alpha.entries[1:]
        if not any(noise):
            drift[alpha] = vec
            continue
        r_bar = min((e, r) for r, e in enumerate(noise) if e > 0)[1]
        channels[r_bar][alpha] = vec
    return RegroupedField(drift_terms=drift, diffusion_terms=channels)


# ---------------------------------------------------------------------------
# structure certification
# ---------------------------------------------------------------------------

@dataclass
class PoissonCertificate:
    """Structure evidence for a modified field.

    ``casimir_tangency``: worst |grad(C)^T f_alpha| over all Casimirs and
    coefficients.  ``candidate_residuals``: for each supplied Hamiltonian
    candidate, the sign-resolved residual min over +-H of
    |f_alpha - B grad(H)| together with the winning sign.
    ``jacobian_asymmetry``: for canonical systems, the worst asymmetry of
    the Jacobian of J f_alpha (zero iff locally Hamiltonian).
    """

    casimir_tangency: float
    candidate_residuals: dict[MultiIndex, tuple[float, int]]
    jacobian_asymmetry: float | None


def poisson_certificate(fld: ModifiedField, sys: PoissonSystem,
                        candidates=()) -> PoissonCertificate:
    y = fld.base_point
    b = np.asarray(sys.structure(y), dtype=float)
    worst_tangency = 0.0
    for cas in sys.casimirs:
        grad = np.asarray(cas.gradient(y), dtype=float)
        for vec in fld.table.entries.values():
            worst_tangency = max(worst_tangency, float(abs(np.dot(grad, vec))))
    residuals = {}
    for alpha, ham in candidates:
        target = b @ np.asarray(ham.gradient(y), dtype=float)
        vec = fld.table.entries[alpha]
        plus = float(np.max(np.abs(vec - target)))
        minus = float(np.max(np.abs(vec + target)))
        residuals[alpha] = (plus, +1) if plus <= minus else (minus, -1)
    asymmetry = None
    if sys.canonical and sys.constant_structure is not None:
        j_mat = np.linalg.inv(sys.constant_structure)
        asymmetry = 0.0
        for alpha in fld.table.entries:
            grad_h = j_mat @ fld.table.coefficient_jacobian(alpha)
            asymmetry = max(asymmetry, float(np.max(np.abs(grad_h - grad_h.T))))
    return PoissonCertificate(casimir_tangency=worst_tangency,
                              candidate_residuals=residuals,
                              jacobian_asymmetry=asymmetry)


# ---------------------------------------------------------------------------
# effective order of the perturbation
# ---------------------------------------------------------------------------

@dataclass
class EffectiveOrder:
    """Smallest weight class (>= 2 in both weight and raw degree) with a
    nonvanishing modified coefficient; ``saturated`` means no class below
    the truncation weight was nonzero."""

    p: int
    saturated: bool
    group_norms: dict[int, float]


def effective_order(fld: ModifiedField, tolerance: float = 1e-9) -> EffectiveOrder:
    if fld.max_weight < 4:
        raise ValueError("effective order detection needs max_weight >= 4")
    norms: dict[int, float] = {}
    for alpha, vec in fld.table.entries.items():
        if alpha.order < 2:
            continue
        w = alpha.weight
        norms[w] = max(norms.get(w, 0.0), float(np.max(np.abs(vec))))
    for j in range(2, fld.max_weight + 1):
        if norms.get(j, 0.0) > tolerance:
            return EffectiveOrder(p=j, saturated=False, group_norms=norms)
    return EffectiveOrder(p=fld.max_weight, saturated=True, group_norms=norms)

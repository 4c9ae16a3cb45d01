"""Backward error analysis of the splitting scheme, coefficient by coefficient.

Runs the maxwell-bloch splitting step on formal jets to extract its
expansion table d_alpha, solves for the modified field f_alpha whose exact
step-flow reproduces the method, verifies the round trip, and certifies
the Poisson structure of the perturbation (every f_alpha is tangent to the
Casimir level sets, and the leading perturbation is itself Hamiltonian for
the same structure matrix, up to sign).
"""

import numpy as np

from spint import (MultiIndex, effective_order, flow_of_modified_field, make_stepper,
                   make_system, method_coefficients, modified_coefficients_direct,
                   modified_coefficients_matching, poisson_certificate,
                   regroup_modified_field)
from spint.systems import ScalarField

mb = make_system("maxwell-bloch")
st = make_stepper("mb-splitting")
y = np.array([1.0, 2.0, 3.0])

table = method_coefficients(st, mb, y, 4)
print("== method expansion at y = (1, 2, 3) (weight <= 4) ==")
for alpha, vec in sorted(table.entries.items(), key=lambda kv: (kv[0].weight,
                                                                kv[0].entries)):
    if alpha.weight <= 3 or alpha.entries == (2, 0, 0):
        print(f"d_{alpha.entries} = {np.round(vec, 12)}")

fld = modified_coefficients_matching(table, mb)
a200 = MultiIndex((2, 0, 0))
print("\n== modified coefficients ==")
print("f_(2,0,0) matching :", fld.coefficient(a200))
print("f_(2,0,0) direct   :", modified_coefficients_direct(table, mb, a200))
print("f_(0,2,0)          :", fld.coefficient(MultiIndex((0, 2, 0))),
      "(the pure first-noise pair cancels exactly)")

back = flow_of_modified_field(fld)
worst = max(float(np.max(np.abs(back.entries[a] - v)))
            for a, v in table.entries.items())
print(f"\nround trip flow(modified field) vs method table: {worst:.2e}")

eo = effective_order(fld)
print(f"effective perturbation order p = {eo.p} "
      f"(group norms: { {k: round(v, 6) for k, v in sorted(eo.group_norms.items())} })")

half_y1y2 = ScalarField(value=lambda s: 0.5 * s[0] * s[1],
                        gradient=lambda s: np.array([0.5 * s[1], 0.5 * s[0], 0.0]))
cert = poisson_certificate(fld, mb, candidates=[(a200, half_y1y2)])
res, sign = cert.candidate_residuals[a200]
print(f"\nCasimir tangency of all f_alpha: {cert.casimir_tangency:.2e}")
print(f"candidate Hamiltonian y1*y2/2 for f_(2,0,0): residual {res:.2e} "
      f"with sign {sign:+d}")

grouped = regroup_modified_field(fld)
print(f"\nregrouped: {len(grouped.drift_terms)} drift terms, "
      f"{[len(c) for c in grouped.diffusion_terms]} per-channel diffusion terms")

import math

import numpy as np
import pytest

from spint import (ConsistencyError, MultiIndex, effective_order, flow_coefficients,
                   flow_of_modified_field, make_stepper, make_system,
                   method_coefficients, modified_coefficients_direct,
                   modified_coefficients_matching, order_condition_residual,
                   poisson_certificate, regroup_modified_field, sample_domain_points)
from spint.systems import ScalarField

MB_SIGMA = (1.0, 1.0)


def mb_system(s1=1.0, s2=1.0):
    return make_system("maxwell-bloch", sigma=(s1, s2))


# Closed forms of the splitting scheme's expansion coefficients, written
# down from the generator matrices A1(y) (rotation rate y1 in the 2-3
# plane) and A2 (shear of y1 by y2): products evaluated by hand.
def mb_expected_d(y, s1, s2):
    y1, y2, y3 = y
    return {
        (1, 0, 0): np.array([y2, y1 * y3, -y1 * y2]),
        (0, 1, 0): s1 * np.array([0.0, y1 * y3, -y1 * y2]),
        (0, 0, 1): s2 * np.array([y2, 0.0, 0.0]),
        (2, 0, 0): np.array([y1 * y3, -0.5 * y1 ** 2 * y2, -0.5 * y1 ** 2 * y3]),
        (0, 2, 0): 0.5 * s1 ** 2 * np.array([0.0, -y1 ** 2 * y2, -y1 ** 2 * y3]),
        (0, 0, 2): np.zeros(3),
        (1, 1, 0): s1 * np.array([y1 * y3, -y1 ** 2 * y2, -y1 ** 2 * y3]),
        (1, 0, 1): np.zeros(3),
        (0, 1, 1): s1 * s2 * np.array([y1 * y3, 0.0, 0.0]),
    }


def mb_expected_f200(y):
    y1, y2, y3 = y
    return np.array([0.5 * y1 * y3, -0.5 * y3 * y2, 0.5 * y2 * y2])


def random_points(n, seed=123):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.4, 1.8, size=(n, 3)) * rng.choice((-1.0, 1.0), size=(n, 3))
    return pts


def test_frozen_variant_reproduces_all_displayed_coefficients():
    mb = mb_system()
    st = make_stepper("mb-splitting-frozen")
    for y in random_points(10):
        table = method_coefficients(st, mb, y, 4)
        for entries, expect in mb_expected_d(y, 1.0, 1.0).items():
            got = table.entries[MultiIndex(entries)]
            assert np.max(np.abs(got - expect)) <= 1e-10, entries


def test_default_variant_differs_only_in_one_cross_term():
    # evaluating the second rotation at the current intermediate state
    # (the Poisson-map reading) adds s2*(0, y2 y3, -y2^2) to the h*dW2
    # coefficient and changes nothing else at raw degree <= 2
    mb = mb_system()
    st = make_stepper("mb-splitting")
    for y in random_points(10, seed=7):
        table = method_coefficients(st, mb, y, 4)
        for entries, expect in mb_expected_d(y, 1.0, 1.0).items():
            got = table.entries[MultiIndex(entries)]
            if entries == (1, 0, 1):
                expect = expect + np.array([0.0, y[1] * y[2], -y[1] ** 2])
            assert np.max(np.abs(got - expect)) <= 1e-10, entries


@pytest.mark.parametrize("stepper_label", ["mb-splitting", "mb-splitting-frozen"])
def test_worked_modified_coefficients_both_paths(stepper_label):
    mb = mb_system()
    st = make_stepper(stepper_label)
    a200 = MultiIndex((2, 0, 0))
    a020 = MultiIndex((0, 2, 0))
    for y in random_points(10, seed=31):
        table = method_coefficients(st, mb, y, 4)
        fld = modified_coefficients_matching(table, mb)
        expect = mb_expected_f200(y)
        assert np.max(np.abs(fld.coefficient(a200) - expect)) <= 1e-10
        assert np.max(np.abs(fld.coefficient(a020))) <= 1e-10
        assert np.max(np.abs(modified_coefficients_direct(table, mb, a200) - expect)) <= 1e-10
        assert np.max(np.abs(modified_coefficients_direct(table, mb, a020))) <= 1e-10


def test_direct_equals_matching_on_low_orders():
    dw_sys = make_system("double-well", sigma=(0.4, 0.7))
    st = make_stepper("midpoint")
    y = np.array([0.8, -1.1])
    table = method_coefficients(st, dw_sys, y, 4)
    fld = modified_coefficients_matching(table, dw_sys)
    for alpha in table.entries:
        if alpha.order <= 2:
            direct = modified_coefficients_direct(table, dw_sys, alpha)
            assert np.max(np.abs(direct - fld.coefficient(alpha))) <= 1e-10, alpha


def test_direct_rejects_high_orders():
    mb = mb_system()
    table = method_coefficients(make_stepper("mb-splitting"), mb,
                                np.array([1.0, 2.0, 3.0]), 4)
    with pytest.raises(ValueError):
        modified_coefficients_direct(table, mb, MultiIndex((1, 1, 1)))


def test_weight_one_seeds_recursion():
    mb = mb_system()
    table = method_coefficients(make_stepper("mb-splitting"), mb,
                                np.array([1.0, 2.0, 3.0]), 4)
    for pos in range(3):
        alpha = MultiIndex.unit(2, pos)
        assert np.array_equal(modified_coefficients_direct(table, mb, alpha),
                              table.entries[alpha])


def test_method_table_rejected_for_inconsistent_stepper():
    class Drifter:
        label = "drifter"
        algebra_generic = True

        def step(self, sys, y, h, dw):
            return [y[i] + h * (i + 1.0) for i in range(len(y))]

    mb = mb_system()
    with pytest.raises(ConsistencyError):
        method_coefficients(Drifter(), mb, np.array([1.0, 2.0, 3.0]), 4)


def test_flow_coefficients_of_linear_field():
    # no noise: phi at h^k must be A^k y / k!
    from spint import canonical_system
    from spint import algebra as alg
    osc_ham = ScalarField(value=lambda y: 0.5 * (y[0] * y[0] + y[1] * y[1]),
                          gradient=lambda y: alg.as_vector([y[0], y[1]]))
    sys = canonical_system(1, osc_ham, (), label="linear-test")
    y = np.array([0.7, -0.4])
    table = flow_coefficients(sys, y, 6)
    a = sys.constant_structure
    for k in range(1, 4):
        alpha = MultiIndex((k,))
        expect = np.linalg.matrix_power(a, k) @ y / math.factorial(k)
        assert np.max(np.abs(table.entries[alpha] - expect)) <= 1e-12


def test_flow_coefficients_weight_one_and_noise_square():
    s1, s2 = 0.8, 0.5
    mb = mb_system(s1, s2)
    y = np.array([1.2, -0.9, 0.6])
    table = flow_coefficients(mb, y, 4)
    assert np.allclose(table.entries[MultiIndex((1, 0, 0))], mb.drift(y), atol=1e-12)
    assert np.allclose(table.entries[MultiIndex((0, 1, 0))], mb.diffusion(1, y), atol=1e-12)
    # phi_(0,2,0) = (1/2) g1' g1 = (s1^2/2) (0, -y1^2 y2, -y1^2 y3)
    expect = 0.5 * s1 ** 2 * np.array([0.0, -y[0] ** 2 * y[1], -y[0] ** 2 * y[2]])
    assert np.max(np.abs(table.entries[MultiIndex((0, 2, 0))] - expect)) <= 1e-12


def test_flow_table_matches_ode_solve():
    # summing the flow table at concrete (h, dW) must agree with a tight
    # ODE solve of the frozen-increment field
    from scipy.integrate import solve_ivp

    mb = mb_system(0.8, 0.5)
    y = np.array([1.1, 0.7, -0.3])
    h = 0.01
    dw = np.array([0.004, -0.006])
    table = flow_coefficients(mb, y, 6)
    step = y.copy()
    for alpha, vec in table.entries.items():
        step = step + vec * h ** alpha[0] * dw[0] ** alpha[1] * dw[1] ** alpha[2]
    field = mb.wz_field(dw, h)
    sol = solve_ivp(lambda t, s: np.asarray(field(s), dtype=float), (0.0, h), y,
                    rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(step - sol.y[:, -1])) <= 1e-8


def test_round_trip_flow_of_matching():
    for label, sys, y in (
            ("mb-splitting", mb_system(), np.array([1.0, 2.0, 3.0])),
            ("midpoint", make_system("pendulum"), np.array([0.7, 1.3]))):
        table = method_coefficients(make_stepper(label), sys, y, 6)
        fld = modified_coefficients_matching(table, sys)
        back = flow_of_modified_field(fld)
        for alpha, vec in table.entries.items():
            assert np.max(np.abs(back.entries[alpha] - vec)) <= 1e-10, (label, alpha)


def test_exact_flow_has_trivial_modified_equation():
    pend = make_system("pendulum")
    y = np.array([0.9, 1.4])
    table = flow_coefficients(pend, y, 6)
    fld = modified_coefficients_matching(table, pend)
    for alpha, vec in fld.table.entries.items():
        if alpha.order >= 2:
            assert np.max(np.abs(vec)) <= 1e-12, alpha
    eo = effective_order(fld, 1e-9)
    assert eo.saturated


def test_order_conditions_midpoint_on_proportional_pendulum():
    pend = make_system("pendulum", sigma=(0.3, 0.2, 0.4))
    y = np.array([0.7, 1.3])
    flow = flow_coefficients(pend, y, 6)
    method = method_coefficients(make_stepper("midpoint"), pend, y, 6)
    assert abs(order_condition_residual(flow, method, 1)) <= 1e-12
    assert abs(order_condition_residual(flow, method, 2)) <= 1e-12
    assert abs(order_condition_residual(flow, method, 3)) > 1e-10


def test_order_condition_exact_flow_and_symmetry():
    mb = mb_system(0.6, 0.9)
    y = np.array([1.1, -0.8, 0.7])
    flow = flow_coefficients(mb, y, 6)
    method = method_coefficients(make_stepper("mb-splitting"), mb, y, 6)
    for k in (1, 2, 3):
        assert order_condition_residual(flow, flow, k) == 0.0
    assert abs(order_condition_residual(flow, method, 1)) <= 1e-12
    # swapping the table roles leaves the quadratic form unchanged
    a = order_condition_residual(flow, method, 2)
    b = order_condition_residual(method, flow, 2)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_order_condition_needs_enough_weight():
    mb = mb_system()
    y = np.array([1.0, 2.0, 3.0])
    flow = flow_coefficients(mb, y, 4)
    method = method_coefficients(make_stepper("mb-splitting"), mb, y, 4)
    with pytest.raises(ValueError):
        order_condition_residual(flow, method, 3)


def test_effective_order_of_the_catalog_schemes():
    mb = mb_system()
    table = method_coefficients(make_stepper("mb-splitting"), mb,
                                np.array([1.0, 2.0, 3.0]), 6)
    fld = modified_coefficients_matching(table, mb)
    assert effective_order(fld, 1e-9).p == 2
    # the noise-pair class vanishes but the cross term survives
    assert np.max(np.abs(fld.coefficient(MultiIndex((0, 1, 1))))) > 1e-6

    pend = make_system("pendulum", sigma=(0.3, 0.2, 0.4))
    table = method_coefficients(make_stepper("midpoint"), pend,
                                np.array([0.7, 1.3]), 6)
    fld = modified_coefficients_matching(table, pend)
    assert effective_order(fld, 1e-9).p == 3


def test_regrouping_matches_channel_rule():
    dw_sys = make_system("double-well", sigma=(0.5, 0.5))
    table = method_coefficients(make_stepper("heun"), dw_sys,
                                np.array([0.6, -0.9]), 4)
    fld = modified_coefficients_matching(table, dw_sys)
    grouped = regroup_modified_field(fld)
    drift_keys = {a.entries for a in grouped.drift_terms}
    ch1 = {a.entries for a in grouped.diffusion_terms[0]}
    ch2 = {a.entries for a in grouped.diffusion_terms[1]}
    assert (1, 0, 0) in drift_keys and (2, 0, 0) in drift_keys
    assert all(a[1] == a[2] == 0 for a in drift_keys)
    # the displayed two-noise grouping: channel 1 takes w1^2, w1 w2, h w1
    assert {(0, 1, 0), (0, 2, 0), (0, 1, 1), (1, 1, 0)} <= ch1
    assert {(0, 0, 1), (0, 0, 2), (1, 0, 1)} <= ch2
    # every noise-carrying index sits in the channel of its minimal
    # nonzero exponent, ties resolved to the smaller channel
    for r, channel in enumerate(grouped.diffusion_terms):
        for a in channel:
            noise = a.entries[1:]
            assert noise[r] > 0
            assert min((e, i) for i, e in enumerate(noise) if e > 0)[1] == r
    # partition: every table index lands in exactly one bucket
    total = len(grouped.drift_terms) + sum(len(c) for c in grouped.diffusion_terms)
    assert total == len(fld.table.entries)


def test_regrouping_reassembles_field_value():
    dw_sys = make_system("double-well", sigma=(0.5, 0.5))
    y0 = np.array([0.6, -0.9])
    table = method_coefficients(make_stepper("midpoint"), dw_sys, y0, 4)
    fld = modified_coefficients_matching(table, dw_sys)
    grouped = regroup_modified_field(fld)
    h = 0.05
    dw = np.array([0.02, -0.03])
    y = y0 + 0.01
    direct = fld.evaluate(y, h, dw)

    def monomial(alpha):
        return h ** alpha[0] * dw[0] ** alpha[1] * dw[1] ** alpha[2]

    assembled = np.zeros(2)
    for alpha in grouped.drift_terms:
        assembled += fld.coefficient_at(alpha, y) * monomial(alpha) / h
    for r, channel in enumerate(grouped.diffusion_terms, start=1):
        for alpha in channel:
            g_part = fld.coefficient_at(alpha, y) * monomial(alpha) / dw[r - 1]
            assembled += g_part * dw[r - 1] / h
    assert np.max(np.abs(assembled - direct)) <= 1e-12


def test_table_norms_stay_inside_geometric_envelope():
    # analyticity of the right-hand sides keeps expansion coefficients
    # under geometric growth in the weight; checked as finiteness plus a
    # generous per-weight ratio bound, not as exact constants
    mb = mb_system()
    table = method_coefficients(make_stepper("mb-splitting"), mb,
                                np.array([1.0, 2.0, 3.0]), 6)
    fld = modified_coefficients_matching(table, mb)
    for entries in (table.entries, fld.table.entries):
        by_weight = {}
        for alpha, vec in entries.items():
            assert np.all(np.isfinite(vec))
            w = alpha.weight
            by_weight[w] = max(by_weight.get(w, 0.0), float(np.max(np.abs(vec))))
        base = max(by_weight[1], 1e-12)
        for w, norm in by_weight.items():
            assert norm <= base * 4.0 ** (w - 1)


def test_poisson_certificate_worked_hamiltonian():
    mb = mb_system()
    half_y1y2 = ScalarField(
        value=lambda y: 0.5 * y[0] * y[1],
        gradient=lambda y: np.array([0.5 * y[1], 0.5 * y[0], 0.0 * y[2]]))
    zero = ScalarField(value=lambda y: 0.0 * y[0],
                       gradient=lambda y: np.array([0.0, 0.0, 0.0]))
    for y in random_points(10, seed=77):
        table = method_coefficients(make_stepper("mb-splitting"), mb, y, 4)
        fld = modified_coefficients_matching(table, mb)
        cert = poisson_certificate(
            fld, mb, candidates=[(MultiIndex((2, 0, 0)), half_y1y2),
                                 (MultiIndex((0, 2, 0)), zero)])
        res, sign = cert.candidate_residuals[MultiIndex((2, 0, 0))]
        assert res <= 1e-10
        assert sign == -1  # f_(2,0,0) = B grad(-y1 y2 / 2) at every point
        res0, _ = cert.candidate_residuals[MultiIndex((0, 2, 0))]
        assert res0 <= 1e-10
        assert cert.casimir_tangency <= 1e-10


def test_poisson_certificate_canonical_symmetry():
    pend = make_system("pendulum")
    y = np.array([0.7, 1.3])
    table = method_coefficients(make_stepper("midpoint"), pend, y, 5)
    fld = modified_coefficients_matching(table, pend)
    cert = poisson_certificate(fld, pend)
    assert cert.jacobian_asymmetry is not None
    assert cert.jacobian_asymmetry <= 1e-9


def test_modified_field_evaluate_near_base():
    # the displacement polynomials must agree with a fresh table computed
    # at the nearby point, up to the polynomial truncation error
    mb = mb_system(0.3, 0.4)
    y0 = np.array([1.0, 2.0, 3.0])
    table0 = method_coefficients(make_stepper("mb-splitting"), mb, y0, 4)
    fld0 = modified_coefficients_matching(table0, mb)
    y1 = y0 + np.array([0.01, -0.02, 0.015])
    table1 = method_coefficients(make_stepper("mb-splitting"), mb, y1, 4)
    fld1 = modified_coefficients_matching(table1, mb)
    h, dw = 0.05, np.array([0.01, -0.02])
    extrapolated = fld0.evaluate(y1, h, dw)
    fresh = fld1.evaluate(y1, h, dw)
    assert np.max(np.abs(extrapolated - fresh)) <= 1e-6
    # and the weight-1 part at the base point is the frozen-increment field
    wz = np.asarray(mb.wz_field(dw, h)(y0), dtype=float)
    weight_one = sum(fld0.coefficient(a) * h ** (a[0] - 1) * dw[0] ** a[1] * dw[1] ** a[2]
                     for a in table0.entries if a.order == 1)
    assert np.max(np.abs(weight_one - wz)) <= 1e-12

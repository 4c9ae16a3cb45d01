import math

import numpy as np
import pytest

from spint import DomainError, Jet, jet_space


def random_jet(space, rng, scale=1.0, constant=None):
    coeffs = rng.uniform(-scale, scale, size=space.size)
    if constant is not None:
        coeffs[0] = constant
    return Jet(space, coeffs)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=np.array([3, 0], dtype=np.uint64)))


@pytest.fixture
def space():
    # step-size variable (weight 2) plus two increment variables
    return jet_space((2, 1, 1), 4)


def test_cos_of_linear_jet():
    sp = jet_space((2, 1), 2)
    w = sp.variable(1)
    c = w.cos()
    assert c.coefficient((0, 0)) == 1.0
    assert c.coefficient((0, 1)) == 0.0
    assert c.coefficient((0, 2)) == -0.5


def test_exp_of_zero_jet():
    sp = jet_space((2, 1), 4)
    e = sp.zero().exp()
    assert e.value == 1.0
    assert np.count_nonzero(e.coeffs) == 1


def finite_difference_log_coefficients(eps=1e-3):
    """Taylor coefficients of ln(1+x) at 0 from central differences."""
    f = lambda x: math.log1p(x)
    d1 = (f(eps) - f(-eps)) / (2 * eps)
    d2 = (f(eps) - 2 * f(0.0) + f(-eps)) / eps ** 2
    d3 = (f(2 * eps) - 2 * f(eps) + 2 * f(-eps) - f(-2 * eps)) / (2 * eps ** 3)
    return [f(0.0), d1, d2 / 2.0, d3 / 6.0]


def test_log_of_one_plus_w():
    # oracle: high-precision finite differences of ln(1+x), frozen values
    oracle = finite_difference_log_coefficients()
    frozen = [0.0, 1.0, -0.5, 1.0 / 3.0]
    assert np.allclose(oracle, frozen, atol=5e-6)
    sp = jet_space((1,), 3)
    l = (1.0 + sp.variable(0)).log()
    got = [l.coefficient((k,)) for k in range(4)]
    assert np.allclose(got, frozen, atol=1e-14)


def test_commutativity_and_distributivity(space, rng):
    for _ in range(10):
        a = random_jet(space, rng)
        b = random_jet(space, rng)
        c = random_jet(space, rng)
        ab = (a * b).coeffs
        ba = (b * a).coeffs
        scale = np.max(np.abs(ab)) + 1.0
        assert np.max(np.abs(ab - ba)) <= 1e-14 * scale
        lhs = ((a + b) * c).coeffs
        rhs = (a * c + b * c).coeffs
        scale = np.max(np.abs(lhs)) + 1.0
        assert np.max(np.abs(lhs - rhs)) <= 1e-14 * scale


def test_truncation_by_weight(space):
    h = space.variable(0)
    w = space.variable(1)
    prod = h * h * w  # weight 5 > 4: everything truncated away
    assert np.count_nonzero(prod.coeffs) == 0
    kept = h * w * w  # weight 4 survives
    assert kept.coefficient((1, 2, 0)) == 1.0


def test_pythagorean_identity(space, rng):
    j = random_jet(space, rng, scale=0.4, constant=0.7)
    one = (j.sin() ** 2 + j.cos() ** 2).coeffs
    expect = np.zeros_like(one)
    expect[0] = 1.0
    assert np.max(np.abs(one - expect)) <= 1e-13


def test_exp_log_roundtrip(space, rng):
    j = random_jet(space, rng, scale=0.3, constant=1.4)
    back = j.log().exp()
    assert np.max(np.abs(back.coeffs - j.coeffs)) <= 1e-13


def test_sqrt_squares(space, rng):
    j = random_jet(space, rng, scale=0.3, constant=2.2)
    sq = j.sqrt() ** 2
    assert np.max(np.abs(sq.coeffs - j.coeffs)) <= 1e-13


def test_division_roundtrip(space, rng):
    a = random_jet(space, rng)
    b = random_jet(space, rng, constant=1.7)
    back = (a / b) * b
    assert np.max(np.abs(back.coeffs - a.coeffs)) <= 1e-12


def test_scalar_mixing(space):
    h = space.variable(0)
    j = 2.0 + 3.0 * h - h / 2.0
    assert j.value == 2.0
    assert j.coefficient((1, 0, 0)) == 2.5
    assert (1.0 - j).value == -1.0


def test_domain_errors(space):
    bad = space.constant(-1.0) + space.variable(1)
    with pytest.raises(DomainError):
        bad.log()
    with pytest.raises(DomainError):
        bad.sqrt()
    zero_const = space.variable(1)
    with pytest.raises(DomainError):
        (1.0 / zero_const)


def test_mixed_space_rejected():
    a = jet_space((1, 1), 2).variable(0)
    b = jet_space((1, 1), 3).variable(0)
    with pytest.raises(ValueError):
        a * b


def test_derivative_tracks_exponents():
    sp = jet_space((1, 1), 3)
    x, y = sp.variable(0), sp.variable(1)
    p = x * x * y + 2.0 * x
    dp = p.derivative(0)
    assert dp.coefficient((1, 1)) == 2.0
    assert dp.coefficient((0, 0)) == 2.0


def test_degree_capped_variables():
    # weight-0 displacement variables are bounded by plain degree
    sp = jet_space((2, 1, 0), 3, degree_caps=(((2,), 2),))
    d = sp.variable(2)
    assert np.count_nonzero((d ** 3).coeffs) == 0
    assert (d ** 2).coefficient((0, 0, 2)) == 1.0
    with pytest.raises(ValueError):
        jet_space((2, 0), 3)  # uncapped weight-0 variable

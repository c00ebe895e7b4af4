import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schwarzkit import jets
from schwarzkit.errors import BranchCutError, DomainError, JetError
from schwarzkit.expr import eval_jet, eval_jet2, parse
from schwarzkit.jets import Jet1, Jet2, jet_compose, pole_normalize

small = st.complex_numbers(max_magnitude=0.7, allow_nan=False, allow_infinity=False)


def fd_derivative(fn, z, h=1e-4):
    # fourth-order central difference along the real axis
    return (-fn(z + 2 * h) + 8 * fn(z + h) - 8 * fn(z - h) + fn(z - 2 * h)) / (12 * h)


def test_variable_and_constant():
    v = Jet1.variable(0.5, 3)
    assert np.allclose(v.coeffs, [0.5, 1, 0, 0])
    c = Jet1.constant(2.0, 0.5, 3)
    assert np.allclose(c.coeffs, [2, 0, 0, 0])


def test_polynomial_jets_exact():
    j = eval_jet(parse("z^3 - 2*z + 1"), 2.0, 5)
    # f(2+w) = 5 + 10 w + 6 w^2 + w^3
    assert np.array_equal(j.coeffs, np.array([5, 10, 6, 1, 0, 0], dtype=complex))


def test_exp_jet_matches_factorials():
    j = eval_jet(parse("exp(z)"), 0.0, 8)
    assert np.allclose(j.coeffs, [1 / math.factorial(k) for k in range(9)], rtol=1e-15)


@pytest.mark.parametrize("src,fn", [
    ("exp(z)*sin(z)", lambda z: np.exp(z) * np.sin(z)),
    ("log(1+z)/(2-z)", lambda z: np.log(1 + z) / (2 - z)),
    ("sqrt(1+z^2)", lambda z: np.sqrt(1 + z * z)),
    ("(1+z)^(1/3)", lambda z: (1 + z) ** (1 / 3)),
])
def test_first_derivative_against_finite_differences(src, fn):
    for z in (0.1, 0.3 + 0.2j, -0.4j):
        j = eval_jet(parse(src), z, 3)
        assert abs(j.coeffs[1] - fd_derivative(fn, z)) < 1e-9


@given(small, small)
def test_product_rule(a, z):
    f = eval_jet(parse("exp(z)"), z, 4)
    g = Jet1.variable(z, 4) + a
    lhs = (f * g).derivative()
    rhs = f.derivative() * g + f * g.derivative()
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


@given(small)
def test_division_inverts_multiplication(z):
    f = eval_jet(parse("2+sin(z)"), z, 5)
    g = eval_jet(parse("3+z^2"), z, 5)
    assert np.allclose(((f * g) / g).coeffs, f.coeffs, atol=1e-12)


def test_laurent_division_has_pole():
    w = Jet1.variable(0.0, 4)
    inv = 1.0 / w
    assert inv.is_pole and inv.pole_order == 1
    assert np.allclose(inv.coeffs[..., 0], 1)
    assert np.isinf(inv.value)


def test_pole_normalize_flips_poles():
    j = eval_jet(parse("1/z"), 0.0, 4)
    g, flipped = pole_normalize(j)
    assert bool(flipped) and not g.is_pole
    assert np.allclose(g.coeffs[:2], [0, 1])


def test_pole_normalize_leaves_regular_jet():
    j = eval_jet(parse("2+z"), 0.1, 3)
    g, flipped = pole_normalize(j)
    assert not np.any(flipped) and g is j


def test_composition_matches_direct_evaluation():
    z0 = 0.2 + 0.1j
    inner = eval_jet(parse("sin(z)"), z0, 5)
    outer = eval_jet(parse("exp(z)"), inner.value, 5)
    direct = eval_jet(parse("exp(sin(z))"), z0, 5)
    assert np.allclose(jet_compose(outer, inner).coeffs, direct.coeffs, atol=1e-13)


def test_batched_scalar_agreement():
    pts = np.array([0.1, 0.2 + 0.3j, -0.5])
    batch = eval_jet(parse("log(1+z)*exp(z)"), pts, 4)
    for k, p in enumerate(pts):
        single = eval_jet(parse("log(1+z)*exp(z)"), p, 4)
        assert np.allclose(batch.coeffs[k], single.coeffs, atol=1e-14)


def test_scalar_branch_cut_raises_but_batch_gives_nan():
    with pytest.raises(BranchCutError):
        eval_jet(parse("log(z)"), -1.0, 2)
    with pytest.raises(DomainError):
        eval_jet(parse("log(z)"), 0.0, 2)
    out = eval_jet(parse("log(z)"), np.array([-1.0, 1.0]), 2)
    assert np.isnan(out.coeffs[0, 0]) and np.isfinite(out.coeffs[1, 0])


def test_base_mismatch_is_an_error():
    with pytest.raises(JetError):
        Jet1.variable(0.1, 2) + Jet1.variable(0.2, 2)


def test_truncate():
    j = eval_jet(parse("exp(z)"), 0.0, 6).truncate(2)
    assert j.order == 2 and j.length == 3


# --- bivariate jets -------------------------------------------------------

def test_jet2_coordinates():
    z0 = 0.3 + 0.1j
    j = eval_jet2(parse("z*zbar"), z0, 3)
    assert abs(j.value - abs(z0) ** 2) < 1e-15
    assert abs(j.d().value - np.conj(z0)) < 1e-15
    assert abs(j.dbar().value - z0) < 1e-15
    assert abs(j.coeff(1, 1) - 1) < 1e-15


@given(small)
def test_wirtinger_derivatives_commute(z0):
    j = eval_jet2(parse("exp(z*zbar)/(2+z-zbar)"), z0, 5)
    assert np.allclose(j.d().dbar().coeffs, j.dbar().d().coeffs, atol=1e-11)


@given(small)
def test_laplacian_of_log_density(z0):
    # ∂∂̄ log(1-|z|^2)^-1 = (1-|z|^2)^-2
    j = jets.log(eval_jet2(parse("1/(1-z*zbar)"), z0, 3))
    assert abs(j.d().dbar().value - (1 - abs(z0) ** 2) ** -2) < 1e-10


def test_jet2_real_density_is_self_conjugate():
    j = eval_jet2(parse("exp((z+zbar)/2)"), 0.2 - 0.3j, 4)
    sq = j.to_square()
    assert np.allclose(sq, np.conj(sq.T), atol=1e-15)


def test_holomorphic_lift_has_no_zbar_terms():
    f = eval_jet(parse("exp(z)"), 0.25, 4)
    assert f.lift().is_holomorphic()
    assert not eval_jet2(parse("z*zbar"), 0.25, 3).is_holomorphic()


def test_wirtinger_d_names():
    j = eval_jet2(parse("z^2*zbar"), 0.5, 3)
    assert abs(jets.wirtinger_d(j, "d").value - 0.5) < 1e-15
    assert abs(jets.wirtinger_d(j, "dbar").value - 0.25) < 1e-15
    with pytest.raises(ValueError):
        jets.wirtinger_d(j, "x")


def test_compose_holomorphic():
    # rho(g(w)) for rho = exp(z+zbar) and g = 2w: exp(2w+2wbar)
    z0 = 0.1 + 0.05j
    outer = eval_jet2(parse("exp(z+zbar)"), 2 * z0, 3)
    inner = eval_jet(parse("2*z"), z0, 3)
    direct = eval_jet2(parse("exp(2*z+2*zbar)"), z0, 3)
    assert np.allclose(outer.compose_holomorphic(inner).coeffs, direct.coeffs, atol=1e-13)

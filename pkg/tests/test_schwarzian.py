from math import factorial

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from conftest import CORPUS, KOEBE, LOGF, disk_points
from schwarzkit import metric
from schwarzkit.errors import CriticalPointError, JetError
from schwarzkit.metric import EUCLIDEAN, HYPERBOLIC, SPHERICAL
from schwarzkit.mobius import (Mobius, random_disk_automorphism, random_mobius,
                               random_spherical_rotation)
from schwarzkit.schwarzian import (IDENTITIES, PSI_ROUTES, SIGMA_ROUTES, TAMANOI_ROUTES, Function,
                                   aharonov_psi, apply_operator, classical_S, identity_check,
                                   invariant_sigma, minimal_order, operator_weight,
                                   parse_operator, peschl_minda_D, peschl_minda_Q, projective_D,
                                   projective_V, projective_V4_explicit, relative_residual,
                                   tamanoi_S, transformation_residual)

z_ = sp.Symbol("z")
SYMPY = {
    KOEBE: z_ / (1 - z_) ** 2,
    LOGF: sp.log((1 + z_) / (1 - z_)),
    "exp(2*z)": sp.exp(2 * z_),
    "z+z^3/7": z_ + z_ ** 3 / 7,
    "tan(z)": sp.sin(z_) / sp.cos(z_),
}
SYMPY_SRC = {"tan(z)": "sin(z)/cos(z)"}
ER = metric.custom("exp((z+zbar)/2)")
inside = st.complex_numbers(max_magnitude=0.7, allow_nan=False, allow_infinity=False)


def sym_S(expr):
    d1, d2, d3 = (sp.diff(expr, z_, k) for k in (1, 2, 3))
    return sp.simplify(d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2)


def oracle_S(key, k=0):
    return sp.lambdify(z_, sp.diff(sym_S(SYMPY[key]), z_, k), "numpy")


def oracle_psi(key, n, z0):
    w = sp.Symbol("w")
    f = SYMPY[key]
    expr = sp.diff(f, z_).subs(z_, z0) / (f.subs(z_, z0 + w) - f.subs(z_, z0))
    c = sp.series(expr, w, 0, n).removeO().coeff(w, n - 1)
    return -complex(sp.N(c, 30))


# --- classical and Tamanoi -------------------------------------------------

@pytest.mark.parametrize("key", list(SYMPY))
def test_classical_S_against_sympy(key):
    src = SYMPY_SRC.get(key, key)
    fn = oracle_S(key)
    pts = disk_points(25, 0.7, seed=5)
    assert np.allclose(classical_S(src, pts), fn(pts), rtol=1e-10, atol=1e-10)


def test_classical_examples():
    assert abs(classical_S(KOEBE, 0) + 6) < 1e-12
    assert abs(classical_S(LOGF, 0) - 2) < 1e-12
    assert abs(classical_S("exp(2*z)", 0.4 - 0.1j) + 2) < 1e-12
    assert abs(classical_S("(2*z+1)/(z-3)", 0.2)) < 1e-12


@pytest.mark.parametrize("route", TAMANOI_ROUTES)
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_tamanoi_against_sympy_derivatives(route, n):
    # S_3 = (Sf)', S_4 = (Sf)'' + 4 (Sf)^2, S_5 = (Sf)''' + 13 Sf (Sf)'
    s = [oracle_S(KOEBE, k) for k in range(4)]
    z = 0.3 + 0.2j
    want = {2: s[0](z), 3: s[1](z), 4: s[2](z) + 4 * s[0](z) ** 2,
            5: s[3](z) + 13 * s[0](z) * s[1](z)}[n]
    assert relative_residual(tamanoi_S(KOEBE, n, z, route=route), want) < 1e-10


def test_tamanoi_koebe_at_zero():
    assert abs(tamanoi_S(KOEBE, 3, 0)) < 1e-12
    assert abs(tamanoi_S(KOEBE, 4, 0) - 120) < 1e-9


def test_tamanoi_low_orders():
    for route in TAMANOI_ROUTES:
        assert tamanoi_S(LOGF, 0, 0.1, route=route) == pytest.approx(1)
        assert abs(tamanoi_S(LOGF, 1, 0.1, route=route)) < 1e-14
        assert abs(tamanoi_S("exp(2*z)", 3, 0.2 + 0.1j, route=route)) < 1e-12


@pytest.mark.parametrize("key", CORPUS)
def test_routes_agree(key):
    pts = disk_points(20, 0.8, seed=11)
    for n in range(2, 7):
        ref = tamanoi_S(key, n, pts, route="poly")
        for route in TAMANOI_ROUTES:
            assert np.nanmax(relative_residual(tamanoi_S(key, n, pts, route=route), ref)) < 1e-9
        ref = aharonov_psi(key, n, pts, route="series")
        assert np.nanmax(relative_residual(aharonov_psi(key, n, pts, route="relation"), ref)) < 1e-9


@pytest.mark.parametrize("key,n,z0", [(KOEBE, 3, sp.Rational(1, 5)), (LOGF, 4, sp.Rational(3, 10)),
                                      ("exp(2*z)", 2, sp.Rational(1, 10))])
def test_psi_against_sympy_series(key, n, z0):
    for route in PSI_ROUTES:
        got = aharonov_psi(key, n, float(z0), route=route)
        assert relative_residual(got, oracle_psi(key, n, z0)) < 1e-10


def test_psi_relations():
    z = 0.25 - 0.3j
    assert abs(6 * aharonov_psi(KOEBE, 2, z) - classical_S(KOEBE, z)) < 1e-10
    assert abs(24 * aharonov_psi(KOEBE, 3, z) - tamanoi_S(KOEBE, 3, z)) < 1e-10
    # psi_1 = f''/(2f')
    assert abs(aharonov_psi(KOEBE, 1, 0) - 2) < 1e-12


def test_mobius_post_composition_invariance(rng):
    pts = disk_points(10, 0.6, seed=2)
    for _ in range(3):
        M = random_mobius(rng)
        g = Function.from_mobius(M).compose(Function.from_expr(LOGF))
        for n in range(2, 6):
            assert np.nanmax(relative_residual(tamanoi_S(g, n, pts), tamanoi_S(LOGF, n, pts))) < 1e-8


def test_pole_of_f_is_handled():
    # 1/z has Sf = 0 everywhere, including at its pole
    assert abs(classical_S("1/z", 0.0)) < 1e-12
    assert abs(classical_S("1/(z-0.3)", 0.3)) < 1e-12


@pytest.mark.parametrize("eps", [1e-3, 1e-7, 1e-11, 1e-14, 0.0])
def test_near_pole_stays_conditioned(eps):
    # the forward jet of a Möbius map near its pole has coefficients ~ eps^-k;
    # every Schwarzian-type quantity must still vanish to rounding
    M = Mobius(-0.05 - 1.4j, -0.39 - 0.85j, -1.29 - 0.69j, -0.97 + 0.6j)
    p = complex(-M.d / M.c)
    z = p + eps * np.exp(0.3j)
    f = Function.from_mobius(M)
    g = Function.from_expr(f"1/(z-({p.real!r}+{p.imag!r}i))")
    for h in (f, g, Function.from_mobius(Mobius(1, 2j, 3, 1)).compose(f)):
        assert abs(classical_S(h, z)) < 1e-10
        assert abs(tamanoi_S(h, 4, z)) < 1e-10
        assert abs(projective_V(h, 3, z)) < 1e-10
        assert abs(invariant_sigma(h, 3, z)) < 1e-10


def test_koebe_near_the_rim():
    z = 0.999
    want = -6 / (1 - z * z) ** 2
    assert abs(classical_S(KOEBE, z) - want) < 1e-9 * abs(want)
    raw = Function.from_expr(KOEBE).jet(z, 4)
    assert np.all(np.isfinite(raw.coeffs))


def test_critical_point():
    with pytest.raises(CriticalPointError):
        classical_S("z^2", 0.0)
    out = classical_S("z^2", np.array([0.0, 0.5]))
    assert np.isnan(out[0]) and np.isfinite(out[1])


def test_order_too_low():
    with pytest.raises(JetError):
        tamanoi_S(KOEBE, 4, 0.1, order=2)


# --- Peschl-Minda and Sigma --------------------------------------------------

@given(inside)
def test_peschl_minda_closed_forms(z):
    f = Function.from_expr("exp(z)+z^2", target=EUCLIDEAN)
    t = 1 - abs(z) ** 2
    fp, fpp = np.exp(z) + 2 * z, np.exp(z) + 2
    assert abs(peschl_minda_D(f, 1, z) - t * fp) < 1e-10
    want = t ** 2 * fpp - 2 * np.conj(z) * t * fp
    assert abs(peschl_minda_D(f, 2, z) - want) < 1e-9 * max(1, abs(want))
    assert abs(peschl_minda_Q(f, 1, z) - want / (t * fp)) < 1e-9 * max(1, abs(want / (t * fp)))


def test_spherical_D1():
    z = 0.3 + 0.1j
    f = Function.from_expr("2*z+1")
    want = (1 - abs(z) ** 2) * 2 / (1 + abs(2 * z + 1) ** 2)
    assert abs(peschl_minda_D(f, 1, z) - want) < 1e-13


@pytest.mark.parametrize("key", [KOEBE, LOGF, "exp(2*z)"])
def test_sigma_standard_metrics(key):
    pts = disk_points(20, 0.7, seed=8)
    t = 1 - np.abs(pts) ** 2
    for route in SIGMA_ROUTES:
        s2 = invariant_sigma(key, 2, pts, route=route)
        assert np.nanmax(relative_residual(s2, t ** 2 * classical_S(key, pts))) < 1e-9
        s3 = invariant_sigma(key, 3, pts, route=route)
        assert np.nanmax(relative_residual(s3, t ** 3 * projective_V(key, 3, pts))) < 1e-9


# --- projective ------------------------------------------------------------

@pytest.mark.parametrize("key", [KOEBE, LOGF, "z+z^3/7"])
def test_V3_explicit_formula(key):
    d0, d1 = oracle_S(key), oracle_S(key, 1)
    pts = disk_points(20, 0.8, seed=9)
    want = d1(pts) - 4 * np.conj(pts) / (1 - np.abs(pts) ** 2) * d0(pts)
    assert np.nanmax(relative_residual(projective_V(key, 3, pts), want)) < 1e-9


def test_euclidean_V_is_tamanoi():
    pts = disk_points(15, 0.7, seed=4)
    f = Function.from_expr(LOGF, source=EUCLIDEAN)
    for n in range(2, 7):
        assert np.nanmax(relative_residual(projective_V(f, n, pts), tamanoi_S(LOGF, n, pts))) < 1e-9


def test_V4_explicit_and_dproj():
    pts = disk_points(15, 0.8, seed=6)
    assert np.nanmax(relative_residual(projective_V(LOGF, 4, pts),
                                       projective_V4_explicit(LOGF, pts))) < 1e-9
    assert np.nanmax(relative_residual(projective_D(LOGF, 2, pts), classical_S(LOGF, pts))) < 1e-12
    # Sf = (1-z^2)^-2 gives D^3 = 1024i/375 at i/2
    mild = "((1+z)/(1-z))^(1/sqrt(2))"
    assert abs(projective_D(mild, 3, 0.5j) - 1024j / 375) < 1e-10


def test_V_at_origin_matches_psi3():
    f = "z+z^2/4"
    assert abs(projective_V(f, 3, 0) - 24 * aharonov_psi(f, 3, 0)) < 1e-10


# --- identities and transformation rules ------------------------------------

@pytest.mark.parametrize("which", IDENTITIES)
def test_identities(which):
    pts = disk_points(40, 0.8, seed=12)
    f = Function.from_expr(LOGF if which in ("sigma3", "v4_explicit") else KOEBE)
    assert np.nanmax(identity_check(which, f, pts, n=3)) < 1e-7


@pytest.mark.parametrize("which", ["sigma2", "sigma3", "q_derivative"])
def test_identities_with_curved_target(which):
    pts = disk_points(40, 0.6, seed=13)
    f = Function.from_expr("z+z^3/7", target=ER)
    assert np.nanmax(identity_check(which, f, pts)) < 1e-7


def test_identity_aliases():
    pts = disk_points(5, 0.5, seed=1)
    assert np.array_equal(identity_check("thm46", KOEBE, pts), identity_check("sigma2", KOEBE, pts))
    assert np.array_equal(identity_check("thm54", LOGF, pts), identity_check("sigma3", LOGF, pts))


def test_unknown_identity():
    with pytest.raises(ValueError):
        identity_check("nope", KOEBE, 0.1)


@pytest.mark.parametrize("kind,n", [("Q", 2), ("Q", 3), ("Sigma", 2), ("Sigma", 3),
                                    ("V", 3), ("V", 4)])
def test_transformation_rules(kind, n, rng):
    pts = disk_points(20, 0.5, seed=14)
    for _ in range(2):
        g = random_disk_automorphism(rng, 0.3)
        h = random_spherical_rotation(rng) if kind != "V" else random_mobius(rng)
        res = transformation_residual(kind, KOEBE, n, pts, g, h)
        assert np.nanmax(res) < 1e-7


def test_transformation_rule_curved_source(rng):
    f = Function.from_expr("exp(z/2)", source=ER, target=EUCLIDEAN)
    g = Mobius(1, 0.1, 0.05j, 1)
    h = Mobius(2, 1, 0, 1)
    pts = disk_points(20, 0.4, seed=15)
    for kind in ("Q", "Sigma", "V"):
        assert np.nanmax(transformation_residual(kind, f, 3, pts, g, h)) < 1e-7


# --- operator registry -------------------------------------------------------

def test_parse_operator():
    assert parse_operator("S") == ("S", 2)
    assert parse_operator("V:3") == ("V", 3)
    with pytest.raises(ValueError):
        parse_operator("W:2")
    with pytest.raises(ValueError):
        parse_operator("V:x")


def test_apply_operator_dispatch():
    z = 0.2 + 0.1j
    assert apply_operator(KOEBE, "S", z) == pytest.approx(classical_S(KOEBE, z))
    assert apply_operator(KOEBE, "Sn:4", z) == pytest.approx(tamanoi_S(KOEBE, 4, z))
    assert apply_operator(KOEBE, "V:3", z) == pytest.approx(projective_V(KOEBE, 3, z))
    assert operator_weight("V:3") == 3 and operator_weight("S") == 2
    assert minimal_order("V:3") >= 0


def test_minimal_order_agrees_with_default():
    pts = disk_points(10, 0.9, seed=16)
    for op in ("S", "V:3", "Sigma:3", "Q:2", "psi:3", "Sn:4"):
        a = apply_operator(KOEBE, op, pts, order=minimal_order(op))
        b = apply_operator(KOEBE, op, pts)
        assert np.nanmax(relative_residual(a, b)) < 1e-10

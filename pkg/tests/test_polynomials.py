from fractions import Fraction
from math import factorial

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from schwarzkit.polynomials import WeightedPoly, dump, gen_P, gen_T, poly_eval

X = sp.symbols("x1:13")


def to_sympy(p: WeightedPoly):
    out = sp.Integer(0)
    for mon, c in p.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for k, e in enumerate(mon):
            term *= X[k] ** e
        out += term
    return sp.expand(out)


def series_P(n):
    """Coefficient of w^(n+1)/(n+1)! in f'Δ / (f''Δ/2 + f'^2), Δ = f(z+w) - f(z).

    The quotient is invariant under f -> c f, so f' = 1 and f^(k+1) = x_k.
    """
    w = sp.Symbol("w")
    delta = w + sum(X[k - 2] * w ** k / factorial(k) for k in range(2, n + 3))
    inv = sp.series(1 / (X[0] * delta / 2 + 1), w, 0, n + 2).removeO()
    return sp.expand(sp.expand(delta * inv).coeff(w, n + 1) * factorial(n + 1))


@pytest.mark.parametrize("n", range(0, 9))
def test_P_matches_series_definition(n):
    assert to_sympy(gen_P(n)) == series_P(n)


def test_displayed_P_and_T():
    x = WeightedPoly.var
    assert gen_P(0) == WeightedPoly.const(1)
    assert gen_P(1) == WeightedPoly()
    assert gen_P(2) == x(2) - Fraction(3, 2) * x(1) * x(1)
    assert gen_P(3) == x(3) - 4 * x(1) * x(2) + 3 * x(1) * x(1) * x(1)
    assert gen_T(0) == WeightedPoly.const(1)
    assert gen_T(1) == WeightedPoly()
    assert gen_T(2) == x(2)
    assert gen_T(3) == x(3)
    assert gen_T(4) == x(4) + 4 * x(2) * x(2)
    assert gen_T(5) == x(5) + 13 * x(2) * x(3)


def test_string_forms():
    assert str(gen_P(2)) == "x2 - 3/2*x1^2"
    assert str(gen_T(5)) == "x5 + 13*x2*x3"


@pytest.mark.parametrize("n", range(2, 9))
def test_homogeneous_and_integral(n):
    assert gen_P(n).is_homogeneous(n)
    assert gen_T(n).is_homogeneous(n)
    assert gen_T(n).has_integer_coefficients()
    # x1 never enters T_n
    assert all(mon[0] == 0 for mon in gen_T(n).terms)


def _sympy_derivative_chain(n):
    """Exact S_n and (Sf)^(k) at 0 for a fixed polynomial f with rational coefficients."""
    z = sp.Symbol("z")
    f = z + sp.Rational(1, 3) * z ** 2 - sp.Rational(2, 7) * z ** 3 + sp.Rational(5, 11) * z ** 5
    d = [sp.diff(f, z, k) for k in range(n + 3)]
    S = sp.diff(d[2] / d[1], z) - (d[2] / d[1]) ** 2 / 2
    sf = [sp.diff(S, z, k).subs(z, 0) for k in range(n - 1)]
    q = {X[k - 1]: (d[k + 1] / d[1]).subs(z, 0) for k in range(1, n + 1)}
    return sf, series_P(n).subs(q)


@pytest.mark.parametrize("n", range(2, 9))
def test_T_expresses_S_n_through_derivatives_of_Sf(n):
    sf, s_n = _sympy_derivative_chain(n)
    t = to_sympy(gen_T(n)).subs({X[k - 1]: sf[k - 2] for k in range(2, n + 1)})
    assert sp.nsimplify(t - s_n) == 0


@given(st.integers(2, 10),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=2, allow_nan=False),
       st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=10, max_size=10))
def test_weight_scaling(n, t, xs):
    for gen in (gen_P, gen_T):
        p = gen(n)
        base = poly_eval(p, xs)
        scaled = poly_eval(p, [t ** (k + 1) * v for k, v in enumerate(xs)])
        assert abs(scaled - t ** n * base) <= 1e-9 * max(1.0, abs(t ** n * base))


def test_poly_eval_examples():
    assert poly_eval(gen_P(2), [0, 5]) == 5
    assert poly_eval(gen_T(4), [0, 1, 0, 0]) == 4
    assert poly_eval(gen_P(3), [1, 1, 1]) == 0


def test_poly_eval_on_arrays():
    xs = [np.array([1.0, 2.0]), np.array([0.5, 1.0]), np.array([0.0, 3.0])]
    assert np.allclose(poly_eval(gen_P(3), xs), xs[2] - 4 * xs[0] * xs[1] + 3 * xs[0] ** 3)


def test_poly_eval_needs_enough_arguments():
    with pytest.raises(ValueError):
        poly_eval(gen_P(3), [1, 2])


def test_order_cap():
    with pytest.raises(ValueError):
        gen_P(13)
    with pytest.raises(ValueError):
        gen_T(-1)


def test_diff_and_arithmetic():
    x = WeightedPoly.var
    p = x(1) * x(1) * x(2) + 3 * x(2)
    assert p.diff(1) == 2 * x(1) * x(2)
    assert p.diff(2) == x(1) * x(1) + 3
    assert (p - p) == WeightedPoly()
    assert not (p - p).terms


def test_dump_format():
    assert dump("T", 4) == "1 x4\n4 x2^2"
    assert dump("P", 1) == "0"

"""Weighted polynomial families P_n and T_n in exact rational arithmetic.

``P_n(x_1, ..., x_n)`` expresses the Tamanoi Schwarzian through the ratios
``q_k = f^(k+1)/f'``; ``T_n(x_2, ..., x_n)`` expresses it through ``Sf`` and
its derivatives.  Both are weight-homogeneous of weight ``n`` where ``x_k``
carries weight ``k``.
"""
from __future__ import annotations

import functools
from fractions import Fraction
from math import comb

MAX_ORDER = 12

Monomial = tuple  # exponents of x_1, x_2, ...; trailing zeros stripped


def _strip(mon):
    mon = list(mon)
    while mon and mon[-1] == 0:
        mon.pop()
    return tuple(mon)


def _mono_mul(a, b):
    n = max(len(a), len(b))
    a = a + (0,) * (n - len(a))
    b = b + (0,) * (n - len(b))
    return _strip(x + y for x, y in zip(a, b))


def _weight(mon):
    return sum((k + 1) * e for k, e in enumerate(mon))


class WeightedPoly:
    """Sparse polynomial with :class:`~fractions.Fraction` coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mon, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                mon = _strip(mon)
                clean[mon] = clean.get(mon, Fraction(0)) + c
                if not clean[mon]:
                    del clean[mon]
        self.terms = clean

    @classmethod
    def var(cls, k):
        """The indeterminate ``x_k`` (1-based)."""
        return cls({(0,) * (k - 1) + (1,): 1})

    @classmethod
    def const(cls, c):
        return cls({(): c})

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.terms)
        for mon, c in other.terms.items():
            out[mon] = out.get(mon, Fraction(0)) + c
        return WeightedPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return WeightedPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return WeightedPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, WeightedPoly):
            other = _as_poly(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def diff(self, k):
        """Partial derivative with respect to ``x_k``."""
        out = {}
        for mon, c in self.terms.items():
            if len(mon) >= k and mon[k - 1]:
                e = mon[k - 1]
                new = list(mon)
                new[k - 1] -= 1
                out[tuple(new)] = c * e
        return WeightedPoly(out)

    @property
    def nvars(self):
        return max((len(m) for m in self.terms), default=0)

    @property
    def weights(self):
        return {_weight(m) for m in self.terms}

    @property
    def weight(self):
        ws = self.weights
        if len(ws) > 1:
            raise ValueError("polynomial is not weight-homogeneous")
        return ws.pop() if ws else None

    def is_homogeneous(self, weight=None):
        ws = self.weights
        if not ws:
            return True
        return len(ws) == 1 and (weight is None or ws == {weight})

    def has_integer_coefficients(self):
        return all(c.denominator == 1 for c in self.terms.values())

    def sorted_terms(self):
        """Monomials from the highest indeterminate down, ties by degree."""
        def key(item):
            mon = item[0]
            return tuple(-e for e in reversed(mon + (0,) * (self.nvars - len(mon))))
        return sorted(self.terms.items(), key=key)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mon, c in self.sorted_terms():
            factors = []
            for k, e in enumerate(mon, start=1):
                if e == 1:
                    factors.append(f"x{k}")
                elif e > 1:
                    factors.append(f"x{k}^{e}")
            mag = abs(c)
            body = "*".join(factors)
            if not body:
                body = str(mag)
            elif mag != 1:
                body = f"{mag}*{body}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"WeightedPoly({self})"


def _as_poly(x):
    if isinstance(x, WeightedPoly):
        return x
    return WeightedPoly.const(x)


def _check_order(n, max_order):
    if n < 0:
        raise ValueError("order must be non-negative")
    if n > max_order:
        raise ValueError(f"order {n} exceeds the cap {max_order}")


@functools.lru_cache(maxsize=None)
def _gen_P(n):
    x = WeightedPoly.var
    if n == 0:
        return WeightedPoly.const(1)
    if n == 1:
        return WeightedPoly()
    if n == 2:
        return x(2) - Fraction(3, 2) * x(1) * x(1)
    prev = _gen_P(n - 1)
    out = WeightedPoly()
    for k in range(1, n):
        out = out + (x(k + 1) - x(1) * x(k)) * prev.diff(k)
    tail = WeightedPoly()
    for k in range(1, n):
        tail = tail + comb(n, k) * _gen_P(k - 1) * _gen_P(n - k - 1)
    return out + Fraction(1, 2) * _gen_P(2) * tail


@functools.lru_cache(maxsize=None)
def _gen_T(n):
    x = WeightedPoly.var
    if n == 0:
        return WeightedPoly.const(1)
    if n == 1:
        return WeightedPoly()
    if n == 2:
        return x(2)
    prev = _gen_T(n - 1)
    out = WeightedPoly()
    for k in range(2, n):
        out = out + prev.diff(k) * x(k + 1)
    tail = WeightedPoly()
    for k in range(1, n):
        tail = tail + comb(n, k) * _gen_T(k - 1) * _gen_T(n - k - 1)
    out = out + Fraction(1, 2) * x(2) * tail
    if not out.has_integer_coefficients():
        raise ArithmeticError(f"T_{n} acquired a non-integer coefficient")
    return out


def gen_P(n: int, max_order: int = MAX_ORDER) -> WeightedPoly:
    """``P_n`` in the indeterminates ``x_1..x_n``."""
    _check_order(n, max_order)
    return _gen_P(n)


def gen_T(n: int, max_order: int = MAX_ORDER) -> WeightedPoly:
    """``T_n`` in the indeterminates ``x_2..x_n`` (``x_1`` never occurs)."""
    _check_order(n, max_order)
    return _gen_T(n)


def poly_eval(p: WeightedPoly, args):
    """Evaluate with ``args[k-1]`` bound to ``x_k``.

    ``args`` may hold complex numbers, numpy arrays or jets; coefficients
    are converted to floats only at this point.
    """
    if len(args) < p.nvars:
        raise ValueError(f"polynomial uses x_{p.nvars} but only {len(args)} arguments given")
    total = 0
    for mon, c in p.terms.items():
        term = None
        for k, e in enumerate(mon):
            if e:
                f = args[k] ** e if e > 1 else args[k]
                term = f if term is None else term * f
        coeff = int(c) if c.denominator == 1 else float(c)
        term = coeff if term is None else term * coeff
        total = term + total
    return total


def dump(family: str, n: int) -> str:
    """Canonical sorted monomial listing, one ``coefficient monomial`` per line."""
    poly = {"P": gen_P, "T": gen_T}[family.upper()](n)
    lines = []
    for mon, c in poly.sorted_terms():
        name = "*".join(f"x{k}^{e}" if e > 1 else f"x{k}"
                        for k, e in enumerate(mon, start=1) if e) or "1"
        lines.append(f"{c} {name}")
    return "\n".join(lines) if lines else "0"

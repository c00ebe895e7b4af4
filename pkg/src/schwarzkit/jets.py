"""Truncated Taylor jets in one variable (z) and in the Wirtinger pair (z, z̄).

A :class:`Jet1` at a base point ``z0`` stores coefficients ``c_k`` of
``sum_k c_k w**(val + k)`` with ``w = z - z0``; ``val < 0`` marks a pole.
A :class:`Jet2` stores ``c_{j,k}`` of ``sum c_{j,k} w**j * conj(w)**k`` for
``j + k <= order``, flattened in order of increasing total degree so that
truncation is a prefix slice.

Every jet may carry a leading batch shape (the shape of ``base``) so that
a whole grid of points is processed with a handful of numpy calls.  Scalar
bases raise on domain problems; batched bases mark the offending entries
with ``nan`` instead.
"""
from __future__ import annotations

import functools
import math

import numpy as np

from .errors import BranchCutError, DomainError, IndeterminateError, JetError

ZERO_TOL = 1e-14
POLE_FLIP_THRESHOLD = 1e8

__all__ = [
    "Jet1",
    "Jet2",
    "jet_arith",
    "jet_compose",
    "wirtinger_d",
    "pole_normalize",
    "exp",
    "log",
    "sin",
    "cos",
    "sqrt",
    "power",
]


# ---------------------------------------------------------------------------
# monomial tables


class _Table:
    def __init__(self, ndim, order):
        self.ndim = ndim
        self.order = order
        if ndim == 1:
            mons = [(j, 0) for j in range(order + 1)]
        else:
            mons = [(d - k, k) for d in range(order + 1) for k in range(d + 1)]
        self.mons = mons
        self.size = len(mons)
        index = {m: i for i, m in enumerate(mons)}
        self.index = index
        self.deg = np.array([j + k for j, k in mons])

        triples = []
        for i, (a, b) in enumerate(mons):
            for j, (c, d) in enumerate(mons):
                if a + b + c + d <= order:
                    triples.append((index[(a + c, b + d)], i, j))
        triples.sort()
        tgt = np.array([t[0] for t in triples])
        self.mul_i = np.array([t[1] for t in triples])
        self.mul_j = np.array([t[2] for t in triples])
        self.mul_starts = np.flatnonzero(np.r_[True, tgt[1:] != tgt[:-1]])

        if order >= 1:
            lower = mons[: _size(ndim, order - 1)]
            self.d_src = np.array([index[(j + 1, k)] for j, k in lower])
            self.d_fac = np.array([j + 1 for j, k in lower], dtype=float)
            if ndim == 2:
                self.dbar_src = np.array([index[(j, k + 1)] for j, k in lower])
                self.dbar_fac = np.array([k + 1 for j, k in lower], dtype=float)
        if ndim == 2:
            self.conj_perm = np.array([index[(k, j)] for j, k in mons])
            self.square_j = np.array([j for j, k in mons])
            self.square_k = np.array([k for j, k in mons])

    def mul(self, a, b):
        prod = a[..., self.mul_i] * b[..., self.mul_j]
        return np.add.reduceat(prod, self.mul_starts, axis=-1)


def _size(ndim, order):
    return order + 1 if ndim == 1 else (order + 1) * (order + 2) // 2


@functools.lru_cache(maxsize=None)
def _table(ndim, order):
    return _Table(ndim, order)


def _order_from_size2(m):
    n = int(round((math.sqrt(8 * m + 1) - 3) / 2))
    if _size(2, n) != m:
        raise JetError(f"{m} is not a triangular coefficient count")
    return n


def _is_strict(base):
    return np.ndim(base) == 0


def _const_like(batch_shape, value):
    return np.broadcast_to(np.asarray(value, dtype=complex), batch_shape)


# ---------------------------------------------------------------------------
# shared behaviour


class _JetBase:
    __slots__ = ()
    __array_priority__ = 1000  # keep numpy scalars from broadcasting over jets

    @property
    def batch_shape(self):
        return self.base.shape

    @property
    def strict(self):
        return _is_strict(self.base)

    def __radd__(self, other):
        return self + other

    def __rsub__(self, other):
        return (-self) + other

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            return power(self, n)
        n = int(n)
        if n < 0:
            return 1.0 / (self ** (-n))
        result = None
        sq = self
        while n:
            if n & 1:
                result = sq if result is None else result * sq
            n >>= 1
            if n:
                sq = sq * sq
        if result is None:
            return self._coerce(1.0)
        return result


# ---------------------------------------------------------------------------
# Jet1


class Jet1(_JetBase):
    """Holomorphic (or meromorphic) jet ``sum c_k w**(val+k)``."""

    __slots__ = ("base", "coeffs", "val")

    def __init__(self, base, coeffs, val=0):
        base = np.asarray(base, dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim == 0 or coeffs.shape[-1] == 0:
            raise JetError("a jet needs at least one coefficient")
        if coeffs.shape[:-1] != base.shape:
            coeffs = np.broadcast_to(coeffs, base.shape + coeffs.shape[-1:])
        val = int(val)
        if val > 0:
            pad = np.zeros(base.shape + (val,), dtype=complex)
            coeffs = np.concatenate([pad, coeffs], axis=-1)
            val = 0
        coeffs = np.array(coeffs, dtype=complex)
        coeffs.setflags(write=False)
        self.base = base
        self.coeffs = coeffs
        self.val = val

    # constructors -------------------------------------------------------
    @classmethod
    def variable(cls, z0, order):
        z0 = np.asarray(z0, dtype=complex)
        c = np.zeros(z0.shape + (order + 1,), dtype=complex)
        c[..., 0] = z0
        if order >= 1:
            c[..., 1] = 1.0
        return cls(z0, c)

    @classmethod
    def constant(cls, value, z0, order):
        z0 = np.asarray(z0, dtype=complex)
        c = np.zeros(z0.shape + (max(order, 0) + 1,), dtype=complex)
        c[..., 0] = value
        return cls(z0, c)

    # basic properties ---------------------------------------------------
    @property
    def length(self):
        return self.coeffs.shape[-1]

    @property
    def order(self):
        """Highest exponent of ``w`` that is known exactly."""
        return self.val + self.length - 1

    @property
    def is_pole(self):
        return self.val < 0

    @property
    def pole_order(self):
        return max(-self.val, 0)

    @property
    def value(self):
        if self.val < 0:
            return _const_like(self.batch_shape, complex("inf"))
        return self.coeffs[..., 0]

    def derivative_values(self):
        """``f^{(k)}(z0)`` for ``k = 0..order`` (Taylor jets only)."""
        self._require_taylor("derivative values")
        fact = np.array([math.factorial(k) for k in range(self.length)], dtype=float)
        return self.coeffs * fact

    def _require_taylor(self, what):
        if self.val < 0:
            raise JetError(f"{what} needs a pole-free jet")

    def truncate(self, order):
        keep = order - self.val + 1
        if keep <= 0:
            raise JetError("truncation removes every known coefficient")
        if keep >= self.length:
            return self
        return Jet1(self.base, self.coeffs[..., :keep], self.val)

    def _coerce(self, other):
        if isinstance(other, Jet1):
            if other.base is not self.base and not np.array_equal(other.base, self.base):
                raise JetError("jet base mismatch")
            return other
        if isinstance(other, Jet2):
            raise JetError("cannot mix Jet1 and Jet2 implicitly; use lift()")
        return Jet1.constant(other, self.base, max(self.order, 0))

    # arithmetic ---------------------------------------------------------
    def _add(self, other, sign):
        b = self._coerce(other)
        a = self
        if a.val == b.val:
            n = min(a.length, b.length)
            return Jet1(a.base, a.coeffs[..., :n] + sign * b.coeffs[..., :n], a.val)
        v = min(a.val, b.val)
        top = min(a.order, b.order)
        n = top - v + 1
        if n <= 0:
            raise JetError("sum has no known coefficients")
        out = np.zeros(a.batch_shape + (n,), dtype=complex)
        for jet, s in ((a, 1.0), (b, sign)):
            count = top - jet.val + 1
            if count > 0:
                start = jet.val - v
                out[..., start:start + count] += s * jet.coeffs[..., :count]
        return Jet1(a.base, out, v)

    def __add__(self, other):
        return self._add(other, 1.0)

    def __sub__(self, other):
        return self._add(other, -1.0)

    def __neg__(self):
        return Jet1(self.base, -self.coeffs, self.val)

    def __mul__(self, other):
        if not isinstance(other, _JetBase):
            other = np.asarray(other)
            return Jet1(self.base, self.coeffs * (other[..., None] if other.ndim else other),
                        self.val)
        b = self._coerce(other)
        n = min(self.length, b.length)
        coeffs = _table(1, n - 1).mul(self.coeffs[..., :n], b.coeffs[..., :n])
        return Jet1(self.base, coeffs, self.val + b.val)

    def __truediv__(self, other):
        if not isinstance(other, _JetBase):
            other = np.asarray(other, dtype=complex)
            return Jet1(self.base, self.coeffs / (other[..., None] if other.ndim else other),
                        self.val)
        b = self._coerce(other)
        c = b.coeffs
        # a leading coefficient counts as zero when it is tiny next to its
        # successor; comparing against the largest coefficient would strip
        # genuine values from jets whose coefficients grow geometrically
        mag = np.abs(c)
        nxt = np.concatenate([mag[..., 1:], np.zeros_like(mag[..., :1])], axis=-1)
        negligible = (mag == 0) | (mag <= ZERO_TOL * nxt)
        lead = np.all(negligible.reshape(-1, c.shape[-1]), axis=0) if c.ndim > 1 else negligible
        m = 0
        while m < len(lead) and lead[m]:
            m += 1
        if m == b.length:
            raise IndeterminateError("division by a jet that vanishes to full order")
        inv = _series_inverse(c[..., m:])
        n = min(self.length, b.length - m)
        coeffs = _table(1, n - 1).mul(self.coeffs[..., :n], inv[..., :n])
        return Jet1(self.base, coeffs, self.val - b.val - m)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    # calculus -----------------------------------------------------------
    def derivative(self):
        if self.val == 0:
            if self.length < 2:
                raise JetError("derivative of an order-0 jet")
            k = np.arange(1, self.length, dtype=float)
            return Jet1(self.base, self.coeffs[..., 1:] * k, 0)
        k = self.val + np.arange(self.length, dtype=float)
        return Jet1(self.base, self.coeffs * k, self.val - 1)

    def lift(self):
        """The same holomorphic jet viewed as a :class:`Jet2`."""
        self._require_taylor("lift")
        t = _table(2, self.order)
        out = np.zeros(self.batch_shape + (t.size,), dtype=complex)
        out[..., [t.index[(j, 0)] for j in range(self.length)]] = self.coeffs
        return Jet2(self.base, out)

    def conj_lift(self):
        """Jet2 of ``conj(f)``: the coefficients sit on the z̄ axis."""
        self._require_taylor("conj_lift")
        t = _table(2, self.order)
        out = np.zeros(self.batch_shape + (t.size,), dtype=complex)
        out[..., [t.index[(0, k)] for k in range(self.length)]] = np.conj(self.coeffs)
        return Jet2(self.base, out)

    def apply_series(self, taylor):
        """Compose with a scalar function given its Taylor coefficients at ``c0``."""
        self._require_taylor("apply_series")
        u = np.array(self.coeffs)
        u[..., 0] = 0
        t = _table(1, self.length - 1)
        res = np.zeros_like(u)
        res[..., 0] = taylor[self.length - 1]
        for m in range(self.length - 2, -1, -1):
            res = t.mul(res, u)
            res[..., 0] += taylor[m]
        return Jet1(self.base, res)

    def nilpotent_powers(self, count):
        """Coefficient matrix of ``(f - f(z0))**j`` for ``j < count``."""
        self._require_taylor("composition")
        u = np.array(self.coeffs)
        u[..., 0] = 0
        t = _table(1, self.length - 1)
        rows = [np.zeros_like(u)]
        rows[0][..., 0] = 1.0
        for _ in range(1, count):
            rows.append(t.mul(rows[-1], u))
        return np.stack(rows, axis=-2)

    def __repr__(self):
        tag = f", pole order {self.pole_order}" if self.is_pole else ""
        return f"Jet1(base={self.base!r}, order={self.order}{tag}, coeffs={self.coeffs!r})"


def _series_inverse(c):
    n = c.shape[-1]
    d = np.zeros_like(c)
    with np.errstate(all="ignore"):
        inv0 = 1.0 / c[..., 0]
        d[..., 0] = inv0
        for k in range(1, n):
            acc = np.sum(c[..., 1:k + 1] * d[..., k - 1::-1][..., :k], axis=-1)
            d[..., k] = -acc * inv0
    return d


# ---------------------------------------------------------------------------
# Jet2


class Jet2(_JetBase):
    """Bivariate Wirtinger jet ``sum c_{j,k} w**j conj(w)**k``."""

    __slots__ = ("base", "coeffs", "order")

    def __init__(self, base, coeffs, order=None):
        base = np.asarray(base, dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[:-1] != base.shape:
            coeffs = np.broadcast_to(coeffs, base.shape + coeffs.shape[-1:])
        n = _order_from_size2(coeffs.shape[-1])
        if order is not None and order != n:
            raise JetError("order does not match coefficient count")
        coeffs = np.array(coeffs, dtype=complex)
        coeffs.setflags(write=False)
        self.base = base
        self.coeffs = coeffs
        self.order = n

    @classmethod
    def z(cls, z0, order):
        return Jet1.variable(z0, order).lift()

    @classmethod
    def zbar(cls, z0, order):
        z0 = np.asarray(z0, dtype=complex)
        t = _table(2, order)
        c = np.zeros(z0.shape + (t.size,), dtype=complex)
        c[..., 0] = np.conj(z0)
        if order >= 1:
            c[..., t.index[(0, 1)]] = 1.0
        return cls(z0, c)

    @classmethod
    def constant(cls, value, z0, order):
        z0 = np.asarray(z0, dtype=complex)
        c = np.zeros(z0.shape + (_size(2, order),), dtype=complex)
        c[..., 0] = value
        return cls(z0, c)

    @classmethod
    def from_square(cls, base, square):
        """Build from a ``(..., N+1, N+1)`` array indexed ``[j, k]``."""
        n = square.shape[-1] - 1
        t = _table(2, n)
        return cls(base, square[..., t.square_j, t.square_k])

    def to_square(self):
        t = _table(2, self.order)
        out = np.zeros(self.batch_shape + (self.order + 1, self.order + 1), dtype=complex)
        out[..., t.square_j, t.square_k] = self.coeffs
        return out

    def coeff(self, j, k):
        return self.coeffs[..., _table(2, self.order).index[(j, k)]]

    @property
    def value(self):
        return self.coeffs[..., 0]

    def truncate(self, order):
        if order >= self.order:
            return self
        if order < 0:
            raise JetError("negative truncation order")
        return Jet2(self.base, self.coeffs[..., :_size(2, order)])

    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.base is not self.base and not np.array_equal(other.base, self.base):
                raise JetError("jet base mismatch")
            return other
        if isinstance(other, Jet1):
            if other.base is not self.base and not np.array_equal(other.base, self.base):
                raise JetError("jet base mismatch")
            return other.lift()
        return Jet2.constant(other, self.base, self.order)

    def _pair(self, other):
        b = self._coerce(other)
        n = min(self.order, b.order)
        return self.truncate(n), b.truncate(n), n

    def __add__(self, other):
        if not isinstance(other, _JetBase):
            c = np.array(self.coeffs)
            c[..., 0] += other
            return Jet2(self.base, c)
        a, b, _ = self._pair(other)
        return Jet2(self.base, a.coeffs + b.coeffs)

    def __sub__(self, other):
        if not isinstance(other, _JetBase):
            return self + (-np.asarray(other))
        a, b, _ = self._pair(other)
        return Jet2(self.base, a.coeffs - b.coeffs)

    def __neg__(self):
        return Jet2(self.base, -self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, _JetBase):
            other = np.asarray(other)
            return Jet2(self.base, self.coeffs * (other[..., None] if other.ndim else other))
        a, b, n = self._pair(other)
        return Jet2(self.base, _table(2, n).mul(a.coeffs, b.coeffs))

    def __truediv__(self, other):
        if not isinstance(other, _JetBase):
            other = np.asarray(other, dtype=complex)
            return Jet2(self.base, self.coeffs / (other[..., None] if other.ndim else other))
        b = self._coerce(other)
        return self * b.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        b0 = self.value
        if self.strict and b0 == 0:
            raise IndeterminateError("division by a jet with zero constant term")
        with np.errstate(all="ignore"):
            inv = 1.0 / b0
            taylor = [(-1) ** m * inv ** (m + 1) for m in range(self.order + 1)]
        return self.apply_series(taylor)

    def d(self):
        """Holomorphic Wirtinger derivative ∂."""
        if self.order < 1:
            raise JetError("∂ of an order-0 jet")
        t = _table(2, self.order)
        return Jet2(self.base, self.coeffs[..., t.d_src] * t.d_fac)

    def dbar(self):
        """Antiholomorphic Wirtinger derivative ∂̄."""
        if self.order < 1:
            raise JetError("∂̄ of an order-0 jet")
        t = _table(2, self.order)
        return Jet2(self.base, self.coeffs[..., t.dbar_src] * t.dbar_fac)

    def conj(self):
        """Jet of the complex conjugate function."""
        t = _table(2, self.order)
        return Jet2(self.base, np.conj(self.coeffs[..., t.conj_perm]))

    def is_holomorphic(self, tol=0.0):
        t = _table(2, self.order)
        return bool(np.all(np.abs(self.coeffs[..., t.square_k > 0]) <= tol))

    def apply_series(self, taylor):
        u = np.array(self.coeffs)
        u[..., 0] = 0
        t = _table(2, self.order)
        res = np.zeros_like(u)
        res[..., 0] = taylor[self.order]
        for m in range(self.order - 1, -1, -1):
            res = t.mul(res, u)
            res[..., 0] += taylor[m]
        return Jet2(self.base, res)

    def compose_holomorphic(self, inner: Jet1):
        """``F(f, conj f)`` where ``self`` is F expanded at ``f(z0)``.

        ``inner`` is the holomorphic jet of f at z0; the result is a Jet2 at z0.
        """
        n = min(self.order, inner.order)
        powers = inner.truncate(n).nilpotent_powers(n + 1)  # [..., j, a]
        sq = self.truncate(n).to_square()
        full = np.einsum("...ja,...jk,...kb->...ab", powers, sq, np.conj(powers))
        return Jet2.from_square(inner.base, full)

    def __repr__(self):
        return f"Jet2(base={self.base!r}, order={self.order}, coeffs={self.coeffs!r})"


# ---------------------------------------------------------------------------
# operations named in the module contract


def jet_arith(a, b, kind):
    """Exact truncated ``a (+|-|*|/) b``."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    raise ValueError(f"unknown jet operation {kind!r}")


def jet_compose(outer: Jet1, inner: Jet1, *, rtol=1e-10):
    """Jet of ``outer ∘ inner`` at ``inner.base``.

    ``outer`` must be expanded at ``inner``'s constant term.  A pole of
    ``outer`` there is carried through as a pole of the composite.
    """
    inner._require_taylor("inner jet of a composition")
    c0 = inner.coeffs[..., 0]
    ok = np.abs(c0 - outer.base) <= rtol * (1.0 + np.abs(outer.base))
    if not np.all(ok | ~np.isfinite(c0)):
        raise JetError("composition base-chain mismatch")
    n = min(outer.order, inner.order) if outer.val == 0 else inner.order
    if outer.val == 0:
        powers = inner.truncate(n).nilpotent_powers(n + 1)
        coeffs = np.einsum("...j,...ja->...a", outer.coeffs[..., :n + 1], powers)
        return Jet1(inner.base, coeffs)
    # Laurent outer: sum_k c_k U^(val+k) = U^val * (taylor part)(U)
    taylor = Jet1(outer.base, outer.coeffs, 0)
    body = jet_compose(taylor, inner, rtol=rtol)
    u = Jet1(inner.base, _zero_const(inner.coeffs))
    return body * (u ** outer.val)


def _zero_const(c):
    c = np.array(c)
    c[..., 0] = 0
    return c


def wirtinger_d(j: Jet2, which="d"):
    if which in ("d", "∂"):
        return j.d()
    if which in ("dbar", "∂̄"):
        return j.dbar()
    raise ValueError(f"unknown Wirtinger derivative {which!r}")


def pole_normalize(f: Jet1, threshold=POLE_FLIP_THRESHOLD):
    """Replace f by 1/f at poles or where |f| exceeds ``threshold``.

    Returns ``(jet, flipped)`` where ``flipped`` is a boolean array of the
    batch shape.  Schwarzian-type quantities are unchanged by the flip.
    """
    if np.all(f.coeffs == 0):
        raise JetError("cannot normalize the zero jet")
    if f.val < 0:
        g = 1.0 / f
        return g, np.ones(f.batch_shape, dtype=bool)
    with np.errstate(all="ignore"):
        flipped = np.abs(f.coeffs[..., 0]) > threshold
    if not np.any(flipped):
        return f, flipped
    with np.errstate(all="ignore"):
        g = 1.0 / f
    if g.val != 0 or g.length != f.length:
        return g, flipped
    coeffs = np.where(flipped[..., None], g.coeffs, f.coeffs)
    return Jet1(f.base, coeffs), flipped


# ---------------------------------------------------------------------------
# elementary functions


def _bad_points(a0, what, *, zero_is_bad=True, cut=True):
    a0 = np.asarray(a0)
    zero = (a0 == 0) if zero_is_bad else np.zeros(a0.shape, dtype=bool)
    on_cut = ((a0.imag == 0) & (a0.real < 0)) if cut else np.zeros(a0.shape, dtype=bool)
    if a0.ndim == 0:
        if zero:
            raise DomainError(f"{what} at a branch point (argument 0)")
        if on_cut:
            raise BranchCutError(f"{what} argument {complex(a0)} lies on the branch cut")
    return zero | on_cut


def _mask(values, bad):
    if np.ndim(bad) and np.any(bad):
        values = np.where(bad, np.nan, values)
    return values


def _is_jet(x):
    return isinstance(x, _JetBase)


def exp(x):
    if not _is_jet(x):
        return np.exp(x)
    if isinstance(x, Jet1) and x.val < 0:
        raise DomainError("exp of a pole")
    e = np.exp(x.value)
    return x.apply_series([e / math.factorial(m) for m in range(x.order + 1)])


def log(x):
    if not _is_jet(x):
        bad = _bad_points(x, "log")
        with np.errstate(all="ignore"):
            return _mask(np.log(x), bad)
    if isinstance(x, Jet1) and x.val < 0:
        raise DomainError("log of a pole")
    a0 = x.value
    bad = _bad_points(a0, "log")
    with np.errstate(all="ignore"):
        taylor = [np.log(a0)] + [(-1) ** (m + 1) / (m * a0 ** m) for m in range(1, x.order + 1)]
    return x.apply_series([_mask(t, bad) for t in taylor])


def _trig(x, start):
    if isinstance(x, Jet1) and x.val < 0:
        raise DomainError("trigonometric function of a pole")
    a0 = x.value
    cycle = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
    return x.apply_series([cycle[(start + m) % 4] / math.factorial(m)
                           for m in range(x.order + 1)])


def sin(x):
    return _trig(x, 0) if _is_jet(x) else np.sin(x)


def cos(x):
    return _trig(x, 1) if _is_jet(x) else np.cos(x)


def sqrt(x):
    return power(x, 0.5)


def _integer_exponent(alpha):
    a = complex(alpha)
    if a.imag == 0 and a.real == int(a.real) and abs(a.real) < 2**31:
        return int(a.real)
    return None


def power(x, alpha):
    """Principal-branch power ``x**alpha`` for a constant exponent."""
    n = _integer_exponent(alpha)
    if n is not None:
        return x ** n
    alpha = complex(alpha)
    if not _is_jet(x):
        bad = _bad_points(x, "power")
        with np.errstate(all="ignore"):
            return _mask(np.power(np.asarray(x, dtype=complex), alpha), bad)
    if isinstance(x, Jet1) and x.val < 0:
        raise DomainError("non-integer power of a pole")
    a0 = x.value
    bad = _bad_points(a0, "power")
    with np.errstate(all="ignore"):
        lead = np.power(a0, alpha)
        taylor = []
        binom = 1.0 + 0j
        for m in range(x.order + 1):
            taylor.append(_mask(lead * binom / a0 ** m, bad))
            binom = binom * (alpha - m) / (m + 1)
    return x.apply_series(taylor)

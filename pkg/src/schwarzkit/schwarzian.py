"""Schwarzian-type differential operators.

Every operator accepts a :class:`Function` and a point ``z`` that may be a
complex scalar or a numpy array.  Scalars raise on bad points (critical
points, poles that cannot be normalized, metric domain violations); arrays
report ``nan`` in the affected entries so that grid scans keep going.

Most operators have two or three independent routes.  They share only the
Taylor jet of ``f`` and are otherwise computed separately, so agreement
between routes is a meaningful check.
"""
from __future__ import annotations

import math
from math import comb

import numpy as np

from . import jets
from .errors import CriticalPointError, DomainError, JetError
from .expr import eval_jet, eval_ratio_jet, eval_value, parse, serialize
from .jets import Jet1, Jet2, jet_compose, pole_normalize
from .metric import HYPERBOLIC, SPHERICAL, Metric, theta, theta_n
from .mobius import Mobius
from .polynomials import gen_P, gen_T, poly_eval

CRITICAL_TOL = 1e-12
HEADROOM = 4


def default_order(n: int) -> int:
    """Jet order used when the caller does not ask for one."""
    return max(n, 2) + HEADROOM


class Function:
    """A meromorphic function with attached source and target metrics."""

    def __init__(self, jet_fn, name: str, *, source: Metric = HYPERBOLIC,
                 target: Metric = SPHERICAL, value_fn=None, ratio_fn=None, mobius=None):
        self._jet_fn = jet_fn
        self._value_fn = value_fn
        # optional (num, den) jets; keeps poles well-conditioned
        self._ratio_fn = ratio_fn
        self.mobius = mobius
        self.name = name
        self.source = source
        self.target = target

    def __repr__(self):
        return f"Function({self.name!r}, source={self.source.name}, target={self.target.name})"

    @classmethod
    def from_expr(cls, src: str, **metrics) -> "Function":
        ast = parse(src)

        def jet_fn(z, order):
            return eval_jet(ast, z, order)

        def ratio_fn(z, order):
            return eval_ratio_jet(ast, z, order)

        return cls(jet_fn, serialize(ast), value_fn=lambda z: eval_value(ast, z),
                   ratio_fn=ratio_fn, **metrics)

    @classmethod
    def from_mobius(cls, m: Mobius, **metrics) -> "Function":
        return cls(m.jet, f"mobius[{m}]", value_fn=m, ratio_fn=m.ratio_jet, mobius=m, **metrics)

    def with_metrics(self, source: Metric | None = None, target: Metric | None = None):
        return Function(self._jet_fn, self.name, value_fn=self._value_fn,
                        ratio_fn=self._ratio_fn, mobius=self.mobius,
                        source=source or self.source, target=target or self.target)

    def jet(self, z, order: int) -> Jet1:
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            return self._jet_fn(z, order)

    def ratio_jet(self, z, order: int):
        """``(num, den)`` with ``f = num / den``; ``den`` is None without a ratio form."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            if self._ratio_fn is None:
                return self._jet_fn(z, order), None
            return self._ratio_fn(z, order)

    def __call__(self, z):
        if self._value_fn is not None:
            return self._value_fn(z)
        return self.jet(z, 0).value

    def compose(self, inner: "Function") -> "Function":
        """``self ∘ inner``, keeping inner's source and self's target metric."""
        outer = self

        def jet_fn(z, order):
            ij = inner.jet(z, order)
            if ij.is_pole:
                raise DomainError(f"{inner.name} has a pole at the evaluation point")
            return jet_compose(outer.jet(ij.value, order), ij)

        def ratio_fn(z, order):
            num, den = inner.ratio_jet(z, order)
            m = outer.mobius
            if m is not None and den is not None:
                # homogeneous form of a Möbius map never divides
                return num * m.a + den * m.b, num * m.c + den * m.d
            ij = num if den is None else num / den
            if ij.is_pole:
                raise DomainError(f"{inner.name} has a pole at the evaluation point")
            on, od = outer.ratio_jet(ij.value, order)
            if od is None:
                return jet_compose(on, ij), None
            return jet_compose(on, ij), jet_compose(od, ij)

        mobius = outer.mobius.compose(inner.mobius) if outer.mobius and inner.mobius else None
        return Function(jet_fn, f"{self.name}∘{inner.name}", ratio_fn=ratio_fn, mobius=mobius,
                        source=inner.source, target=self.target)


def as_function(f) -> Function:
    if isinstance(f, Function):
        return f
    if isinstance(f, Mobius):
        return Function.from_mobius(f)
    if isinstance(f, str):
        return Function.from_expr(f)
    raise TypeError(f"cannot interpret {f!r} as a function")


# ---------------------------------------------------------------------------
# shared plumbing


class _Point:
    """Taylor jet of f at z after pole normalization, plus the bad-point mask."""

    def __init__(self, f: Function, z, order: int, *, allow_flip=True):
        z = np.asarray(z, dtype=complex)
        self.z = z
        self.strict = z.ndim == 0
        num, den = f.ratio_jet(z, order + 2)
        with np.errstate(all="ignore"):
            if den is not None and allow_flip and num.val == 0 and den.val == 0:
                jet, flipped = _oriented_quotient(num, den)
            else:
                jet, flipped = pole_normalize(num if den is None else num / den)
        if jet.order < order:
            raise JetError("pole normalization lost too many orders")
        self.F = jet.truncate(order)
        self.flipped = flipped
        bad = np.zeros(z.shape, dtype=bool)
        if np.any(flipped) and not allow_flip:
            if self.strict:
                raise DomainError(f"{f.name} has a pole at {complex(z)}; this quantity "
                                  "is not invariant under w -> 1/w")
            bad |= flipped
        c = self.F.coeffs
        a1 = c[..., 1]
        a2 = c[..., 2] if c.shape[-1] > 2 else 0
        with np.errstate(all="ignore"):
            crit = np.abs(a1) < CRITICAL_TOL * np.maximum(1.0, 2 * np.abs(a2))
        crit = crit | ~np.isfinite(a1)
        if self.strict and crit:
            raise CriticalPointError(f"{f.name} is not locally univalent at {complex(z)}")
        self.bad = bad | crit

    def finish(self, value):
        value = np.asarray(value, dtype=complex)
        if np.any(self.bad):
            value = np.where(self.bad, np.nan, value)
        return value[()] if value.ndim == 0 else value


def _oriented_quotient(num: Jet1, den: Jet1):
    """``num/den`` or ``den/num`` per point, whichever divides by the larger constant.

    Only valid where the caller's quantity is unchanged by ``f -> 1/f``.
    """
    n0, d0 = np.abs(num.coeffs[..., 0]), np.abs(den.coeffs[..., 0])
    flipped = n0 > d0
    top = np.where(flipped[..., None], den.coeffs, num.coeffs)
    bottom = np.where(flipped[..., None], num.coeffs, den.coeffs)
    # 0/0 has no orientation; give it a harmless divisor and let the mask catch it
    dead = (n0 == 0) & (d0 == 0)
    if np.any(dead):
        if dead.ndim == 0:
            raise JetError("numerator and denominator vanish together")
        bottom = np.where(dead[..., None], 1.0, bottom)
        top = np.where(dead[..., None], np.nan, top)
    return Jet1(num.base, top) / Jet1(num.base, bottom), flipped


def _values(j):
    return j.value if isinstance(j, (Jet1, Jet2)) else np.asarray(j, dtype=complex)


def schwarzian_jet(F: Jet1) -> Jet1:
    """Jet of ``Sf`` from a pole-free jet of ``f``; loses three orders."""
    if F.order < 3:
        raise JetError("the Schwarzian needs a jet of order >= 3")
    with np.errstate(all="ignore"):
        d1 = F.derivative()
        q = d1.derivative() / d1
        return q.derivative() - q * q * 0.5


def _check_n(n, lo):
    if int(n) != n or n < lo:
        raise ValueError(f"order must be an integer >= {lo}, got {n}")
    return int(n)


# ---------------------------------------------------------------------------
# classical and Tamanoi Schwarzians


def classical_S(f, z, order: int | None = None):
    """``Sf(z) = f'''/f' - (3/2)(f''/f')^2``."""
    f = as_function(f)
    p = _Point(f, z, order or default_order(2))
    c = p.F.coeffs
    with np.errstate(all="ignore"):
        r = c[..., 2] / c[..., 1]
        return p.finish(6 * c[..., 3] / c[..., 1] - 6 * r * r)


def _q_values(F: Jet1, n):
    d = F.derivative_values()
    with np.errstate(all="ignore"):
        return [d[..., k + 1] / d[..., 1] for k in range(1, n + 1)]


def _tamanoi_poly(F, n):
    if n == 0:
        return np.ones(F.batch_shape, dtype=complex)
    q = _q_values(F, n)
    return np.asarray(poly_eval(gen_P(n), q) + np.zeros(F.batch_shape, dtype=complex))


def _tamanoi_recursion_jets(F, n):
    """Jets ``S_0..S_n`` from the derivative recursion (``None`` stands for ``S_1 = 0``)."""
    S = [1.0, None]
    if n < 2:
        return S[: n + 1]
    S.append(schwarzian_jet(F))
    for m in range(3, n + 1):
        tail = 0
        for k in range(1, m):
            a, b = S[k - 1], S[m - k - 1]
            if a is None or b is None:
                continue
            tail = tail + comb(m, k) * a * b
        S.append(S[m - 1].derivative() + S[2] * tail * 0.5)
    return S


def _tamanoi_series(F, n):
    c = F.coeffs
    a1, a2 = c[..., 1], c[..., 2]
    w = Jet1(F.base, np.concatenate([np.zeros_like(c[..., :1]), c[..., 1:]], axis=-1))
    with np.errstate(all="ignore"):
        ratio = (w * a1) / (w * a2 + a1 * a1)
    if ratio.val != 0 or ratio.length <= n + 1:
        raise JetError("series route needs a jet of order >= n + 1")
    return math.factorial(n + 1) * ratio.coeffs[..., n + 1]


TAMANOI_ROUTES = ("recursion", "poly", "series")


def tamanoi_S(f, n: int, z, route: str = "poly", order: int | None = None):
    """Tamanoi's Schwarzian ``S_n[f](z)`` of virtual order ``n``."""
    n = _check_n(n, 0)
    f = as_function(f)
    N = order or default_order(n)
    if N < n + 1:
        raise JetError(f"S_{n} needs a jet of order >= {n + 1}")
    p = _Point(f, z, max(N, 3))
    if route == "poly":
        out = _tamanoi_poly(p.F, n)
    elif route == "recursion":
        S = _tamanoi_recursion_jets(p.F, n)[n]
        out = 0.0 if S is None else _values(S)
        out = np.asarray(out) + np.zeros(p.F.batch_shape, dtype=complex)
    elif route == "series":
        out = _tamanoi_series(p.F, n)
    else:
        raise ValueError(f"unknown route {route!r}; choose from {TAMANOI_ROUTES}")
    return p.finish(out)


# ---------------------------------------------------------------------------
# Aharonov invariants


def _psi_series(F, n):
    c = F.coeffs
    G = Jet1(F.base, c[..., 1:])
    with np.errstate(all="ignore"):
        inv = Jet1.constant(c[..., 1], F.base, G.order) / G
    if inv.val != 0 or inv.length <= n:
        raise JetError("series route needs a jet of order >= n + 1")
    return -inv.coeffs[..., n]


def _psi_relation(F, n):
    c = F.coeffs
    with np.errstate(all="ignore"):
        if n == 1:
            return c[..., 2] / c[..., 1]
        sigma = {k: _tamanoi_poly(F, k) / math.factorial(k + 1) for k in range(2, n + 1)}
        psi = {}
        for m in range(2, n + 1):
            acc = sigma[m]
            for k in range(2, m - 1):
                acc = acc - psi[k] * sigma[m - k]
            psi[m] = acc
    return psi[n]


PSI_ROUTES = ("series", "relation")


def aharonov_psi(f, n: int, z, route: str = "series", order: int | None = None):
    """Aharonov invariant ``psi_n[f](z)``; ``psi_1 = f''/(2f')``.

    ``psi_1`` is not invariant under post-composition with Möbius maps, so
    it is computed from the raw jet and needs ``f(z)`` finite.
    """
    n = _check_n(n, 1)
    f = as_function(f)
    N = order or default_order(n)
    if N < n + 1:
        raise JetError(f"psi_{n} needs a jet of order >= {n + 1}")
    p = _Point(f, z, max(N, 3), allow_flip=(n >= 2))
    if route == "series":
        out = _psi_series(p.F, n)
    elif route == "relation":
        out = _psi_relation(p.F, n)
    else:
        raise ValueError(f"unknown route {route!r}; choose from {PSI_ROUTES}")
    return p.finish(out)


# ---------------------------------------------------------------------------
# Peschl-Minda derivatives and the invariant Schwarzians


class _MetricChain:
    """Jet2 data of ``f`` together with its source and target metrics."""

    def __init__(self, f: Function, z, order: int, flip: bool = True):
        # w -> 1/w is a spherical isometry: it leaves Q and Sigma alone but
        # rotates D by a unimodular factor, so D never flips
        self.p = p = _Point(f, z, order, allow_flip=flip and f.target.delta == 1)
        z = p.z
        if p.strict:
            f.source.check_domain(z)
        F = p.F
        N = order
        with np.errstate(all="ignore"):
            rho = f.source.jet(z, N)
            self.rho = rho
            self.inv_rho = rho.reciprocal()
            self.dlogrho = jets.log(rho).d()
            fv = F.value
            sig = f.target.jet(fv, N)
            self.sigma_f = sig.compose_holomorphic(F)
            dlogsig = jets.log(sig).d()
            fp = F.derivative().lift()
            self.fprime = fp
            self.D1 = self.sigma_f * fp * self.inv_rho
            self.coupling = dlogsig.compose_holomorphic(F.truncate(N - 1)) * fp * self.inv_rho
        self.F = F
        self._D = [None, self.D1]
        self._Q = {}

    def d_rho(self, phi: Jet2) -> Jet2:
        return self.inv_rho * phi.d()

    def D(self, n) -> Jet2:
        with np.errstate(all="ignore"):
            while len(self._D) <= n:
                m = len(self._D) - 1
                Dm = self._D[m]
                nxt = self.inv_rho * (Dm.d() - self.dlogrho * Dm * m) + self.coupling * Dm
                self._D.append(nxt)
        return self._D[n]

    def Q(self, n) -> Jet2:
        if n not in self._Q:
            with np.errstate(all="ignore"):
                self._Q[n] = self.D(n + 1) / self.D1
        return self._Q[n]

    def sigma_poly(self, n):
        if n == 0:
            return np.ones(self.p.z.shape, dtype=complex)
        vals = [self.Q(k).value for k in range(1, n + 1)]
        return poly_eval(gen_P(n), vals) + np.zeros(self.p.z.shape, dtype=complex)

    def sigma_recursion_jets(self, n):
        S = [1.0, None]
        if n < 2:
            return S[: n + 1]
        with np.errstate(all="ignore"):
            Q1, Q2 = self.Q(1), self.Q(2)
            S.append(Q2 - Q1 * Q1 * 1.5)
            for m in range(3, n + 1):
                prev = S[m - 1]
                tail = 0
                for k in range(1, m):
                    a, b = S[k - 1], S[m - k - 1]
                    if a is None or b is None:
                        continue
                    tail = tail + comb(m, k) * a * b
                head = self.inv_rho * (prev.d() - self.dlogrho * prev * (m - 1))
                S.append(head + S[2] * tail * 0.5)
        return S


def _chain(f, n_needed, z, order, flip=True):
    f = as_function(f)
    N = order or default_order(n_needed)
    if N < n_needed + 1:
        raise JetError(f"this operator needs a jet of order >= {n_needed + 1}")
    return _MetricChain(f, z, N, flip)


def peschl_minda_D(f, n: int, z, order: int | None = None):
    n = _check_n(n, 1)
    ch = _chain(f, n, z, order, flip=False)
    return ch.p.finish(ch.D(n).value)


def peschl_minda_Q(f, n: int, z, order: int | None = None):
    n = _check_n(n, 1)
    ch = _chain(f, n + 1, z, order)
    return ch.p.finish(ch.Q(n).value)


SIGMA_ROUTES = ("poly", "recursion")


def invariant_sigma(f, n: int, z, route: str = "poly", order: int | None = None):
    """Invariant Schwarzian ``Sigma^n f`` for the attached metrics."""
    n = _check_n(n, 0)
    ch = _chain(f, n + 1, z, order)
    if route == "poly":
        out = ch.sigma_poly(n)
    elif route == "recursion":
        S = ch.sigma_recursion_jets(n)[n]
        out = np.asarray(0.0 if S is None else _values(S)) + np.zeros(ch.p.z.shape, complex)
    else:
        raise ValueError(f"unknown route {route!r}; choose from {SIGMA_ROUTES}")
    return ch.p.finish(out)


# ---------------------------------------------------------------------------
# projective Schwarzians


def _projective_chain(f: Function, n, z, order, metric):
    N = order or default_order(n)
    if N < n + 1:
        raise JetError(f"order-{n} projective derivative needs a jet of order >= {n + 1}")
    p = _Point(f, z, max(N, 3))
    if p.strict:
        metric.check_domain(p.z)
    with np.errstate(all="ignore"):
        S = schwarzian_jet(p.F).lift()
        dlog = metric.log_jet(p.z, S.order).d() if n > 2 else None
        chain = [None, None, S]
        for k in range(2, n):
            Dk = chain[-1]
            chain.append(Dk.d() - dlog * Dk * (2 * k))
    return p, chain


def projective_D(f, n: int, z, metric: Metric | None = None, order: int | None = None):
    """``𝔇^n f = Λ^{n-2}(Sf)`` with respect to ``metric`` (default: f's source)."""
    n = _check_n(n, 2)
    f = as_function(f)
    p, chain = _projective_chain(f, n, z, order, metric or f.source)
    return p.finish(chain[n].value)


def projective_V(f, n: int, z, metric: Metric | None = None, order: int | None = None):
    """``V^n f = T_n(𝔇^2 f, ..., 𝔇^n f)``."""
    n = _check_n(n, 2)
    f = as_function(f)
    p, chain = _projective_chain(f, n, z, order, metric or f.source)
    args = [np.zeros(p.z.shape, complex)] + [chain[k].value for k in range(2, n + 1)]
    return p.finish(poly_eval(gen_T(n), args) + np.zeros(p.z.shape, complex))


def projective_V4_explicit(f, z, metric: Metric | None = None):
    """``V^4`` from its closed expansion in ``S_2, S_3, S_4`` and ``rho``."""
    f = as_function(f)
    metric = metric or f.source
    z = np.asarray(z, dtype=complex)
    rho = metric.jet(z, 2)
    r = rho.value
    dr = rho.d().value / r
    ddr = rho.d().d().value / r
    S = [tamanoi_S(f, k, z) for k in (2, 3, 4)]
    return S[2] - 10 * dr * S[1] + 4 * (7 * dr * dr - ddr) * S[0]


# ---------------------------------------------------------------------------
# operator names


OPERATORS = {
    "S": "classical Schwarzian",
    "Sn": "Tamanoi Schwarzian S_n",
    "psi": "Aharonov invariant psi_n",
    "D": "Peschl-Minda derivative D^n",
    "Q": "Q^n = D^(n+1)/D^1",
    "Sigma": "invariant Schwarzian Sigma^n",
    "Dproj": "projective derivative 𝔇^n",
    "V": "projective Schwarzian V^n",
}

_MIN_ORDER = {"Sn": 0, "psi": 1, "D": 1, "Q": 1, "Sigma": 0, "Dproj": 2, "V": 2}


def parse_operator(spec: str):
    """``"V:3"`` -> ``("V", 3)``; ``"S"`` -> ``("S", 2)``."""
    name, _, arg = spec.partition(":")
    if name not in OPERATORS:
        raise ValueError(f"unknown operator {spec!r}; valid: S, " +
                         ", ".join(f"{k}:<n>" for k in OPERATORS if k != "S"))
    if name == "S":
        if arg:
            raise ValueError("operator S takes no order")
        return name, 2
    if not arg:
        raise ValueError(f"operator {name} needs an order, e.g. {name}:3")
    try:
        n = int(arg)
    except ValueError:
        raise ValueError(f"order in {spec!r} is not an integer") from None
    if n < _MIN_ORDER[name]:
        raise ValueError(f"operator {name} needs order >= {_MIN_ORDER[name]}")
    return name, n


def apply_operator(f, op, z, *, route=None, order=None):
    """Evaluate an operator given by name (``"S"``, ``"V:3"``, ...)."""
    name, n = parse_operator(op) if isinstance(op, str) else op
    f = as_function(f)
    if name == "S":
        return classical_S(f, z, order)
    if name == "Sn":
        return tamanoi_S(f, n, z, route or "poly", order)
    if name == "psi":
        return aharonov_psi(f, n, z, route or "series", order)
    if name == "D":
        return peschl_minda_D(f, n, z, order)
    if name == "Q":
        return peschl_minda_Q(f, n, z, order)
    if name == "Sigma":
        return invariant_sigma(f, n, z, route or "poly", order)
    if name == "Dproj":
        return projective_D(f, n, z, order=order)
    return projective_V(f, n, z, order=order)


def minimal_order(op) -> int:
    """Smallest jet order that determines the operator exactly (used on grids)."""
    name, n = parse_operator(op) if isinstance(op, str) else op
    need = {"S": 3, "Sn": n + 1, "psi": n + 1, "D": n + 1, "Q": n + 2,
            "Sigma": n + 2, "Dproj": n + 1, "V": n + 1}[name]
    return max(need, 3)


def operator_weight(op) -> int:
    """Differential degree: ``Vf = V^3 f`` is a 3-differential, and so on."""
    name, n = parse_operator(op) if isinstance(op, str) else op
    return n


# ---------------------------------------------------------------------------
# identities


def relative_residual(a, b):
    """``|a - b| / max(1, |a|, |b|)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    with np.errstate(all="ignore"):
        out = np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return out[()] if out.ndim == 0 else out


IDENTITIES = ("sigma2", "sigma3", "composition", "q_derivative", "sigma_routes",
              "v4_explicit", "precomposition")
# older spellings kept for callers of the original interface
IDENTITY_ALIASES = {"thm46": "sigma2", "thm54": "sigma3"}


def identity_check(which: str, f, z, *, g=None, n: int = 2, mobius: Mobius | None = None):
    """Residual of a named identity at ``z`` (relative, floored at 1).

    ``sigma2``/``sigma3``: Sigma^2 and Sigma^3 expressed through Sf, V^3 and
    the metric Schwarzians of the attached metrics.  ``composition``: the
    chain rule for ``g ∘ f`` (``g`` defaults to exp).  ``q_derivative``: the
    derivative rule of ``Q^n``.  ``sigma_routes``: polynomial against
    recursive Sigma^n.  ``v4_explicit``: V^4 against its expansion.
    ``precomposition``: the S_3 defect under ``f ∘ L`` (``mobius`` = L).
    """
    which = IDENTITY_ALIASES.get(which, which)
    f = as_function(f)
    z = np.asarray(z, dtype=complex)
    if which == "sigma2":
        ch = _MetricChain(f, z, default_order(2))
        F = ch.F
        with np.errstate(all="ignore"):
            fp = F.coeffs[..., 1]
            Sf = classical_S(f, z)
            rho = ch.rho.value
            rhs = (Sf + theta(f.target, F.value) * fp**2 - theta(f.source, z)) / rho**2
        return relative_residual(ch.p.finish(ch.sigma_poly(2)), rhs)
    if which == "sigma3":
        ch = _MetricChain(f, z, default_order(3))
        F = ch.F
        with np.errstate(all="ignore"):
            fp = F.coeffs[..., 1]
            fv = F.value
            V3 = projective_V(f, 3, z)
            rho = ch.rho.value
            rhs = ((V3 + theta_n(f.target, 3, fv) * fp**3 - theta_n(f.source, 3, z)) / rho**3
                   + 2 * theta(f.target, fv) * fp**2 * ch.Q(1).value / rho**2)
        return relative_residual(ch.p.finish(ch.sigma_poly(3)), rhs)
    if which == "composition":
        g = as_function(g or "exp(z)")
        fz = f(z)
        with np.errstate(all="ignore"):
            fp = f.jet(z, 1).coeffs[..., 1]
            lhs = classical_S(g.compose(f), z)
            rhs = classical_S(g, fz) * fp**2 + classical_S(f, z)
        return relative_residual(lhs, rhs)
    if which == "q_derivative":
        ch = _MetricChain(f, z, default_order(n + 2))
        with np.errstate(all="ignore"):
            Qn = ch.Q(n)
            lhs = ch.d_rho(Qn).value
            rhs = (ch.Q(n + 1).value
                   - (ch.Q(1).value - n * (ch.inv_rho * ch.dlogrho).value) * Qn.value)
        return relative_residual(ch.p.finish(lhs), rhs)
    if which == "sigma_routes":
        return relative_residual(invariant_sigma(f, n, z, "poly"),
                                 invariant_sigma(f, n, z, "recursion"))
    if which == "v4_explicit":
        return relative_residual(projective_V(f, 4, z), projective_V4_explicit(f, z))
    if which == "precomposition":
        L = mobius or Mobius(1, 0.2, 0.1j, 1)
        fl = f.compose(Function.from_mobius(L))
        Lz, d1, d2 = L(z), L.deriv(z), L.second_deriv(z)
        lhs = tamanoi_S(fl, 3, z)
        rhs = tamanoi_S(f, 3, Lz) * d1**3 + 2 * tamanoi_S(f, 2, Lz) * d1 * d2
        return relative_residual(lhs, rhs)
    raise ValueError(f"unknown identity {which!r}; choose from {IDENTITIES}")


def _is_spherical_isometry(m: Mobius, tol=1e-12):
    for sign in (1, -1):
        a, b, c, d = (sign * v for v in (m.a, m.b, m.c, m.d))
        if abs(d - np.conj(a)) <= tol and abs(c + np.conj(b)) <= tol:
            return True
    return False


def transformation_residual(kind: str, f, n: int, zhat, g: Mobius, h: Mobius):
    """Residual of the change-of-coordinates rule for ``Q``, ``Sigma`` or ``V``.

    ``g`` is a Möbius map into the source domain, ``h`` one applied after f.
    The source metric is pulled back along g and the target metric pushed
    forward along h, so both are local isometries; then ``Q^n`` and
    ``Sigma^n`` pick up ``(g'/|g'|)^n`` and ``V^n`` picks up ``(g')^n``.
    """
    f = as_function(f)
    zhat = np.asarray(zhat, dtype=complex)
    src = f.source.pullback(g)
    if f.target.delta == 1 and _is_spherical_isometry(h):
        tgt = f.target
    else:
        tgt = f.target.pullback(h.inverse(), name=f"pushforward({f.target.name})")
    F = Function.from_mobius(h).compose(f.compose(Function.from_mobius(g)))
    F = F.with_metrics(source=src, target=tgt)
    gz, gp = g(zhat), g.deriv(zhat)
    if kind == "V":
        lhs = projective_V(F, n, zhat)
        rhs = projective_V(f, n, gz) * gp**n
    elif kind == "Q":
        lhs = peschl_minda_Q(F, n, zhat)
        rhs = peschl_minda_Q(f, n, gz) * (gp / np.abs(gp)) ** n
    elif kind == "Sigma":
        lhs = invariant_sigma(F, n, zhat)
        rhs = invariant_sigma(f, n, gz) * (gp / np.abs(gp)) ** n
    else:
        raise ValueError("kind must be 'Q', 'Sigma' or 'V'")
    return relative_residual(lhs, rhs)


__all__ = [
    "Function", "as_function", "default_order", "schwarzian_jet", "classical_S",
    "tamanoi_S", "aharonov_psi", "peschl_minda_D", "peschl_minda_Q", "invariant_sigma",
    "projective_D", "projective_V", "projective_V4_explicit", "OPERATORS",
    "parse_operator", "apply_operator", "minimal_order", "operator_weight", "relative_residual",
    "identity_check", "transformation_residual", "IDENTITIES",
]

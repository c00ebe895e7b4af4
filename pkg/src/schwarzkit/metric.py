"""Conformal metrics ``rho(z)|dz|`` and their differential invariants.

A :class:`Metric` knows how to produce its density as a :class:`Jet2` at
any interior point.  Everything else here (log-derivatives, curvature,
the metric Schwarzian ``Theta``, the covariant derivative ``Lambda``) is
computed from those jets, in the natural coordinate of a plane domain.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import DomainError, JetError
from .expr import eval_jet2, eval_value, parse, serialize
from .jets import Jet2
from .mobius import Mobius

CURVATURE_IMAG_TOL = 1e-10


class Metric:
    """A smooth positive conformal density with closed-form jets.

    ``jet_fn(z0, order)`` returns the density as a Jet2 at ``z0``.
    ``delta`` is +1, 0, -1 for the standard metrics and ``None`` otherwise.
    """

    def __init__(self, name: str, jet_fn: Callable, *, delta: Optional[int] = None,
                 domain: Optional[Callable] = None):
        self.name = name
        self._jet_fn = jet_fn
        self.delta = delta
        self._domain = domain

    def __repr__(self):
        return f"Metric({self.name!r})"

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        if self._domain is None:
            return np.isfinite(z)
        return self._domain(z) & np.isfinite(z)

    def check_domain(self, z):
        inside = self.contains(z)
        if np.ndim(inside) == 0 and not inside:
            raise DomainError(f"point {complex(z)} lies outside the domain of the {self.name} metric")
        return inside

    def jet(self, z0, order) -> Jet2:
        z0 = np.asarray(z0, dtype=complex)
        inside = self.check_domain(z0)
        with np.errstate(all="ignore"):
            j = self._jet_fn(z0, order)
        if z0.ndim and not np.all(inside):
            j = Jet2(j.base, np.where(inside[..., None], j.coeffs, np.nan))
        return j

    def density(self, z):
        return self.jet(z, 0).value.real

    __call__ = density

    def log_jet(self, z0, order) -> Jet2:
        return jets.log(self.jet(z0, order))

    def pullback(self, g: Mobius, name=None) -> "Metric":
        """The metric ``(rho ∘ g)|g'|`` making ``g`` a local isometry onto ``self``."""
        outer = self

        def jet_fn(z0, order):
            gj = g.jet(z0, order + 1)
            rho_at = outer.jet(gj.value, order).compose_holomorphic(gj.truncate(order))
            dg = gj.derivative()
            modulus = jets.sqrt(dg.lift() * dg.conj_lift())
            return rho_at * modulus

        def domain(z):
            return outer.contains(g(z))

        return Metric(name or f"pullback({self.name})", jet_fn, domain=domain)


def _standard_jet(delta):
    def jet_fn(z0, order):
        if delta == 0:
            return Jet2.constant(1.0, z0, order)
        zz = Jet2.z(z0, order) * Jet2.zbar(z0, order)
        return (zz * delta + 1.0).reciprocal()
    return jet_fn


def standard(delta: int) -> Metric:
    """``lambda_delta = |dz| / (1 + delta |z|^2)`` of curvature ``4 delta``."""
    names = {-1: "hyperbolic", 0: "euclidean", 1: "spherical"}
    if delta not in names:
        raise ValueError("delta must be -1, 0 or +1")
    domain = (lambda z: np.abs(z) < 1) if delta == -1 else None
    return Metric(names[delta], _standard_jet(delta), delta=delta, domain=domain)


HYPERBOLIC = standard(-1)
EUCLIDEAN = standard(0)
SPHERICAL = standard(1)


def custom(src: str, domain: Optional[Callable] = None) -> Metric:
    """Density given as an expression in ``z`` and ``zbar``, e.g. ``exp((z+zbar)/2)``."""
    ast = parse(src)

    def jet_fn(z0, order):
        return eval_jet2(ast, z0, order)

    m = Metric(f"custom:{serialize(ast)}", jet_fn, domain=domain)
    val = eval_value(ast, 0.0)
    if np.isfinite(val) and (abs(np.imag(val)) > 1e-12 or np.real(val) <= 0):
        raise DomainError(f"density {src!r} is not positive at 0")
    return m


def metric_by_name(name: str) -> Metric:
    if name in ("hyperbolic", "euclidean", "spherical"):
        return {"hyperbolic": HYPERBOLIC, "euclidean": EUCLIDEAN, "spherical": SPHERICAL}[name]
    if name.startswith("custom:"):
        return custom(name[len("custom:"):])
    raise ValueError(f"unknown metric {name!r}; use hyperbolic, euclidean, spherical or custom:<expr>")


# ---------------------------------------------------------------------------
# invariants


def _value(j):
    v = j.value
    return v[()] if np.ndim(v) == 0 else v


def log_deriv(m: Metric, z, kind: str = "d"):
    """``∂ log rho`` (``"d"``), ``∂² log rho`` (``"dd"``) or ``∂̄∂ log rho`` (``"dbar_d"``)."""
    L = m.log_jet(z, 2)
    if kind == "d":
        return _value(L.d())
    if kind == "dd":
        return _value(L.d().d())
    if kind == "dbar_d":
        return _value(L.d().dbar())
    raise ValueError(f"unknown log-derivative kind {kind!r}")


def curvature_jet(m: Metric, z, order=0) -> Jet2:
    """Jet of ``-4 ∂∂̄ log rho / rho²``."""
    rho = m.jet(z, order + 2)
    L = jets.log(rho)
    return L.d().dbar() * (-4.0) / (rho * rho)


def curvature(m: Metric, z):
    k = curvature_jet(m, z).value
    scale = np.maximum(1.0, np.abs(k))
    bad = np.abs(np.imag(k)) > CURVATURE_IMAG_TOL * scale
    if np.any(bad & np.isfinite(k)):
        raise JetError("curvature has a non-negligible imaginary part")
    k = np.real(k)
    return k[()] if k.ndim == 0 else k


def theta_jet(m: Metric, z, order=0) -> Jet2:
    """Jet of the metric Schwarzian ``2 ∂² log rho - 2 (∂ log rho)²``."""
    L = m.log_jet(z, order + 2)
    dL = L.d()
    return dL.d() * 2.0 - dL * dL * 2.0


def theta(m: Metric, z):
    return _value(theta_jet(m, z))


def lambda_cov(phi: Jet2, n: int, m: Metric) -> Jet2:
    """Covariant derivative ``∂phi - 2n (∂ log rho) phi`` of an n-differential."""
    if phi.order < 1:
        raise JetError("covariant derivative needs a jet of order >= 1")
    dlog = m.log_jet(phi.base, phi.order).d()
    return phi.d() - dlog * phi * (2.0 * n)


def theta_n_jet(m: Metric, n: int, z, order=0) -> Jet2:
    if n < 2:
        raise ValueError("theta_n needs n >= 2")
    phi = theta_jet(m, z, order + n - 2)
    for k in range(2, n):
        phi = lambda_cov(phi, k, m)
    return phi


def theta_n(m: Metric, n: int, z):
    """``Lambda^{n-2}`` applied to ``Theta``; ``n = 2`` gives ``theta``."""
    return _value(theta_n_jet(m, n, z))

"""Univalence criteria, their sharp constants, and related diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .errors import DomainError, NormError
from .norm import DEFAULT_GRID, GridConfig, NormEstimate, operator_norm, sup_norm
from .schwarzian import Function, aharonov_psi, apply_operator, as_function, classical_S

# Kraus-Nehari: a univalent f has ||Sf||_2 <= 6 (sharp for the Koebe function).
NECESSARY_S2 = 6.0
# Nehari: ||Sf||_2 <= 2 forces univalence.
SUFFICIENT_S2 = 2.0
# Projective analogue: univalent f has ||Vf||_3 <= 16, attained by the
# rotated extremal w (1 - e^{it} w^3)^(-2/3).
NECESSARY_V3 = 16.0
# ||Vf||_3 <= 3/2 forces univalence (not known to be sharp).
SUFFICIENT_V3 = 1.5
# Two-sided comparison c_lo ||Vf||_3 <= ||Sf||_2 <= c_hi ||Vf||_3.
COMPARE_LOWER = 16 / (25 * math.sqrt(5))
COMPARE_UPPER = 4 / 3
# |g'(0)| <= 25 sqrt5 / 16 whenever sup r (1-r^2)^2 |g| <= 1.
WIRTHS_BOUND = 25 * math.sqrt(5) / 16
# ||Vl||_3 for l = log((1+z)/(1-z)); caps any sharp sufficient constant.
SUFFICIENT_V3_CEILING = 16 * math.sqrt(3) / 9

THRESHOLD_SLACK = 1e-6
ESTIMATOR_MARGIN = 10


@dataclass
class Verdict:
    necessary_S2: str
    necessary_V3: str
    sufficient_S2: bool
    sufficient_V3: bool
    conclusion: str
    evidence: dict = field(default_factory=dict)
    reasons: list = field(default_factory=list)

    def as_dict(self):
        return asdict(self)


def _necessary_fails(est: NormEstimate, threshold: float, rel_tol: float) -> bool:
    if est.unbounded:
        return True
    margin = THRESHOLD_SLACK + ESTIMATOR_MARGIN * rel_tol * threshold
    return est.refined > threshold + margin


def _sufficient_holds(est: NormEstimate, threshold: float) -> bool:
    return est.converged and not est.unbounded and est.refined <= threshold + THRESHOLD_SLACK


def decide(s2: NormEstimate, v3: NormEstimate, rel_tol: float = DEFAULT_GRID.rel_tol) -> Verdict:
    """Combine two norm estimates into a verdict."""
    reasons = []
    nec_s = "fail" if _necessary_fails(s2, NECESSARY_S2, rel_tol) else "pass"
    nec_v = "fail" if _necessary_fails(v3, NECESSARY_V3, rel_tol) else "pass"
    suf_s = _sufficient_holds(s2, SUFFICIENT_S2)
    suf_v = _sufficient_holds(v3, SUFFICIENT_V3)
    for label, est in (("||Sf||_2", s2), ("||Vf||_3", v3)):
        if not est.converged and est.reason:
            reasons.append(f"{label}: {est.reason}")
    failed = "fail" in (nec_s, nec_v)
    proved = suf_s or suf_v
    if failed and proved:
        # the estimates contradict each other; refuse to pick a side
        conclusion = "indeterminate"
        reasons.append("a sufficient and a necessary test disagree")
    elif failed:
        conclusion = "not_univalent"
    elif proved:
        conclusion = "univalent"
    else:
        conclusion = "indeterminate"
        if not reasons:
            reasons.append("norms lie between the sufficient and necessary thresholds")
    evidence = {
        "norm_S2": s2.as_dict(),
        "norm_V3": v3.as_dict(),
        "thresholds": {"necessary_S2": NECESSARY_S2, "sufficient_S2": SUFFICIENT_S2,
                       "necessary_V3": NECESSARY_V3, "sufficient_V3": SUFFICIENT_V3},
    }
    return Verdict(nec_s, nec_v, suf_s, suf_v, conclusion, evidence, reasons)


def univalence_check(f, cfg: GridConfig = DEFAULT_GRID) -> Verdict:
    f = as_function(f)
    try:
        s2 = operator_norm(f, "S", 2, cfg)
        v3 = operator_norm(f, "V:3", 3, cfg)
    except NormError as exc:
        return Verdict("pass", "pass", False, False, "indeterminate",
                       {}, [f"norm estimation failed: {exc}"])
    return decide(s2, v3, cfg.rel_tol)


# ---------------------------------------------------------------------------
# Aharonov's series


def aharonov_terms(f, z, N: int):
    """Terms ``n = 1..N`` of Aharonov's univalence series at ``z``."""
    f = as_function(f)
    z = np.asarray(z, dtype=complex)
    t = 1 - np.abs(z) ** 2
    psi = {k: aharonov_psi(f, k, z, order=N + 3) for k in range(2, N + 2)}
    out = []
    for n in range(1, N + 1):
        inner = sum(comb(n - 1, k - 1) * (-np.conj(z)) ** (n - k) * t ** (k + 1) * psi[k + 1]
                    for k in range(1, n + 1))
        out.append(n * np.abs(inner) ** 2)
    return out


def aharonov_partial_sum(f, z, N: int):
    """Partial sum through ``n = N``; at most 1 when f is univalent."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return sum(aharonov_terms(f, z, N))


# ---------------------------------------------------------------------------
# quadrature over the disk


@dataclass
class QuadratureResult:
    value: complex
    converged: bool
    n_alpha: int
    n_s: int
    history: list


def disk_integral(fn, center=0j, tol: float = 1e-4, n_alpha: int = 64, n_s: int = 16,
                  max_doublings: int = 7) -> QuadratureResult:
    """``∬_{|ζ|<1} fn(ζ) dA`` in polar coordinates centred at ``center``.

    The Jacobian ``s`` cancels a ``1/|ζ - center|`` singularity, so such
    integrands become smooth in ``(s, alpha)``.  Gauss-Legendre in ``s``,
    trapezoid in ``alpha``; both counts double until the value changes by
    less than ``tol * max(1, |value|)``.
    """
    center = complex(center)
    if abs(center) >= 1:
        raise DomainError("the centre must lie inside the unit disk")
    history = []
    prev = None
    for _ in range(max_doublings + 1):
        val = _polar_rule(fn, center, n_alpha, n_s)
        history.append(val)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return QuadratureResult(val, True, n_alpha, n_s, history)
        prev = val
        n_alpha, n_s = 2 * n_alpha, 2 * n_s
    return QuadratureResult(val, False, n_alpha // 2, n_s // 2, history)


def _polar_rule(fn, center, n_alpha, n_s):
    x, w = np.polynomial.legendre.leggauss(n_s)
    alpha = 2 * np.pi * np.arange(n_alpha) / n_alpha
    e = np.exp(1j * alpha)
    b = np.real(np.conj(center) * e)
    s_max = -b + np.sqrt(b * b + 1 - abs(center) ** 2)
    s = (x[None, :] + 1) / 2 * s_max[:, None]
    zeta = center + s * e[:, None]
    vals = np.asarray(fn(zeta), dtype=complex)
    vals = np.where(np.isfinite(vals), vals, 0)
    radial = (vals * s) @ w * (s_max / 2)
    return complex(np.sum(radial) * 2 * np.pi / n_alpha)


def integral_representation(f, z, tol: float = 1e-4) -> dict:
    """Rebuild ``Sf(z)`` from ``Vf`` through the disk integral.

    Needs ``||Vf||_3 < ∞``; returns the reconstruction next to the direct
    value so callers can compare.
    """
    f = as_function(f)
    z = complex(z)
    t = 1 - abs(z) ** 2

    def integrand(zeta):
        v = apply_operator(f, "V:3", zeta, order=4)
        return (1 - np.abs(zeta) ** 2) ** 4 * v / (np.conj(zeta) - np.conj(z))

    q = disk_integral(integrand, center=z, tol=tol)
    recon = -q.value / (math.pi * t ** 4)
    direct = complex(classical_S(f, z))
    return {"z": z, "reconstruction": recon, "direct": direct, "error": abs(recon - direct),
            "converged": q.converged, "n_alpha": q.n_alpha, "n_s": q.n_s}


def compare_constant_integral(tol: float = 1e-10) -> float:
    """``(1/π)∬ (1-|ζ|^2)/|ζ| dA``, which equals the upper comparison constant 4/3."""
    q = disk_integral(lambda zeta: (1 - np.abs(zeta) ** 2) / np.abs(zeta), tol=tol)
    return q.value.real / math.pi


# ---------------------------------------------------------------------------
# comparison bounds and the Wirths estimate


def proposition_bounds(f, cfg: GridConfig = DEFAULT_GRID) -> dict:
    """Slacks of ``c_lo ||Vf||_3 <= ||Sf||_2 <= c_hi ||Vf||_3``."""
    f = as_function(f)
    s2 = operator_norm(f, "S", 2, cfg)
    v3 = operator_norm(f, "V:3", 3, cfg)
    if not (s2.converged and v3.converged):
        raise NormError("norm estimate did not converge: "
                        f"{s2.reason if not s2.converged else v3.reason}")
    s, v = s2.refined, v3.refined
    return {
        "norm_S2": s,
        "norm_V3": v,
        "lower_slack": s - COMPARE_LOWER * v,
        "upper_slack": COMPARE_UPPER * v - s,
    }


def wirths_check(g, cfg: GridConfig = DEFAULT_GRID, precondition_tol: float = 1e-9) -> dict:
    """``|g'(0)|`` against ``25 sqrt5 / 16`` for ``||g||_2 <= 1``."""
    g = as_function(g)
    est = sup_norm(lambda z: g(z), 2, cfg)
    if est.refined > 1 + precondition_tol:
        raise DomainError(f"||g||_2 = {est.refined:.12g} exceeds 1")
    jet = g.jet(0j, 1)
    d0 = abs(complex(jet.coeffs[1]))
    return {"norm": est.refined, "derivative": d0, "bound": WIRTHS_BOUND,
            "slack": WIRTHS_BOUND - d0, "converged": est.converged}


def extremal_function(rotation: complex = 1.0) -> Function:
    """``w (1 - e^{it} w^3)^(-2/3)``, extremal for the ``||Vf||_3 <= 16`` bound."""
    rotation = complex(rotation)
    return Function.from_expr(f"z*(1-({rotation.real!r}+{rotation.imag!r}i)*z^3)^(-2/3)")


__all__ = [
    "Verdict", "decide", "univalence_check", "aharonov_terms", "aharonov_partial_sum",
    "disk_integral", "integral_representation", "compare_constant_integral",
    "proposition_bounds", "wirths_check", "extremal_function", "NECESSARY_S2",
    "SUFFICIENT_S2", "NECESSARY_V3", "SUFFICIENT_V3", "COMPARE_LOWER", "COMPARE_UPPER",
    "WIRTHS_BOUND", "SUFFICIENT_V3_CEILING",
]

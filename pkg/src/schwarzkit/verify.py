"""Reference-value suite: every known constant recomputed and compared."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import criteria, metric, polynomials
from .metric import EUCLIDEAN, HYPERBOLIC, SPHERICAL
from .norm import DEFAULT_GRID, GridConfig, circle_profile, operator_norm
from .schwarzian import (Function, aharonov_psi, classical_S, identity_check, invariant_sigma,
                         projective_D, projective_V, tamanoi_S)

KOEBE = "z/(1-z)^2"
LOGF = "log((1+z)/(1-z))"
# Sf = (1 - z^2)^(-2)
MILD = "((1+z)/(1-z))^(1/sqrt(2))"
GROUPS = ("polynomials", "schwarzian", "metric", "norm", "criteria")
SQ3 = math.sqrt(3)


@dataclass
class Row:
    name: str
    group: str
    expected: object
    computed: object
    tolerance: float
    status: str
    note: str = ""

    def as_dict(self):
        d = asdict(self)
        for key in ("expected", "computed"):
            v = d[key]
            if isinstance(v, (complex, np.complexfloating)):
                d[key] = [float(np.real(v)), float(np.imag(v))] if np.imag(v) else float(np.real(v))
            elif isinstance(v, np.floating):
                d[key] = float(v)
        return d


class _Suite:
    def __init__(self, cfg: GridConfig, seed: int):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.rows: list[Row] = []

    def exact(self, group, name, expected, fn: Callable):
        try:
            got = fn()
            status = "pass" if got == expected else "fail"
        except Exception as exc:  # a row must never take the suite down
            got, status = f"{type(exc).__name__}: {exc}", "error"
        self.rows.append(Row(name, group, expected, got, 0.0, status))

    def close(self, group, name, expected, fn: Callable, tol, relative=False):
        try:
            got = fn()
            err = abs(complex(got) - complex(expected))
            if relative:
                err /= max(abs(complex(expected)), 1e-300)
            status = "pass" if err <= tol else "fail"
        except Exception as exc:
            got, status = f"{type(exc).__name__}: {exc}", "error"
        self.rows.append(Row(name, group, expected, got, tol, status))

    def norm(self, name, expr, op, c, expected, tol=1e-5, **kw):
        try:
            est = operator_norm(expr, op, c, self.cfg, **kw)
            got = est.refined
            err = abs(got - expected) / expected
            if not est.converged:
                status, note = "flagged", est.reason or "not converged"
            else:
                status, note = ("pass" if err <= tol else "fail"), ""
        except Exception as exc:
            got, status, note = f"{type(exc).__name__}: {exc}", "error", ""
        self.rows.append(Row(name, "norm", expected, got, tol, status, note))

    def points(self, n, radius=0.8):
        r = radius * np.sqrt(self.rng.uniform(size=n))
        return r * np.exp(2j * np.pi * self.rng.uniform(size=n))


def _poly_rows(s: _Suite):
    g = "polynomials"
    s.exact(g, "P_1", "0", lambda: str(polynomials.gen_P(1)))
    s.exact(g, "P_2", "x2 - 3/2*x1^2", lambda: str(polynomials.gen_P(2)))
    s.exact(g, "P_3", "x3 - 4*x1*x2 + 3*x1^3", lambda: str(polynomials.gen_P(3)))
    s.exact(g, "T_1", "0", lambda: str(polynomials.gen_T(1)))
    s.exact(g, "T_3", "x3", lambda: str(polynomials.gen_T(3)))
    s.exact(g, "T_4", "x4 + 4*x2^2", lambda: str(polynomials.gen_T(4)))
    s.exact(g, "T_5", "x5 + 13*x2*x3", lambda: str(polynomials.gen_T(5)))
    s.exact(g, "P_n weight-homogeneous, n <= 8", True,
            lambda: all(polynomials.gen_P(n).is_homogeneous(n) for n in range(2, 9)))
    s.exact(g, "T_n integral and homogeneous, n <= 8", True,
            lambda: all(polynomials.gen_T(n).is_homogeneous(n)
                        and polynomials.gen_T(n).has_integer_coefficients()
                        for n in range(2, 9)))


def _schwarzian_rows(s: _Suite):
    g = "schwarzian"
    s.close(g, "S k(0)", -6, lambda: classical_S(KOEBE, 0), 1e-12)
    s.close(g, "S l(0)", 2, lambda: classical_S(LOGF, 0), 1e-12)
    s.close(g, "S_0 = 1", 1, lambda: tamanoi_S(KOEBE, 0, 0.3), 1e-12)
    s.close(g, "S_1 = 0", 0, lambda: tamanoi_S(KOEBE, 1, 0.3), 1e-12)
    s.close(g, "S_3[exp(2z)] = 0", 0, lambda: tamanoi_S("exp(2*z)", 3, 0.2 + 0.1j), 1e-12)
    z = 0.25 - 0.3j
    s.close(g, "6 psi_2 = Sf", classical_S(KOEBE, z), lambda: 6 * aharonov_psi(KOEBE, 2, z), 1e-10)
    s.close(g, "24 psi_3 = S_3", tamanoi_S(KOEBE, 3, z),
            lambda: 24 * aharonov_psi(KOEBE, 3, z), 1e-10)
    s.close(g, "extremal |Vf(0)| = 16", 16,
            lambda: abs(projective_V(criteria.extremal_function(), 3, 0)), 1e-6)
    s.close(g, "extremal 24|psi_3(0)| = 16", 16,
            lambda: 24 * abs(aharonov_psi(criteria.extremal_function(), 3, 0)), 1e-6)
    s.close(g, "Sigma k(0) = Sk(0)", -6, lambda: invariant_sigma(KOEBE, 2, 0), 1e-12)
    zl = 0.4 + 0.2j
    s.close(g, "Sigma^3 l = rho^-3 V^3 l", projective_V(LOGF, 3, zl) * (1 - abs(zl) ** 2) ** 3,
            lambda: invariant_sigma(LOGF, 3, zl), 1e-10)
    s.close(g, "V^2 = Sf", classical_S(LOGF, zl), lambda: projective_V(LOGF, 2, zl), 1e-12)
    fe = Function.from_expr(LOGF, source=EUCLIDEAN)
    s.close(g, "Euclidean V^4 = S_4", tamanoi_S(LOGF, 4, zl), lambda: projective_V(fe, 4, zl),
            1e-9, relative=True)
    s.close(g, "Vf(0) = 24 psi_3(0)", 24 * aharonov_psi("z+z^2/4", 3, 0),
            lambda: projective_V("z+z^2/4", 3, 0), 1e-10)
    s.close(g, "D^3 at i/2 for Sf=(1-z^2)^-2", 1024j / 375,
            lambda: projective_D(MILD, 3, 0.5j), 1e-10)
    pts = s.points(100)
    for which, f in (("sigma2", Function.from_expr(KOEBE)),
                     ("sigma2", Function.from_expr(KOEBE, target=metric.custom("exp((z+zbar)/2)"))),
                     ("sigma3", Function.from_expr(LOGF)),
                     ("sigma3", Function.from_expr(LOGF, target=metric.custom("exp((z+zbar)/2)"))),
                     ("composition", Function.from_expr(KOEBE)),
                     ("q_derivative", Function.from_expr(KOEBE)),
                     ("v4_explicit", Function.from_expr(LOGF))):
        label = f"identity {which} [{f.target.name}]"
        s.close(g, label, 0, lambda w=which, f=f: float(np.nanmax(identity_check(w, f, pts))), 1e-7)


def _metric_rows(s: _Suite):
    g = "metric"
    pts = s.points(200, 0.95)
    for m, k in ((HYPERBOLIC, -4), (EUCLIDEAN, 0), (SPHERICAL, 4)):
        s.close(g, f"curvature {m.name}", k,
                lambda m=m, k=k: k + float(np.max(np.abs(metric.curvature(m, pts) - k))), 1e-10)
        s.close(g, f"Theta {m.name}", 0,
                lambda m=m: float(np.max(np.abs(metric.theta(m, pts)))), 1e-10)
    er = metric.custom("exp((z+zbar)/2)")
    s.close(g, "Theta exp(Re z)", -0.5, lambda: metric.theta(er, 0.3 - 0.2j), 1e-12)
    s.close(g, "Theta^3 exp(Re z)", 1, lambda: metric.theta_n(er, 3, 0.3 - 0.2j), 1e-12)
    s.close(g, "d log rho, spherical at 0.5", -0.4, lambda: metric.log_deriv(SPHERICAL, 0.5), 1e-12)


def _norm_rows(s: _Suite):
    s.norm("||Sk||_2", KOEBE, "S", 2, 6.0)
    s.norm("||Sl||_2", LOGF, "S", 2, 2.0)
    s.norm("||Vk||_3", KOEBE, "V:3", 3, 16 * SQ3 / 3)
    s.norm("||Vl||_3", LOGF, "V:3", 3, 16 * SQ3 / 9)
    s.norm("||Vf||_3 for Sf=(1-z^2)^-2", MILD, "V:3", 3, 8 * SQ3 / 9)
    f = Function.from_expr(MILD)

    def plateau():
        vals = [circle_profile(lambda z: projective_V(f, 3, z, order=4), 3, r)[0]
                for r in (0.4, 0.6, 0.9)]
        return max(vals, key=lambda v: abs(v - 8 / (3 * SQ3)))

    s.close("norm", "circle profile plateau 8/(3 sqrt3)", 8 / (3 * SQ3), plateau, 1e-8)


def _criteria_rows(s: _Suite):
    g = "criteria"
    s.close(g, "comparison constant 4/3 by quadrature", 4 / 3,
            criteria.compare_constant_integral, 1e-8)
    s.close(g, "Wirths extremal |g'(0)|", criteria.WIRTHS_BOUND,
            lambda: criteria.wirths_check(f"{criteria.WIRTHS_BOUND!r}*z", s.cfg)["derivative"],
            1e-12)
    s.close(g, "integral representation l(0)", 2,
            lambda: criteria.integral_representation(LOGF, 0)["reconstruction"], 1e-3)
    s.close(g, "integral representation k(0.2)", -6 / 0.96 ** 2,
            lambda: criteria.integral_representation(KOEBE, 0.2)["reconstruction"], 1e-3)


_BUILDERS = {
    "polynomials": _poly_rows,
    "schwarzian": _schwarzian_rows,
    "metric": _metric_rows,
    "norm": _norm_rows,
    "criteria": _criteria_rows,
}


def verify_suite(only: Optional[str] = None, degrade: bool = False,
                 cfg: GridConfig = DEFAULT_GRID, seed: int = 0) -> list[Row]:
    """Run the reference checks; ``degrade`` coarsens the grid tenfold."""
    if only is not None and only not in _BUILDERS:
        raise ValueError(f"unknown group {only!r}; choose from {', '.join(GROUPS)}")
    suite = _Suite(cfg.degraded() if degrade else cfg, seed)
    for name in GROUPS:
        if only is None or only == name:
            _BUILDERS[name](suite)
    return suite.rows


def suite_ok(rows) -> bool:
    return all(r.status in ("pass", "flagged") for r in rows)

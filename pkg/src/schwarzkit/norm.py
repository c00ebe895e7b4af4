"""Weighted sup-norms ``sup (1-|z|^2)^c |phi(z)|`` over the unit disk.

The estimate starts from a polar grid, then alternates golden-section
searches in ``r`` and ``theta`` with a Nelder-Mead polish in ``(r, theta)``
until two rounds agree.  The reported value is a running maximum, so every
stage can only raise it.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import NormError

INV_PHI = (math.sqrt(5) - 1) / 2
R_CAP = 1 - 1e-12
MAX_BAD_FRACTION = 0.10
UNBOUNDED_GROWTH = 1.01


def thread_count(requested: Optional[int] = None) -> int:
    """Worker count: ``requested``, capped by ``SCHWARZ_THREADS`` if set."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("SCHWARZ_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise NormError(f"SCHWARZ_THREADS={cap!r} is not an integer") from None
    return max(1, n)


@dataclass(frozen=True)
class GridConfig:
    n_r: int = 256
    n_theta: int = 512
    r_max: float = 1 - 1e-4
    rel_tol: float = 1e-7
    refine: bool = True
    max_rounds: int = 6
    chunk: int = 16384
    threads: Optional[int] = None
    check_unbounded: bool = True

    def degraded(self, factor: int = 10) -> "GridConfig":
        """A coarser grid without refinement, for sensitivity runs."""
        return replace(self, n_r=max(4, self.n_r // factor),
                       n_theta=max(8, self.n_theta // factor), refine=False)

    def as_dict(self):
        d = asdict(self)
        d["threads"] = thread_count(self.threads)
        return d


DEFAULT_GRID = GridConfig()


@dataclass
class NormEstimate:
    value: float
    refined: float
    argmax: complex
    resolution: dict
    converged: bool
    unbounded: bool = False
    reason: Optional[str] = None
    history: list = field(default_factory=list)

    def as_dict(self):
        return {
            "value": self.refined,
            "grid_value": self.value,
            "argmax": self.argmax,
            "converged": self.converged,
            "unbounded": self.unbounded,
            "reason": self.reason,
            "grid": self.resolution,
        }


def chebyshev_radii(n: int, r_max: float) -> np.ndarray:
    """``n`` Chebyshev-spaced radii on ``[0, r_max]``, clustered at both ends."""
    if n < 2:
        return np.array([0.0])
    k = np.arange(n)
    return r_max * (1 - np.cos(np.pi * k / (n - 1))) / 2


def _weighted(phi, c, z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(phi(z), dtype=complex))
        w = (1 - np.abs(z) ** 2) ** c * vals
    return np.where(np.isfinite(w), w, np.nan)


def _evaluate_grid(phi, c, z, cfg: GridConfig):
    flat = z.ravel()
    chunks = [flat[i:i + cfg.chunk] for i in range(0, flat.size, cfg.chunk)]
    workers = thread_count(cfg.threads)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda q: _weighted(phi, c, q), chunks))
    else:
        parts = [_weighted(phi, c, q) for q in chunks]
    return np.concatenate(parts).reshape(z.shape)


def golden_max(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
               max_iter: int = 200):
    """Golden-section search for a maximum of a unimodal ``fn`` on ``[a, b]``."""
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if _lt(f1, f2):
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = fn(x1)
    return (x1, f1) if not _lt(f1, f2) else (x2, f2)


def _lt(a, b):
    # nan counts as -inf so failed evaluations never win
    a = -np.inf if not np.isfinite(a) else a
    b = -np.inf if not np.isfinite(b) else b
    return a < b


def _point_value(phi, c, r, t):
    if not 0 <= r < 1:
        return np.nan
    return float(_weighted(phi, c, np.array([r * np.exp(1j * t)]))[0])


def circle_profile(phi, c: float, r: float, n_theta: int = 512, refine: bool = True,
                   threads: Optional[int] = None):
    """``(1-r^2)^c max_theta |phi(r e^{i theta})|`` and the maximizing angle."""
    if not 0 <= r < 1:
        raise NormError("circle radius must satisfy 0 <= r < 1")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    w = _evaluate_grid(phi, c, r * np.exp(1j * theta), GridConfig(threads=threads))
    if np.all(np.isnan(w)):
        raise NormError(f"evaluator failed on the whole circle r={r}")
    j = int(np.nanargmax(w))
    best, t_best = float(w[j]), float(theta[j])
    if refine and r > 0:
        step = 2 * np.pi / n_theta
        t, v = golden_max(lambda s: _point_value(phi, c, r, s), t_best - step, t_best + step)
        if _lt(best, v):
            best, t_best = float(v), float(t)
    return best, float(np.mod(t_best, 2 * np.pi))


def sup_norm(phi, c: float, cfg: GridConfig = DEFAULT_GRID, *, symmetric: bool = False,
             ) -> NormEstimate:
    """Estimate ``||phi||_c``; ``phi`` maps an array of points to values.

    With ``symmetric=True`` only the upper half disk is scanned, which is
    valid when ``phi(conj z) = conj(phi(z))``.
    """
    radii = chebyshev_radii(cfg.n_r, cfg.r_max)
    span = np.pi if symmetric else 2 * np.pi
    n_t = cfg.n_theta // 2 + 1 if symmetric else cfg.n_theta
    theta = (np.linspace(0, np.pi, n_t) if symmetric
             else 2 * np.pi * np.arange(n_t) / n_t)
    Z = radii[:, None] * np.exp(1j * theta[None, :])
    W = _evaluate_grid(phi, c, Z, cfg)
    bad = np.isnan(W)
    resolution = cfg.as_dict() | {"symmetric": symmetric}
    if bad.mean() > MAX_BAD_FRACTION:
        raise NormError(f"evaluator failed on {bad.mean():.1%} of the grid")
    i, j = np.unravel_index(int(np.nanargmax(W)), W.shape)
    grid_value = float(W[i, j])
    r_best, t_best = float(radii[i]), float(theta[j])
    best = grid_value
    history = [grid_value]

    def consider(r, t, v):
        nonlocal best, r_best, t_best
        if _lt(best, v):
            best, r_best, t_best = float(v), float(r), float(t)

    converged = False
    reason = None
    if cfg.refine and grid_value > 0:
        dr = max(np.max(np.diff(radii)), 1e-12)
        dt = span / max(n_t - 1, 1)
        for _ in range(cfg.max_rounds):
            before = best
            lo, hi = max(0.0, r_best - dr), min(R_CAP, r_best + dr)
            r, v = golden_max(lambda s: _point_value(phi, c, s, t_best), lo, hi)
            consider(r, t_best, v)
            if r_best > 0:
                t, v = golden_max(lambda s: _point_value(phi, c, r_best, s),
                                  t_best - dt, t_best + dt)
                consider(r_best, t, v)
            step_r = 0.1 * dr if r_best < 0.5 else -0.1 * dr
            simplex = [[r_best, t_best], [r_best + step_r, t_best], [r_best, t_best + 0.1 * dt]]
            res = minimize(lambda x: -np.nan_to_num(_point_value(phi, c, x[0], x[1]), nan=-1.0),
                           x0=[r_best, t_best], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400,
                                    "initial_simplex": simplex})
            consider(res.x[0], res.x[1], -res.fun)
            history.append(best)
            if abs(best - before) <= cfg.rel_tol * max(abs(best), 1e-300):
                converged = True
                break
            dr, dt = dr / 2, dt / 2
        if not converged:
            reason = f"refinement did not settle within {cfg.max_rounds} rounds"
    elif grid_value == 0:
        converged = True
    else:
        reason = "refinement disabled"

    unbounded = False
    if cfg.check_unbounded and best > 0:
        inner, _ = circle_profile(phi, c, 1 - 1e-3, n_theta=min(cfg.n_theta, 512),
                                  threads=cfg.threads)
        outer, _ = circle_profile(phi, c, 1 - 1e-5, n_theta=min(cfg.n_theta, 512),
                                  threads=cfg.threads)
        # a maximizer pushed to the rim means the running max is itself the blow-up
        at_rim = r_best > 1 - 1e-3
        if outer > UNBOUNDED_GROWTH * inner and (outer > 1e-3 * best or at_rim):
            unbounded = True
            converged = False
            reason = "weighted profile still grows near the boundary; norm is likely infinite"

    argmax = complex(r_best * np.exp(1j * t_best))
    return NormEstimate(value=grid_value, refined=best, argmax=argmax,
                        resolution=resolution, converged=converged, unbounded=unbounded,
                        reason=reason, history=history)


def operator_norm(f, op: str, c: Optional[float] = None, cfg: GridConfig = DEFAULT_GRID,
                  **kw) -> NormEstimate:
    """``||op f||_c``; the weight defaults to the operator's differential degree."""
    from .schwarzian import apply_operator, as_function, minimal_order, operator_weight

    f = as_function(f)
    weight = operator_weight(op) if c is None else c
    order = minimal_order(op)
    return sup_norm(lambda z: apply_operator(f, op, z, order=order), weight, cfg, **kw)


def invariance_check(f, n: int, T, M, cfg: GridConfig = DEFAULT_GRID, points=None):
    """Compare ``||V^n f||_n`` with ``||V^n (M∘f∘T)||_n`` and check the pointwise rule."""
    from .schwarzian import Function, as_function, transformation_residual

    f = as_function(f)
    g = Function.from_mobius(M).compose(f.compose(Function.from_mobius(T)))
    op = f"V:{n}"
    a = operator_norm(f, op, n, cfg)
    b = operator_norm(g, op, n, cfg)
    if not (a.converged and b.converged):
        raise NormError("norm estimate did not converge: "
                        f"{a.reason if not a.converged else b.reason}")
    if points is None:
        rng = np.random.default_rng(0)
        rad = 0.9 * np.sqrt(rng.uniform(size=20))
        points = rad * np.exp(2j * np.pi * rng.uniform(size=20))
    pointwise = transformation_residual("V", f, n, np.asarray(points), T, M)
    return {
        "norm_f": a.refined,
        "norm_transformed": b.refined,
        "difference": abs(a.refined - b.refined),
        "pointwise": float(np.nanmax(pointwise)),
    }

"""Command-line front end.

Exit status: 0 on success, 1 when a computation fails, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import __version__
from .errors import ParseError, SchwarzError
from .expr import evaluate, free_variables, parse

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """``"0.3+0.4i"``, ``"(0.3+0.4i)"``, ``"-2i"``, ``"0.5"``; Python's ``j`` also works."""
    src = text.strip()
    try:
        node = parse(src)
    except ParseError:
        try:
            return complex(src.replace(" ", ""))
        except ValueError:
            raise UsageError(f"cannot read {text!r} as a complex number") from None
    if free_variables(node):
        raise UsageError(f"point {text!r} must be a constant")
    return complex(evaluate(node, {}))


def _finite(x):
    # JSON has no nan/inf; a missing number is reported as null
    x = float(x)
    return x if np.isfinite(x) else None


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _finite(np.real(v)), "im": _finite(np.imag(v))}
    if isinstance(v, (float, np.floating)):
        return _finite(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _grid(args):
    from .norm import DEFAULT_GRID, GridConfig

    return GridConfig(
        n_r=args.n_r or DEFAULT_GRID.n_r,
        n_theta=args.n_theta or DEFAULT_GRID.n_theta,
        rel_tol=args.rel_tol or DEFAULT_GRID.rel_tol,
        threads=args.threads,
    )


def _function(args):
    from .metric import metric_by_name
    from .schwarzian import Function

    try:
        source = metric_by_name(args.source)
        target = metric_by_name(args.target)
    except (ValueError, ParseError) as exc:
        raise UsageError(str(exc)) from None
    try:
        return Function.from_expr(args.expr, source=source, target=target)
    except ParseError as exc:
        raise UsageError(f"--expr: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args):
    from .schwarzian import apply_operator, parse_operator

    try:
        op = parse_operator(args.op)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    f = _function(args)
    z = parse_complex(args.at)
    value = complex(apply_operator(f, op, z, route=args.route, order=args.order))
    result = {"value": value}
    config = {"expr": f.name, "op": args.op, "at": z, "route": args.route,
              "order": args.order, "source": f.source.name, "target": f.target.name}
    table = [("value", _fmt(value))]
    return config, result, table


def cmd_norm(args):
    from .norm import operator_norm
    from .schwarzian import operator_weight, parse_operator

    try:
        op = parse_operator(args.op)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    f = _function(args)
    cfg = _grid(args)
    c = args.weight if args.weight is not None else operator_weight(op)
    est = operator_norm(f, args.op, c, cfg, symmetric=args.symmetric)
    result = est.as_dict()
    config = {"expr": f.name, "op": args.op, "weight": c, "source": f.source.name}
    table = [("value", f"{est.refined:.12g}"), ("grid value", f"{est.value:.12g}"),
             ("argmax", _fmt(est.argmax)), ("converged", str(est.converged))]
    if est.reason:
        table.append(("note", est.reason))
    return config, result, table


def cmd_check(args):
    from .criteria import univalence_check

    f = _function(args)
    cfg = _grid(args)
    v = univalence_check(f, cfg)
    result = v.as_dict()
    config = {"expr": f.name}
    table = [("conclusion", v.conclusion),
             ("necessary ||Sf||_2 <= 6", v.necessary_S2),
             ("necessary ||Vf||_3 <= 16", v.necessary_V3),
             ("sufficient ||Sf||_2 <= 2", str(v.sufficient_S2)),
             ("sufficient ||Vf||_3 <= 3/2", str(v.sufficient_V3))]
    if v.evidence:
        table.insert(1, ("||Sf||_2", f"{v.evidence['norm_S2']['value']:.10g}"))
        table.insert(2, ("||Vf||_3", f"{v.evidence['norm_V3']['value']:.10g}"))
    for r in v.reasons:
        table.append(("note", r))
    return config, result, table


def cmd_repr(args):
    from .criteria import integral_representation

    f = _function(args)
    z = parse_complex(args.at)
    if abs(z) >= 1:
        raise UsageError("--at must lie inside the unit disk")
    rep = integral_representation(f, z, tol=args.tol)
    config = {"expr": f.name, "at": z, "tol": args.tol}
    table = [("reconstruction", _fmt(rep["reconstruction"])), ("direct Sf", _fmt(rep["direct"])),
             ("|difference|", f"{rep['error']:.3e}"), ("converged", str(rep["converged"])),
             ("nodes", f"{rep['n_alpha']} x {rep['n_s']}")]
    return config, rep, table


def cmd_poly(args):
    from .polynomials import dump, gen_P, gen_T

    if args.n < 0 or args.n > 12:
        raise UsageError("--n must lie in 0..12")
    family = args.family.upper()
    poly = (gen_P if family == "P" else gen_T)(args.n)
    text = dump(family, args.n)
    result = {"family": family, "n": args.n, "polynomial": str(poly),
              "terms": [line.split(" ", 1) for line in text.splitlines()] if poly.terms else []}
    return {"family": family, "n": args.n}, result, None, text


def cmd_verify(args):
    from .verify import GROUPS, suite_ok, verify_suite

    if args.only and args.only not in GROUPS:
        raise UsageError(f"--only must be one of: {', '.join(GROUPS)}")
    rows = verify_suite(only=args.only, degrade=args.degrade, seed=args.seed)
    result = {"rows": [r.as_dict() for r in rows], "ok": suite_ok(rows)}
    config = {"only": args.only, "degrade": args.degrade, "seed": args.seed}
    lines = [f"{'status':8} {'group':12} {'constant':46} {'expected':>24} {'computed':>24} tol"]
    for r in rows:
        lines.append(f"{r.status:8} {r.group:12} {r.name[:46]:46} {_short(r.expected):>24} "
                     f"{_short(r.computed):>24} {r.tolerance:g}")
    code = 0 if result["ok"] else 1
    return config, result, None, "\n".join(lines), code


def _fmt(z):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.15g}"
    return f"{z.real:.15g}{z.imag:+.15g}i"


def _short(v):
    if isinstance(v, (complex, float, int, np.number)) and not isinstance(v, bool):
        return _fmt(v)[:24]
    return str(v)[:24]


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schwarzkit",
                                     description="Schwarzian derivatives, norms and univalence criteria.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, point=False):
        p.add_argument("--expr", required=True, help="function of z, e.g. 'z/(1-z)^2'")
        p.add_argument("--source", default="hyperbolic", help="source metric name")
        p.add_argument("--target", default="spherical", help="target metric name")
        if point:
            p.add_argument("--at", required=True, help="point such as 0.3+0.4i")
        p.add_argument("--json", action="store_true", help="emit a JSON report")

    def grid(p):
        p.add_argument("--n-r", type=int, default=None, help="radial grid size")
        p.add_argument("--n-theta", type=int, default=None, help="angular grid size")
        p.add_argument("--rel-tol", type=float, default=None, help="refinement tolerance")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (SCHWARZ_THREADS caps this)")

    p = sub.add_parser("eval", help="evaluate an operator at a point")
    common(p, point=True)
    p.add_argument("--op", required=True, help="S, Sn:<n>, psi:<n>, D:<n>, Q:<n>, Sigma:<n>, "
                                               "Dproj:<n> or V:<n>")
    p.add_argument("--route", default=None, help="alternative route where one exists")
    p.add_argument("--order", type=int, default=None, help="jet order override")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("norm", help="weighted sup-norm of an operator over the disk")
    common(p)
    p.add_argument("--op", required=True)
    p.add_argument("--weight", type=float, default=None, help="exponent c (default: operator degree)")
    p.add_argument("--symmetric", action="store_true",
                   help="scan only the upper half disk (phi(conj z) = conj phi(z))")
    grid(p)
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser("check", help="univalence verdict from the norm criteria")
    common(p)
    grid(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("repr", help="rebuild Sf(z) from Vf by the disk integral")
    common(p, point=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(handler=cmd_repr)

    p = sub.add_parser("poly", help="exact polynomial families")
    psub = p.add_subparsers(dest="action", required=True)
    d = psub.add_parser("dump", help="print the monomials of P_n or T_n")
    d.add_argument("--family", required=True, choices=["P", "T", "p", "t"])
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--json", action="store_true")
    d.set_defaults(handler=cmd_poly)

    p = sub.add_parser("verify", help="recompute every reference constant")
    p.add_argument("--only", default=None, help="restrict to one group")
    p.add_argument("--degrade", action="store_true", help="coarsen the norm grid tenfold")
    p.add_argument("--seed", type=int, default=0, help="seed for random sample points")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_verify)
    return parser


def _module_tag(exc: BaseException) -> str:
    tb = exc.__traceback__
    name = "schwarzkit"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("schwarzkit.") and mod != "schwarzkit.cli":
            name = mod.split(".", 1)[1]
        tb = tb.tb_next
    return name


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (SchwarzError, ValueError, ArithmeticError) as exc:
        print(f"error [{_module_tag(exc)}]: {exc}", file=sys.stderr)
        return 1
    config, result, table = out[:3]
    text = out[3] if len(out) > 3 else None
    code = out[4] if len(out) > 4 else 0
    if getattr(args, "json", False):
        report = {"schema_version": SCHEMA_VERSION, "version": __version__,
                  "command": args.command, "config": _jsonable(config),
                  "result": _jsonable(result)}
        print(json.dumps(report, indent=2, sort_keys=True, allow_nan=False, default=str))
    elif text is not None:
        print(text)
    else:
        width = max(len(k) for k, _ in table)
        for k, v in table:
            print(f"{k:<{width}}  {v}")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

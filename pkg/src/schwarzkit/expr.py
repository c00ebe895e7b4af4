"""Parser and jet evaluator for meromorphic expressions in ``z``.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | 'z' | 'zbar' | const | ident '(' expr (',' expr)* ')' | '(' expr ')'

``^`` binds tighter than unary minus and is right-associative, so
``-z^2`` is ``-(z^2)`` and ``2^3^2`` is ``2^(3^2)``.  Numbers are decimals
with an optional exponent and an optional ``i`` suffix.  ``i``, ``pi``
and ``e`` are constants.  ``zbar`` is only meaningful for conformal
densities and is rejected by :func:`eval_jet`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets
from .errors import DomainError, ParseError
from .jets import Jet1, Jet2

CONSTANTS = {"i": 1j, "pi": math.pi, "e": math.e}
VARIABLES = ("z", "zbar")
FUNCTIONS = {"exp": 1, "log": 1, "sin": 1, "cos": 1, "sqrt": 1, "pow": 2}


@dataclass(frozen=True)
class Num:
    value: Union[int, float]
    imag: bool = False

    @property
    def complex_value(self):
        return 1j * self.value if self.imag else complex(self.value)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Const, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def tokenize(src):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos))
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), _byte_offset(src, pos)))
        pos = m.end()
    out.append(_Tok("eof", "", _byte_offset(src, len(src))))
    return out


def _byte_offset(src, pos):
    return len(src[:pos].encode("utf-8"))


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, src):
        self.toks = tokenize(src)
        self.pos = 0

    @property
    def tok(self):
        return self.toks[self.pos]

    def advance(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == "eof":
            self.fail(f"unexpected {self._describe()}", {text})
        return self.advance()

    def fail(self, message, expected=()):
        raise ParseError(message, self.tok.offset, expected)

    def _describe(self):
        return "end of input" if self.tok.kind == "eof" else f"token {self.tok.text!r}"

    def parse(self):
        node = self.expr()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self._describe()}", {"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            text = t.text
            imag = text.endswith("i")
            if imag:
                text = text[:-1]
            value = int(text) if text.isdigit() else float(text)
            return Num(value, imag)
        if t.kind == "ident":
            self.advance()
            name = t.text
            if name in VARIABLES:
                return Var(name)
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.expr())
                if self.tok.text != ")" or self.tok.kind == "eof":
                    self.fail(f"unexpected {self._describe()}", {")", ","})
                self.advance()
                if len(args) != FUNCTIONS[name]:
                    raise ParseError(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
                                     t.offset)
                return Call(name, tuple(args))
            raise ParseError(f"unknown identifier {name!r}", t.offset,
                             set(VARIABLES) | set(CONSTANTS) | set(FUNCTIONS))
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {self._describe()}", {"number", "identifier", "("})


def parse(src: str) -> Node:
    """Parse ``src`` into an AST; raises :class:`ParseError` with a byte offset."""
    return _Parser(src).parse()


def serialize(node: Node) -> str:
    """Canonical, fully parenthesized text that reparses to an equal AST."""
    if isinstance(node, Num):
        text = str(node.value) if isinstance(node.value, int) else repr(float(node.value))
        return text + ("i" if node.imag else "")
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{serialize(node.operand)})"
    if isinstance(node, BinOp):
        return f"({serialize(node.left)} {node.op} {serialize(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(serialize(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    return set()


# ---------------------------------------------------------------------------
# evaluation


def _int_literal(node):
    if isinstance(node, Num) and isinstance(node.value, int) and not node.imag:
        return node.value
    if isinstance(node, Neg):
        inner = _int_literal(node.operand)
        return None if inner is None else -inner
    return None


def _power(base, exponent_node, env):
    n = _int_literal(exponent_node)
    if n is not None:
        return base ** n
    if free_variables(exponent_node):
        raise DomainError(f"exponent {serialize(exponent_node)} must not depend on z")
    alpha = complex(evaluate(exponent_node, {}))
    return jets.power(base, alpha)


_UNARY = {"exp": jets.exp, "log": jets.log, "sin": jets.sin, "cos": jets.cos, "sqrt": jets.sqrt}


def evaluate(node: Node, env: dict):
    """Evaluate with ``env`` binding ``z`` (and optionally ``zbar``).

    Bindings may be complex scalars, numpy arrays, or jets; the result has
    the same kind.  Domain failures name the offending subexpression.
    """
    if isinstance(node, Num):
        return node.complex_value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        if node.name not in env:
            raise DomainError(f"variable {node.name!r} is not available here")
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, BinOp):
        left = evaluate(node.left, env)
        if node.op == "^":
            return _wrap(_power, node, left, node.right, env)
        right = evaluate(node.right, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        with np.errstate(divide="ignore", invalid="ignore"):
            if not isinstance(right, jets._JetBase) and not isinstance(left, jets._JetBase):
                if np.ndim(right) == 0 and right == 0:
                    raise DomainError(f"division by zero in {serialize(node)}")
            return left / right
    if isinstance(node, Call):
        if node.name == "pow":
            base = evaluate(node.args[0], env)
            return _wrap(_power, node, base, node.args[1], env)
        arg = evaluate(node.args[0], env)
        return _wrap(_UNARY[node.name], node, arg)
    raise TypeError(f"not an expression node: {node!r}")


def _wrap(fn, node, *args):
    try:
        return fn(*args)
    except DomainError as exc:
        raise type(exc)(f"{exc} (in {serialize(node)})") from None


def eval_jet(ast: Node, z0, order: int) -> Jet1:
    """Jet of the expression at ``z0`` (scalar or array of points)."""
    if "zbar" in free_variables(ast):
        raise DomainError("expression uses zbar; it is not holomorphic")
    zj = Jet1.variable(z0, order)
    with np.errstate(all="ignore"):
        out = evaluate(ast, {"z": zj})
    if not isinstance(out, Jet1):
        out = Jet1.constant(out, zj.base, order)
    return out


class _Ratio:
    """A jet kept as numerator over denominator; division is deferred."""

    __slots__ = ("num", "den")

    def __init__(self, num: Jet1, den: Jet1):
        self.num = num
        self.den = den

    def collapse(self) -> Jet1:
        return self.num / self.den


def _eval_ratio(node: Node, zj: Jet1, one: Jet1) -> _Ratio:
    if isinstance(node, (Num, Const)):
        return _Ratio(one * evaluate(node, {}), one)
    if isinstance(node, Var):
        if node.name != "z":
            raise DomainError(f"variable {node.name!r} is not available here")
        return _Ratio(zj, one)
    if isinstance(node, Neg):
        r = _eval_ratio(node.operand, zj, one)
        return _Ratio(-r.num, r.den)
    if isinstance(node, BinOp) and node.op != "^":
        a = _eval_ratio(node.left, zj, one)
        b = _eval_ratio(node.right, zj, one)
        if node.op == "+":
            return _Ratio(a.num * b.den + b.num * a.den, a.den * b.den)
        if node.op == "-":
            return _Ratio(a.num * b.den - b.num * a.den, a.den * b.den)
        if node.op == "*":
            return _Ratio(a.num * b.num, a.den * b.den)
        return _Ratio(a.num * b.den, a.den * b.num)
    if isinstance(node, BinOp) or (isinstance(node, Call) and node.name == "pow"):
        base_node, exp_node = (node.left, node.right) if isinstance(node, BinOp) else node.args
        base = _eval_ratio(base_node, zj, one)
        n = _int_literal(exp_node)
        if n is not None:
            return _Ratio(base.num ** n, base.den ** n) if n >= 0 else \
                _Ratio(base.den ** -n, base.num ** -n)
        return _Ratio(_wrap(_power, node, base.collapse(), exp_node, {}), one)
    if isinstance(node, Call):
        arg = _eval_ratio(node.args[0], zj, one).collapse()
        return _Ratio(_wrap(_UNARY[node.name], node, arg), one)
    raise TypeError(f"not an expression node: {node!r}")


def eval_ratio_jet(ast: Node, z0, order: int):
    """Numerator and denominator jets with ``f = num / den`` near ``z0``.

    Near a pole the quotient ``den / num`` is the well-conditioned one;
    forming ``num / den`` first would square the cancellation error.
    """
    if "zbar" in free_variables(ast):
        raise DomainError("expression uses zbar; it is not holomorphic")
    zj = Jet1.variable(z0, order)
    one = Jet1.constant(1.0, zj.base, order)
    with np.errstate(all="ignore"):
        r = _eval_ratio(ast, zj, one)
    return r.num, r.den


def eval_jet2(ast: Node, z0, order: int) -> Jet2:
    """Wirtinger jet of an expression in ``z`` and ``zbar``."""
    env = {"z": Jet2.z(z0, order), "zbar": Jet2.zbar(z0, order)}
    with np.errstate(all="ignore"):
        out = evaluate(ast, env)
    if not isinstance(out, Jet2):
        out = Jet2.constant(out, env["z"].base, order)
    return out


def eval_value(ast: Node, z, zbar=None):
    """Plain complex evaluation (no jets)."""
    z = np.asarray(z, dtype=complex)
    env = {"z": z if z.ndim else complex(z), "zbar": np.conj(z) if zbar is None else zbar}
    with np.errstate(all="ignore"):
        return evaluate(ast, env)

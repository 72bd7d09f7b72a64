"""Infix text grammar for expressions.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := number | name | name '(' vars ')' | ('exp' | 'ln') '(' expr ')' | '(' expr ')'

Names: x t z; u u_x u_t u_xx u_xt u_tt; constants k, k1.., c1.., eps;
unknown functions xi tau eta f g h p with an optional derivative suffix
(``eta_xu``) and an optional explicit signature (``tau_t(t)``) when it
differs from the default. The printer emits the same grammar, and
``parse(to_string(e)) == e`` for every canonical ``e``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import MalformedExpression
from . import nodes as N

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z][A-Za-z0-9_]*)|(\S))")
_UNKNOWN_RE = re.compile(r"^(xi|tau|eta|f|g|h|p)(?:_([xtuz]+))?$")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise MalformedExpression(f"cannot tokenize {text[pos:]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        else:
            if op not in "+-*/^(),":
                raise MalformedExpression(f"unexpected character {op!r}")
            out.append(("op", op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise MalformedExpression(f"expected {value or kind}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise MalformedExpression("empty expression")
        e = self.expr()
        if self.i != len(self.toks):
            raise MalformedExpression(f"trailing input at {self.peek()[1]!r}")
        return e

    def expr(self):
        acc = [self.term()]
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc.append(t if op == "+" else N.neg(t))
        return N.add(*acc)

    def term(self):
        e = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                e = N.mul(e, rhs)
            else:
                if rhs == N.ZERO:
                    raise MalformedExpression("division by literal 0")
                e = N.mul(e, N.power(rhs, N.MINUS_ONE))
        return e

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return N.neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            ex = self.unary()
            if base == N.ZERO and not (isinstance(ex, N.Rational) and ex.value > 0):
                raise MalformedExpression("power of literal 0 in a denominator position")
            return N.power(base, ex)
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return N.Rational(Fraction(val))
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.take("op", ")")
            return e
        if kind == "name":
            self.take()
            if val in ("exp", "ln"):
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                if val == "ln" and arg == N.ZERO:
                    raise MalformedExpression("ln of literal 0")
                return N.exp(arg) if val == "exp" else N.ln(arg)
            m = _UNKNOWN_RE.match(val)
            if m:
                derivs = tuple(m.group(2) or "")
                sig = None
                if self.peek() == ("op", "("):
                    self.take()
                    sig = []
                    while True:
                        sig.append(self.take("name")[1])
                        if self.peek() == ("op", ","):
                            self.take()
                            continue
                        break
                    self.take("op", ")")
                return N.unknown(m.group(1), *derivs, signature=sig)
            return N.symbol(val)
        raise MalformedExpression(f"unexpected token {val!r}")


def parse(text: str) -> N.Expr:
    """Parse infix text into a canonical expression."""
    return _Parser(text).parse()


# ---------------------------------------------------------------- printer

_SUM, _PROD, _POW, _ATOM = range(4)


def _atom_name(e) -> str:
    if isinstance(e, (N.NamedConst, N.IndepVar, N.JetVar)):
        return e.name
    if isinstance(e, N.UnknownDeriv):
        s = e.func + ("_" + "".join(e.derivs) if e.derivs else "")
        if e.signature != tuple(sorted(N.DEFAULT_SIGNATURES[e.func], key=N.VAR_ORDER.__getitem__)):
            s += "(" + ",".join(e.signature) + ")"
        return s
    raise TypeError(e)


def _rational_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _wrap(s, inner, outer):
    return f"({s})" if inner < outer else s


def _fmt(e, ctx: int) -> str:
    if isinstance(e, N.Rational):
        v = e.value
        s = _rational_str(v)
        if v < 0 or v.denominator != 1:
            return _wrap(s, _PROD if v.denominator != 1 and v > 0 else _SUM, ctx)
        return s
    if isinstance(e, (N.NamedConst, N.IndepVar, N.JetVar, N.UnknownDeriv)):
        return _atom_name(e)
    if isinstance(e, N.Exp):
        return f"exp({_fmt(e.arg, _SUM)})"
    if isinstance(e, N.Ln):
        return f"ln({_fmt(e.arg, _SUM)})"
    if isinstance(e, N.Power):
        b = _fmt(e.base, _ATOM)
        x = e.exponent
        if isinstance(x, N.Rational) and x.value.denominator == 1 and x.value > 0:
            xs = _rational_str(x.value)
        else:
            xs = _fmt(x, _ATOM)
        return _wrap(f"{b}^{xs}", _POW, ctx)
    if isinstance(e, N.Product):
        sign, body = _product_body(e)
        return _wrap(("-" if sign < 0 else "") + body, _PROD if sign > 0 else _SUM, ctx)
    if isinstance(e, N.Sum):
        parts = []
        for i, a in enumerate(e.args):
            sign, body = _signed_term(a)
            if i == 0:
                parts.append(("-" if sign < 0 else "") + body)
            else:
                parts.append((" - " if sign < 0 else " + ") + body)
        return _wrap("".join(parts), _SUM, ctx)
    raise TypeError(type(e))


def _product_body(e):
    coeff, factors = N.split_term(e)
    sign = -1 if coeff < 0 else 1
    c = abs(coeff)
    pieces = [_fmt(f, _POW) for f in factors]
    if c != 1:
        pieces.insert(0, _rational_str(c))
    return sign, "*".join(pieces)


def _signed_term(a):
    if isinstance(a, N.Rational):
        return (-1 if a.value < 0 else 1), _rational_str(abs(a.value))
    if isinstance(a, N.Product):
        return _product_body(a)
    return 1, _fmt(a, _PROD)


def to_string(e: N.Expr) -> str:
    return _fmt(e, _SUM)

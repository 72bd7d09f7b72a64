"""Numeric evaluation of expressions: exact where possible, then float."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..errors import DomainError, UnboundSymbol
from . import nodes as N
from .grammar import to_string


def _lookup(atom, bindings):
    if atom in bindings:
        return bindings[atom]
    name = to_string(atom)
    if name in bindings:
        return bindings[name]
    raise UnboundSymbol(name)


def _norm_bindings(bindings):
    out = {}
    for k, v in (bindings or {}).items():
        if isinstance(v, N.Rational):
            v = v.value
        elif isinstance(v, int):
            v = Fraction(v)
        out[k] = v
    return out


def eval_numeric(e: N.Expr, bindings=None):
    """Evaluate ``e`` with symbols bound by atom or by printed name.

    Rational subexpressions stay exact (``Fraction``); anything transcendental
    falls back to float. Raises ``DomainError`` for ln of a nonpositive value
    or a non-integer power of a negative base.
    """
    return _eval(e, _norm_bindings(bindings))


def _eval(e, b):
    if isinstance(e, N.Rational):
        return e.value
    if isinstance(e, (N.NamedConst, N.IndepVar, N.JetVar, N.UnknownDeriv)):
        return _lookup(e, b)
    if isinstance(e, N.Sum):
        vals = [_eval(a, b) for a in e.args]
        if all(isinstance(v, Fraction) for v in vals):
            return sum(vals, Fraction(0))
        return math.fsum(float(v) for v in vals)
    if isinstance(e, N.Product):
        acc = Fraction(1)
        for a in e.args:
            v = _eval(a, b)
            if isinstance(acc, Fraction) and isinstance(v, Fraction):
                acc = acc * v
            else:
                acc = float(acc) * float(v)
        return acc
    if isinstance(e, N.Power):
        base = _eval(e.base, b)
        ex = _eval(e.exponent, b)
        if isinstance(ex, Fraction) and ex.denominator == 1:
            if base == 0 and ex < 0:
                raise DomainError("division by zero")
            if isinstance(base, Fraction):
                return base ** int(ex)
            return float(base) ** int(ex)
        if base < 0 or (base == 0 and ex <= 0):
            raise DomainError(f"non-integer power of nonpositive base in {to_string(e)}")
        return float(base) ** float(ex)
    if isinstance(e, N.Exp):
        return math.exp(float(_eval(e.arg, b)))
    if isinstance(e, N.Ln):
        v = _eval(e.arg, b)
        if v <= 0:
            raise DomainError(f"ln of nonpositive value in {to_string(e)}")
        return math.log(float(v))
    raise TypeError(type(e))


def magnitude(e: N.Expr, bindings) -> float:
    """Sum of absolute values of the top-level terms; scale for relative tests."""
    b = _norm_bindings(bindings)
    if isinstance(e, N.Sum):
        return math.fsum(abs(float(_eval(a, b))) for a in e.args)
    return abs(float(_eval(e, b)))


def lambdify(e: N.Expr, args):
    """Compile ``e`` into a numpy-vectorized function of the named ``args``.

    Every free symbol must appear in ``args`` (names as printed).
    """
    names = list(args)
    index = {n: i for i, n in enumerate(names)}
    for s in e.free_symbols():
        if to_string(s) not in index:
            raise UnboundSymbol(to_string(s))
    fn = _compile(e, index)
    return lambda *vals: fn(vals)


def _compile(e, index):
    if isinstance(e, N.Rational):
        v = float(e.value)
        return lambda vals: v
    if isinstance(e, (N.NamedConst, N.IndepVar, N.JetVar, N.UnknownDeriv)):
        i = index[to_string(e)]
        return lambda vals: vals[i]
    if isinstance(e, N.Sum):
        fs = [_compile(a, index) for a in e.args]

        def _sum(vals):
            acc = fs[0](vals)
            for f in fs[1:]:
                acc = acc + f(vals)
            return acc
        return _sum
    if isinstance(e, N.Product):
        fs = [_compile(a, index) for a in e.args]

        def _prod(vals):
            acc = fs[0](vals)
            for f in fs[1:]:
                acc = acc * f(vals)
            return acc
        return _prod
    if isinstance(e, N.Power):
        fb = _compile(e.base, index)
        x = e.exponent
        if isinstance(x, N.Rational) and x.value.denominator == 1:
            k = int(x.value)
            return lambda vals: np.power(np.asarray(fb(vals), dtype=float), k)
        fx = _compile(x, index)
        return lambda vals: np.power(np.asarray(fb(vals), dtype=float), fx(vals))
    if isinstance(e, N.Exp):
        fa = _compile(e.arg, index)
        return lambda vals: np.exp(fa(vals))
    if isinstance(e, N.Ln):
        fa = _compile(e.arg, index)
        return lambda vals: np.log(fa(vals))
    raise TypeError(type(e))

"""Differentiation, substitution, coefficient collection and zero testing."""

from __future__ import annotations

import os
import random
from fractions import Fraction
from functools import lru_cache

from ..errors import DerivativeOrderExceeded, DomainError, MalformedExpression, NonPolynomialInJet, ProbableZero
from . import nodes as N
from .evaluate import eval_numeric, magnitude

DIFF_VARS = ("x", "t", "z", "u", "u_x", "u_t", "u_xx", "u_xt", "u_tt")
DEFAULT_SEED = 20240611
PROBE_COUNT = 20
PROBE_RTOL = 1e-9


def probe_seed() -> int:
    """Seed for random probes; ``LIESYM_SEED`` overrides the default."""
    env = os.environ.get("LIESYM_SEED")
    return int(env) if env else DEFAULT_SEED


def _var_name(v) -> str:
    if isinstance(v, (N.IndepVar, N.JetVar)):
        return v.name
    if isinstance(v, str):
        v = N.JET_ALIASES.get(v, v)
        if v in DIFF_VARS:
            return v
    raise MalformedExpression(f"cannot differentiate with respect to {v!r}")


def _depends(e: N.Expr, v: str) -> bool:
    for s in e.free_symbols():
        if isinstance(s, (N.IndepVar, N.JetVar)) and s.name == v:
            return True
        if isinstance(s, N.UnknownDeriv) and v in s.signature:
            return True
    return False


def partial_diff(e: N.Expr, v) -> N.Expr:
    """Partial derivative treating jet variables and unknown symbols as independent."""
    return _pd(e, _var_name(v))


@lru_cache(maxsize=200_000)
def _pd(e: N.Expr, v: str) -> N.Expr:
    if not _depends(e, v):
        return N.ZERO
    if isinstance(e, (N.IndepVar, N.JetVar)):
        return N.ONE
    if isinstance(e, N.UnknownDeriv):
        d = e.diff(v)
        return N.ZERO if d is None else d
    if isinstance(e, N.Sum):
        return N.add(*[_pd(a, v) for a in e.args])
    if isinstance(e, N.Product):
        args = e.args
        parts = []
        for i, a in enumerate(args):
            da = _pd(a, v)
            if da != N.ZERO:
                parts.append(N.mul(*(args[:i] + (da,) + args[i + 1:])))
        return N.add(*parts)
    if isinstance(e, N.Power):
        b, x = e.base, e.exponent
        db = _pd(b, v)
        if not _depends(x, v):
            return N.mul(x, N.power(b, N.add(x, N.MINUS_ONE)), db)
        dx = _pd(x, v)
        return N.mul(e, N.add(N.mul(dx, N.ln(b)), N.mul(x, db, N.power(b, N.MINUS_ONE))))
    if isinstance(e, N.Exp):
        return N.mul(e, _pd(e.arg, v))
    if isinstance(e, N.Ln):
        return N.mul(_pd(e.arg, v), N.power(e.arg, N.MINUS_ONE))
    raise TypeError(type(e))


_U, _UX, _UT, _UXX, _UXT, _UTT = (N.JetVar(n) for n in ("u", "u_x", "u_t", "u_xx", "u_xt", "u_tt"))


def _check_first_order(e):
    for s in e.free_symbols():
        if isinstance(s, N.JetVar) and s.order >= 2:
            raise DerivativeOrderExceeded(f"total derivative of an expression containing {s.name}")


def total_diff_x(e: N.Expr) -> N.Expr:
    """D_x = d_x + u_x d_u + u_xx d_{u_x} + u_xt d_{u_t} on expressions of jet order <= 1."""
    _check_first_order(e)
    return N.add(_pd(e, "x"), N.mul(_UX, _pd(e, "u")), N.mul(_UXX, _pd(e, "u_x")), N.mul(_UXT, _pd(e, "u_t")))


def total_diff_t(e: N.Expr) -> N.Expr:
    """D_t = d_t + u_t d_u + u_xt d_{u_x} + u_tt d_{u_t} on expressions of jet order <= 1."""
    _check_first_order(e)
    return N.add(_pd(e, "t"), N.mul(_UT, _pd(e, "u")), N.mul(_UXT, _pd(e, "u_x")), N.mul(_UTT, _pd(e, "u_t")))


# ---------------------------------------------------------------- substitution

def _rebuild(e: N.Expr, leaf, memo: dict) -> N.Expr:
    if e in memo:
        return memo[e]
    if isinstance(e, (N.Rational, N.NamedConst, N.IndepVar, N.JetVar, N.UnknownDeriv)):
        r = leaf(e)
    elif isinstance(e, N.Sum):
        r = N.add(*[_rebuild(a, leaf, memo) for a in e.args])
    elif isinstance(e, N.Product):
        r = N.mul(*[_rebuild(a, leaf, memo) for a in e.args])
    elif isinstance(e, N.Power):
        r = N.power(_rebuild(e.base, leaf, memo), _rebuild(e.exponent, leaf, memo))
    elif isinstance(e, N.Exp):
        r = N.exp(_rebuild(e.arg, leaf, memo))
    elif isinstance(e, N.Ln):
        r = N.ln(_rebuild(e.arg, leaf, memo))
    else:
        raise TypeError(type(e))
    memo[e] = r
    return r


def subs(e: N.Expr, mapping: dict, compose: bool = False) -> N.Expr:
    """Simultaneous replacement of atoms, then canonicalization.

    Replacing a variable that an unknown function present in ``e`` depends
    on is refused: the unknown symbol cannot follow the change of argument.
    With ``compose=True`` the unknowns are read as evaluated at the new
    argument and left untouched.
    """
    mapping = {N.as_expr(k): N.as_expr(v) for k, v in mapping.items()}
    names = {k.name for k in mapping if isinstance(k, (N.IndepVar, N.JetVar))}
    for s in ([] if compose else e.free_symbols()):
        if isinstance(s, N.UnknownDeriv) and names & set(s.signature) and s not in mapping:
            raise ValueError(f"cannot substitute {sorted(names)} under unknown function {s}")
    return _rebuild(e, lambda a: mapping.get(a, a), {})


def substitute(e: N.Expr, target, replacement) -> N.Expr:
    return subs(e, {target: replacement})


def substitute_function(e: N.Expr, func: str, replacement) -> N.Expr:
    """Replace every derivative symbol of ``func`` by the matching derivative of ``replacement``."""
    replacement = N.as_expr(replacement)

    def leaf(a):
        if isinstance(a, N.UnknownDeriv) and a.func == func:
            r = replacement
            for v in a.derivs:
                r = partial_diff(r, v)
            return r
        return a

    return _rebuild(e, leaf, {})


def restrict_signature(e: N.Expr, func: str, signature) -> N.Expr:
    """Declare ``func`` independent of the variables outside ``signature``.

    Derivative symbols with respect to a dropped variable become zero.
    """
    sig = tuple(signature)

    def leaf(a):
        if isinstance(a, N.UnknownDeriv) and a.func == func:
            return N.unknown(func, *a.derivs, signature=sig)
        return a

    return _rebuild(e, leaf, {})


# ---------------------------------------------------------------- collection

def _is_jet_deriv(a) -> bool:
    return isinstance(a, N.JetVar) and a.order >= 1


def _split_polynomial(e: N.Expr, is_var):
    """Yield (var-part factors, coefficient, rest factors) for each term."""
    for m, c in N.as_terms(e).items():
        var_part, rest = [], []
        for f in m:
            b, x = N.base_exp(f)
            if is_var(b):
                if not (isinstance(x, N.Rational) and x.value.denominator == 1 and x.value > 0):
                    raise NonPolynomialInJet(f"{f} is not a polynomial power")
                var_part.append(f)
            else:
                if any(is_var(s) for s in f.free_symbols()):
                    raise NonPolynomialInJet(f"{f} hides a collected variable inside a non-polynomial factor")
                rest.append(f)
        yield tuple(var_part), c, tuple(rest)


def polynomial_coefficients(e: N.Expr, is_var) -> dict:
    """Map var-monomial Expr -> coefficient Expr, for atoms selected by ``is_var``."""
    acc = {}
    for vp, c, rest in _split_polynomial(e, is_var):
        d = acc.setdefault(vp, {})
        d[rest] = d.get(rest, 0) + c
    return {N.build_monomial(Fraction(1), vp): N.build_sum(d) for vp, d in acc.items()}


def terms_of(e: N.Expr) -> list:
    """Top-level terms of ``e`` as canonical expressions."""
    return list(e.args) if isinstance(e, N.Sum) else ([] if e == N.ZERO else [e])


def collect(e: N.Expr, monomials):
    """Coefficients of the given jet monomials, plus the remainder.

    ``e == sum(m * coeff[m]) + remainder`` with coefficients and remainder
    free of the listed monomials.
    """
    monomials = [N.as_expr(m) for m in monomials]
    wanted = {}
    for m in monomials:
        _, fac = N.split_term(m)
        wanted[tuple(fac)] = m
    coeffs = {m: {} for m in monomials}
    rem = {}
    for vp, c, rest in _split_polynomial(e, _is_jet_deriv):
        if vp in wanted:
            d = coeffs[wanted[vp]]
            d[rest] = d.get(rest, 0) + c
        else:
            key = tuple(sorted(vp + rest, key=N._factor_sort_key))
            rem[key] = rem.get(key, 0) + c
    return {m: N.build_sum(d) for m, d in coeffs.items()}, N.build_sum(rem)


def jet_monomials(e: N.Expr) -> list:
    """Distinct derivative-jet monomials present in ``e``."""
    keys = {vp for vp, _, _ in _split_polynomial(e, _is_jet_deriv)}
    return sorted((N.build_monomial(Fraction(1), k) for k in keys), key=lambda m: m.key)


def coefficient(e: N.Expr, atom, n: int = 1) -> N.Expr:
    """Coefficient of ``atom**n`` in ``e`` viewed as a polynomial in ``atom``."""
    atom = N.as_expr(atom)
    target = N.power(atom, N.Rational(n)) if n != 0 else N.ONE
    return polynomial_coefficients(e, lambda b: b == atom).get(target, N.ZERO)


# ---------------------------------------------------------------- zero test

def together_numerator(e: N.Expr) -> N.Expr:
    """Multiply through by every sum appearing with a negative integer power."""
    denoms = {}
    terms = N.as_terms(e)
    for m in terms:
        for f in m:
            b, x = N.base_exp(f)
            if isinstance(b, N.Sum) and isinstance(x, N.Rational) and x.value.denominator == 1 and x.value < 0:
                denoms[b] = max(denoms.get(b, 0), -int(x.value))
    if not denoms:
        return e
    out = []
    for m, c in terms.items():
        left = []
        powers = dict(denoms)
        for f in m:
            b, x = N.base_exp(f)
            if b in powers:
                powers[b] = powers[b] + int(x.value)
            else:
                left.append(f)
        out.append(N.mul(N.build_monomial(c, left), *[N.power(b, N.Rational(k)) for b, k in powers.items()]))
    return N.add(*out)


def _probe_value(s, rng):
    if isinstance(s, N.IndepVar) or (isinstance(s, N.UnknownDeriv) and s.func in N.POSITIVE_FUNCTIONS and s.order == 0):
        return Fraction(rng.uniform(0.5, 3.0)).limit_denominator(997)
    v = Fraction(rng.uniform(1 / 3, 3.0)).limit_denominator(997)
    return v if rng.random() < 0.5 else -v


def probe_vanishes(e: N.Expr, seed=None, count: int = PROBE_COUNT, rtol: float = PROBE_RTOL):
    """True/False if all / not all valid probes vanish; None if no probe was valid."""
    rng = random.Random(probe_seed() if seed is None else seed)
    symbols = sorted(e.free_symbols(), key=lambda s: s.key)
    valid = 0
    attempts = 0
    while valid < count and attempts < 4 * count:
        attempts += 1
        b = {s: _probe_value(s, rng) for s in symbols}
        try:
            val = float(eval_numeric(e, b))
            scale_ = magnitude(e, b)
        except (DomainError, ZeroDivisionError, OverflowError):
            continue
        valid += 1
        if abs(val) > rtol * max(scale_, 1e-300):
            return False
    return None if valid == 0 else True


def is_zero(e: N.Expr, seed=None) -> bool:
    """Exact zero test on canonical forms, with a random-probe guard.

    Raises ``ProbableZero`` when the canonical form is nonzero yet every
    probe vanishes.
    """
    e = N.as_expr(e)
    if e == N.ZERO:
        return True
    if together_numerator(e) == N.ZERO:
        return True
    if probe_vanishes(e, seed):
        raise ProbableZero(e)
    return False

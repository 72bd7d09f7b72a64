"""Expression nodes and the canonical constructors.

Every public constructor (``add``, ``mul``, ``power``, ``exp``, ``ln``)
returns a canonical expression: a fully expanded sum of monomials with exact
rational coefficients. A monomial is a rational coefficient times a sorted
tuple of factors, each factor being an atom or ``Power(atom, exponent)``.
At most one ``Exp`` factor survives in a monomial (exponents are merged), and
``Exp(c*ln(y) + r)`` with constant ``c`` is rewritten as ``y**c * Exp(r)``.

Sums raised to anything other than a positive integer stay as factor bases;
they are stored primitive (first term has coefficient 1) so that equal
denominators compare equal.

Class constructors themselves do no canonicalization; ``normalize`` rebuilds
an arbitrary raw tree through the canonical constructors.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from ..errors import DerivativeOrderExceeded, MalformedExpression

INDEP_VARS = ("x", "t", "z")
JET_ORDERS = {"u": 0, "u_x": 1, "u_t": 1, "u_xx": 2, "u_xt": 2, "u_tt": 2}
JET_ALIASES = {"u_tx": "u_xt"}
DEFAULT_SIGNATURES = {
    "xi": ("x", "t", "u"),
    "tau": ("x", "t", "u"),
    "eta": ("x", "t", "u"),
    "f": ("u",),
    "g": ("u",),
    "h": ("z",),
    "p": ("z",),
}
# functions whose undifferentiated value is positive on the working domain
POSITIVE_FUNCTIONS = frozenset({"h", "p"})
VAR_ORDER = {"x": 0, "t": 1, "u": 2, "z": 3}
MAX_DERIV_ORDER = 3
_CONST_RE = re.compile(r"^(k\d*|c\d+|eps)$")

# kind ranks fix the total order between node kinds
_R_RATIONAL, _R_CONST, _R_INDEP, _R_JET, _R_UNKNOWN, _R_EXP, _R_LN, _R_POWER, _R_PRODUCT, _R_SUM = range(10)


def is_const_name(name: str) -> bool:
    return bool(_CONST_RE.match(name))


class Expr:
    """Immutable expression node. Equality is structural."""

    __slots__ = ("_key", "_hash", "_free")
    rank = -1

    def _init_key(self, key):
        self._key = key
        self._hash = hash(key)
        self._free = None

    @property
    def key(self):
        return self._key

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Rational) and self.value == other
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        return self._key < other._key

    # arithmetic always produces canonical results
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __str__(self):
        from .grammar import to_string

        return to_string(self)

    def __repr__(self):
        return f"Expr({self})"

    def children(self):
        return ()

    def free_symbols(self) -> frozenset:
        """Atoms (constants, variables, unknown-function symbols) occurring in the tree."""
        if self._free is None:
            if isinstance(self, (NamedConst, IndepVar, JetVar, UnknownDeriv)):
                self._free = frozenset((self,))
            else:
                acc = frozenset()
                for c in self.children():
                    acc = acc | c.free_symbols()
                self._free = acc
        return self._free


class Rational(Expr):
    __slots__ = ("value",)
    rank = _R_RATIONAL

    def __init__(self, value):
        self.value = Fraction(value)
        self._init_key((_R_RATIONAL, self.value))


class NamedConst(Expr):
    __slots__ = ("name",)
    rank = _R_CONST

    def __init__(self, name: str):
        self.name = name
        self._init_key((_R_CONST, name))


class IndepVar(Expr):
    __slots__ = ("name",)
    rank = _R_INDEP

    def __init__(self, name: str):
        self.name = name
        self._init_key((_R_INDEP, name))


class JetVar(Expr):
    __slots__ = ("name",)
    rank = _R_JET

    def __init__(self, name: str):
        self.name = name
        self._init_key((_R_JET, JET_ORDERS.get(name, 9), name))

    @property
    def order(self) -> int:
        return JET_ORDERS[self.name]


class UnknownDeriv(Expr):
    """Derivative symbol of an unknown function, e.g. ``eta_xu``.

    ``derivs`` is the sorted multi-index spelled as variable names;
    ``signature`` lists the arguments the function depends on.
    """

    __slots__ = ("func", "derivs", "signature")
    rank = _R_UNKNOWN

    def __init__(self, func: str, derivs=(), signature=None):
        if signature is None:
            signature = DEFAULT_SIGNATURES[func]
        self.func = func
        self.derivs = tuple(sorted(derivs, key=VAR_ORDER.__getitem__))
        self.signature = tuple(sorted(signature, key=VAR_ORDER.__getitem__))
        self._init_key((_R_UNKNOWN, func, len(self.derivs), self.derivs, self.signature))

    @property
    def order(self) -> int:
        return len(self.derivs)

    def diff(self, var: str) -> "UnknownDeriv | None":
        if var not in self.signature:
            return None
        if self.order >= MAX_DERIV_ORDER:
            raise DerivativeOrderExceeded(f"{self} differentiated by {var} exceeds order {MAX_DERIV_ORDER}")
        return UnknownDeriv(self.func, self.derivs + (var,), self.signature)


class Exp(Expr):
    __slots__ = ("arg",)
    rank = _R_EXP

    def __init__(self, arg: Expr):
        self.arg = arg
        self._init_key((_R_EXP, arg._key))

    def children(self):
        return (self.arg,)


class Ln(Expr):
    __slots__ = ("arg",)
    rank = _R_LN

    def __init__(self, arg: Expr):
        self.arg = arg
        self._init_key((_R_LN, arg._key))

    def children(self):
        return (self.arg,)


class Power(Expr):
    __slots__ = ("base", "exponent")
    rank = _R_POWER

    def __init__(self, base: Expr, exponent: Expr):
        self.base = base
        self.exponent = exponent
        self._init_key((_R_POWER, base._key, exponent._key))

    def children(self):
        return (self.base, self.exponent)


class Product(Expr):
    __slots__ = ("args",)
    rank = _R_PRODUCT

    def __init__(self, args):
        self.args = tuple(args)
        self._init_key((_R_PRODUCT,) + tuple(a._key for a in self.args))

    def children(self):
        return self.args


class Sum(Expr):
    __slots__ = ("args",)
    rank = _R_SUM

    def __init__(self, args):
        self.args = tuple(args)
        self._init_key((_R_SUM,) + tuple(a._key for a in self.args))

    def children(self):
        return self.args


ZERO = Rational(0)
ONE = Rational(1)
MINUS_ONE = Rational(-1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Rational(value)
    if isinstance(value, str):
        from .grammar import parse

        return parse(value)
    if isinstance(value, float):
        return Rational(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def symbol(name: str) -> Expr:
    """Atom by name: ``x``, ``u_xx``, ``k3``, ``eps`` ..."""
    if name in INDEP_VARS:
        return IndepVar(name)
    name = JET_ALIASES.get(name, name)
    if name in JET_ORDERS:
        return JetVar(name)
    if is_const_name(name):
        return NamedConst(name)
    raise MalformedExpression(f"unknown identifier {name!r}")


def unknown(func: str, *derivs: str, signature=None) -> UnknownDeriv:
    if func not in DEFAULT_SIGNATURES:
        raise MalformedExpression(f"unknown function {func!r}")
    sig = tuple(signature) if signature is not None else DEFAULT_SIGNATURES[func]
    for v in sig:
        if v not in VAR_ORDER:
            raise MalformedExpression(f"bad signature variable {v!r} for {func}")
    if len(derivs) > MAX_DERIV_ORDER:
        raise DerivativeOrderExceeded(f"{func} with {len(derivs)} derivatives")
    if any(d not in sig for d in derivs):
        return ZERO
    return UnknownDeriv(func, derivs, sig)


# ---------------------------------------------------------------- monomials

def _is_rational_int(e: Expr) -> bool:
    return isinstance(e, Rational) and e.value.denominator == 1


def base_exp(factor: Expr):
    if isinstance(factor, Power):
        return factor.base, factor.exponent
    return factor, ONE


def split_term(e: Expr):
    """(coefficient, factors) of a non-sum canonical expression."""
    if isinstance(e, Rational):
        return e.value, ()
    if isinstance(e, Product):
        if isinstance(e.args[0], Rational):
            return e.args[0].value, e.args[1:]
        return Fraction(1), e.args
    return Fraction(1), (e,)


def as_terms(e: Expr) -> dict:
    """Map monomial factor tuple -> rational coefficient."""
    if isinstance(e, Sum):
        out = {}
        for a in e.args:
            c, m = split_term(a)
            out[m] = c
        return out
    c, m = split_term(e)
    return {m: c} if c != 0 else {}


def _factor_sort_key(f: Expr):
    b, e = base_exp(f)
    return (b._key, e._key)


def build_monomial(coeff: Fraction, factors) -> Expr:
    if coeff == 0:
        return ZERO
    if not factors:
        return Rational(coeff)
    factors = tuple(factors)
    if coeff == 1:
        if len(factors) == 1:
            return factors[0]
        return Product(factors)
    return Product((Rational(coeff),) + factors)


def _monomial_key(m):
    return tuple(_factor_sort_key(f) for f in m)


def build_sum(terms: dict) -> Expr:
    items = [(m, c) for m, c in terms.items() if c != 0]
    if not items:
        return ZERO
    if len(items) == 1:
        m, c = items[0]
        return build_monomial(c, m)
    items.sort(key=lambda mc: _monomial_key(mc[0]))
    return Sum(tuple(build_monomial(c, m) for m, c in items))


def _accumulate(target: dict, terms: dict, scale: Fraction = Fraction(1)):
    for m, c in terms.items():
        v = target.get(m, 0) + c * scale
        if v == 0:
            target.pop(m, None)
        else:
            target[m] = v


# ---------------------------------------------------------------- add / mul

def add(*xs) -> Expr:
    acc = {}
    for x in xs:
        _accumulate(acc, as_terms(as_expr(x)))
    return build_sum(acc)


def neg(e: Expr) -> Expr:
    return build_sum({m: -c for m, c in as_terms(e).items()})


def scale(e: Expr, c) -> Expr:
    c = Fraction(c)
    return build_sum({m: v * c for m, v in as_terms(e).items()})


def _mul_terms(a: dict, b: dict) -> dict:
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            prod = _mul_monomials(m1, m2) if (m1 and m2) else {m1 or m2: Fraction(1)}
            _accumulate(out, prod, c1 * c2)
    return out


def mul(*xs) -> Expr:
    acc = {(): Fraction(1)}
    for x in xs:
        x = as_expr(x)
        if isinstance(x, Rational):
            if x.value == 0:
                return ZERO
            acc = {m: c * x.value for m, c in acc.items()}
            continue
        acc = _mul_terms(acc, as_terms(x))
        if not acc:
            return ZERO
    return build_sum(acc)


@lru_cache(maxsize=200_000)
def _mul_monomials(m1: tuple, m2: tuple) -> dict:
    """Product of two monomials as a term dict (usually a single term)."""
    bases = {}
    exp_args = []
    for f in m1 + m2:
        if isinstance(f, Exp):
            exp_args.append(f.arg)
            continue
        b, e = base_exp(f)
        if b in bases:
            bases[b] = add(bases[b], e)
        else:
            bases[b] = e
    coeff = Fraction(1)
    factors = []
    extra = []
    for b, e in bases.items():
        c, f, x = _pow_factor(b, e)
        coeff *= c
        if f is not None:
            factors.append(f)
        if x is not None:
            extra.append(x)
    if len(exp_args) == 1:
        factors.append(Exp(exp_args[0]))
    elif exp_args:
        ex = exp(add(*exp_args))
        if ex != ONE:
            extra.append(ex)
    factors.sort(key=_factor_sort_key)
    result = {tuple(factors): coeff}
    for x in extra:
        result = _mul_terms(result, as_terms(x))
    return result


def _pow_factor(b: Expr, e: Expr):
    """Canonical b**e for an atom-like base: (coeff, factor|None, extra Expr|None)."""
    if e == ZERO:
        return Fraction(1), None, None
    if isinstance(b, Rational):
        c, m = split_term(power(b, e))
        return c, (m[0] if m else None), None
    if isinstance(b, Sum):
        if _is_rational_int(e) and e.value > 0:
            return Fraction(1), None, power(b, e)
        return Fraction(1), Power(b, e), None
    if e == ONE:
        return Fraction(1), b, None
    return Fraction(1), Power(b, e), None


# ---------------------------------------------------------------- power

def _exact_root(n: int, q: int):
    if n < 0:
        return None
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    return None


def _rational_power(b: Fraction, e: Expr) -> Expr:
    if b == 1:
        return ONE
    if isinstance(e, Rational):
        ev = e.value
        if ev.denominator == 1:
            if b == 0 and ev < 0:
                raise MalformedExpression("division by zero")
            return Rational(b ** int(ev))
        if b == 0:
            return ZERO if ev > 0 else _raise_div0()
        if b > 0:
            q = ev.denominator
            rn, rd = _exact_root(b.numerator, q), _exact_root(b.denominator, q)
            if rn is not None and rd is not None:
                return Rational(Fraction(rn, rd) ** ev.numerator)
            whole = ev.numerator // q
            frac = ev - whole
            if whole != 0:
                return build_monomial(b ** whole, (Power(Rational(b), Rational(frac)),))
        return Power(Rational(b), e)
    if b == 0:
        raise MalformedExpression("zero raised to a symbolic power")
    return Power(Rational(b), e)


def _raise_div0():
    raise MalformedExpression("division by zero")


def primitive_sum(s: Sum):
    """(content, primitive sum) with the first term's coefficient normalized to 1."""
    c0, _ = split_term(s.args[0])
    if c0 == 1:
        return Fraction(1), s
    return c0, build_sum({m: c / c0 for m, c in as_terms(s).items()})


MAX_EXPAND_POWER = 12


def power(b: Expr, e: Expr) -> Expr:
    b = as_expr(b)
    e = as_expr(e)
    if e == ZERO:
        return ONE
    if e == ONE:
        return b
    if isinstance(b, Rational):
        return _rational_power(b.value, e)
    if isinstance(b, Exp):
        return exp(mul(b.arg, e))
    if isinstance(b, Power):
        return power(b.base, mul(b.exponent, e))
    if isinstance(b, Product):
        return mul(*[power(a, e) for a in b.args])
    if isinstance(b, Sum):
        if _is_rational_int(e) and 0 < e.value <= MAX_EXPAND_POWER:
            r = b
            for _ in range(int(e.value) - 1):
                r = mul(r, b)
            return r
        common, rest = _common_factor(b)
        if common:
            return mul(power(build_monomial(Fraction(1), common), e), power(rest, e))
        c, prim = primitive_sum(b)
        if c == 1:
            return Power(prim, e)
        return mul(_rational_power(c, e), Power(prim, e))
    return Power(b, e)


def _common_factor(s: Sum):
    """Factors shared by every term of ``s`` (rational exponents, minimum taken)."""
    terms = as_terms(s)
    shared = None
    for m in terms:
        here = {}
        for f in m:
            b, x = base_exp(f)
            if isinstance(x, Rational) and not isinstance(b, Rational):
                here[b] = x.value
        if shared is None:
            shared = here
        else:
            shared = {b: min(v, here[b]) for b, v in shared.items() if b in here}
        if not shared:
            return (), s
    common = tuple(sorted((power(b, Rational(v)) for b, v in shared.items() if v != 0), key=_factor_sort_key))
    if not common:
        return (), s
    inv = build_monomial(Fraction(1), common)
    rest = mul(s, power(inv, MINUS_ONE))
    return common, rest


# ---------------------------------------------------------------- exp / ln

def _is_constant_factor(f: Expr) -> bool:
    b, e = base_exp(f)
    return isinstance(b, (NamedConst, Rational)) and all(isinstance(s, NamedConst) for s in e.free_symbols())


def exp(a) -> Expr:
    a = as_expr(a)
    if a == ZERO:
        return ONE
    extracted = []
    rest = {}
    for m, c in as_terms(a).items():
        logs = [f for f in m if isinstance(f, Ln)]
        if len(logs) == 1 and all(_is_constant_factor(f) for f in m if f is not logs[0]):
            others = tuple(f for f in m if f is not logs[0])
            extracted.append(power(logs[0].arg, build_monomial(c, others)))
        else:
            rest[m] = c
    r = build_sum(rest)
    parts = extracted
    if r != ZERO:
        parts = parts + [Exp(r)]
    if not parts:
        return ONE
    if len(parts) == 1:
        return parts[0]
    return mul(*parts)


def is_positive_atom(b: Expr) -> bool:
    """Atoms positive by the working-domain convention (x, t, z > 0; h, p > 0)."""
    if isinstance(b, IndepVar) or isinstance(b, Exp):
        return True
    if isinstance(b, Rational):
        return b.value > 0
    if isinstance(b, UnknownDeriv):
        return b.func in POSITIVE_FUNCTIONS and b.order == 0
    return False


def ln(a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Rational):
        if a.value == 1:
            return ZERO
        if a.value == 0:
            raise MalformedExpression("ln(0)")
        return Ln(a)
    if isinstance(a, Exp):
        return a.arg
    if isinstance(a, Sum):
        c, prim = primitive_sum(a)
        if c > 0 and c != 1:
            return add(Ln(Rational(c)), Ln(prim))
        return Ln(a)
    coeff, factors = split_term(a)
    parts = []
    leftover = []
    for f in factors:
        b, e = base_exp(f)
        if is_positive_atom(b):
            parts.append(mul(e, b.arg if isinstance(b, Exp) else Ln(b)))
        else:
            leftover.append(f)
    if coeff > 0:
        if coeff != 1:
            parts.append(Ln(Rational(coeff)))
        coeff = Fraction(1)
    if leftover or coeff != 1:
        parts.append(Ln(build_monomial(coeff, leftover)))
    return add(*parts)


# ---------------------------------------------------------------- normalize

def normalize(raw: Expr) -> Expr:
    """Rebuild ``raw`` through the canonical constructors (idempotent)."""
    return _normalize(raw)


@lru_cache(maxsize=100_000)
def _normalize(e: Expr) -> Expr:
    if isinstance(e, Rational):
        return e
    if isinstance(e, NamedConst):
        if not is_const_name(e.name):
            raise MalformedExpression(f"unknown constant {e.name!r}")
        return e
    if isinstance(e, IndepVar):
        if e.name not in INDEP_VARS:
            raise MalformedExpression(f"unknown variable {e.name!r}")
        return e
    if isinstance(e, JetVar):
        if e.name not in JET_ORDERS:
            raise MalformedExpression(f"unknown jet variable {e.name!r}")
        return e
    if isinstance(e, UnknownDeriv):
        return unknown(e.func, *e.derivs, signature=e.signature)
    if isinstance(e, Sum):
        return add(*[_normalize(a) for a in e.args])
    if isinstance(e, Product):
        return mul(*[_normalize(a) for a in e.args])
    if isinstance(e, Power):
        b = _normalize(e.base)
        x = _normalize(e.exponent)
        if b == ZERO and not (isinstance(x, Rational) and x.value > 0):
            raise MalformedExpression("power of literal 0 in a denominator position")
        return power(b, x)
    if isinstance(e, Exp):
        return exp(_normalize(e.arg))
    if isinstance(e, Ln):
        return ln(_normalize(e.arg))
    raise MalformedExpression(f"unsupported node {type(e).__name__}")

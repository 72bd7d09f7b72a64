"""Purpose-built symbolic engine over the Fisher-symmetry vocabulary."""

from .nodes import (
    Expr, Rational, NamedConst, IndepVar, JetVar, UnknownDeriv, Exp, Ln, Power, Product, Sum,
    ZERO, ONE, MINUS_ONE, add, mul, neg, power, exp, ln, normalize, symbol, unknown, as_expr,
)
from .grammar import parse, to_string
from .calculus import (
    partial_diff, total_diff_x, total_diff_t, subs, substitute, substitute_function, restrict_signature,
    terms_of, collect, jet_monomials, coefficient, polynomial_coefficients, together_numerator,
    is_zero, probe_vanishes, probe_seed,
)
from .evaluate import eval_numeric, lambdify, magnitude

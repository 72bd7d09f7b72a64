"""Symmetry condition and determining system for u_t = f(u) + (1/x)(x g(u) u_x)_x."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidCoefficient, NonzeroRemainder
from .expr import (
    Expr, IndepVar, JetVar, ONE, ZERO, add, as_expr, collect, is_zero, mul, parse, partial_diff, subs,
    terms_of, to_string, total_diff_x, unknown,
)
from .prolongation import U_T, U_X, U_XT, U_XX, VectorField, apply_prolonged, prolong2

X = IndepVar("x")

# coefficient monomials in the order they are equated to zero
MONOMIAL_LABELS = ("u_xt", "u_x*u_xt", "u_x*u_xx", "u_xx", "u_x^2", "u_x", "1")
MONOMIALS = tuple(parse(m) for m in MONOMIAL_LABELS)


@dataclass(frozen=True)
class PDESpec:
    f: Expr
    g: Expr
    residual: Expr

    @property
    def rhs(self) -> Expr:
        """u_t solved from the equation: f + g_u u_x^2 + g u_xx + g u_x / x."""
        return add(U_T, mul(-1, self.residual))


def make_pde(f, g) -> PDESpec:
    f, g = as_expr(f), as_expr(g)
    for name, e in (("f", f), ("g", g)):
        for s in e.free_symbols():
            if isinstance(s, IndepVar) or (isinstance(s, JetVar) and s.order >= 1):
                raise InvalidCoefficient(f"{name} must depend on u alone, found {s}")
            if getattr(s, "signature", ("u",)) != ("u",):
                raise InvalidCoefficient(f"{name} contains {s}, which is not a function of u alone")
    if is_zero(g) or is_zero(partial_diff(g, "u")):
        raise InvalidCoefficient("diffusion g must satisfy g != 0 and g_u != 0")
    flux = total_diff_x(mul(X, g, U_X))
    residual = add(U_T, mul(-1, f), mul(-1, X ** -1, flux))
    return PDESpec(f, g, residual)


def symbolic_pde() -> PDESpec:
    """PDE with f(u), g(u) left as unknown functions."""
    return make_pde(unknown("f"), unknown("g"))


def symmetry_condition(vf: VectorField, pde: PDESpec) -> Expr:
    """X^(2) applied to the residual, restricted to solutions via u_t = rhs."""
    raw = apply_prolonged(prolong2(vf), pde.residual)
    return subs(raw, {U_T: pde.rhs})


def is_symmetry(vf: VectorField, pde: PDESpec) -> bool:
    """Exact check; ``ProbableZero`` propagates to the caller."""
    return is_zero(symmetry_condition(vf, pde))


@dataclass(frozen=True)
class DeterminingSystem:
    equations: tuple  # ((label, Expr), ...)

    def __iter__(self):
        return iter(self.equations)

    def __getitem__(self, label) -> Expr:
        for lab, eq in self.equations:
            if lab == label:
                return eq
        raise KeyError(label)

    def to_json(self) -> list:
        return [{"monomial": lab, "equation": to_string(eq)} for lab, eq in self.equations]


def general_field(tau_sig=("x", "t", "u"), xi_sig=("x", "t", "u")) -> VectorField:
    return VectorField(unknown("xi", signature=xi_sig), unknown("tau", signature=tau_sig), unknown("eta"))


def determining_system(pde: PDESpec | None = None) -> DeterminingSystem:
    """Coefficients of the jet monomials in the symmetry condition.

    The u_xt and u_x*u_xt coefficients are read off with fully general
    xi, tau, eta; they force tau = tau(t), and with that the u_x*u_xx
    coefficient forces xi = xi(x, t). The remaining coefficients are then
    collected with tau(t), xi(x, t), where the listed monomials exhaust the
    jet dependence.
    """
    pde = pde or symbolic_pde()
    general, _ = collect(symmetry_condition(general_field(), pde), MONOMIALS)
    tau_t_only, _ = collect(symmetry_condition(general_field(tau_sig=("t",)), pde), MONOMIALS)
    reduced, rem = collect(symmetry_condition(general_field(("t",), ("x", "t")), pde), MONOMIALS)
    if not is_zero(rem):
        raise NonzeroRemainder(f"symmetry condition has terms outside the monomial list: {rem}")
    eqs = []
    for label, m in zip(MONOMIAL_LABELS, MONOMIALS):
        if label in ("u_xt", "u_x*u_xt"):
            eq = general[m]
        elif label == "u_x*u_xx":
            eq = tau_t_only[m]
        else:
            eq = reduced[m]
        eqs.append((label, eq))
    return DeterminingSystem(tuple(eqs))


def matches_up_to_x_monomial(eq: Expr, golden: Expr):
    """Factor ``r = c * x**k`` with ``eq == r * golden``, or None."""
    eq, golden = as_expr(eq), as_expr(golden)
    if golden == ZERO:
        return ONE if is_zero(eq) else None
    for tg in terms_of(golden):
        for te in terms_of(eq):
            r = mul(te, tg ** -1)
            if not r.free_symbols() <= {X}:
                continue
            if is_zero(add(eq, mul(-1, r, golden))):
                return r
    return None

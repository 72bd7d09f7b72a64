"""Second prolongation of a point-symmetry generator in (x, t, u)."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UncoveredJetVariable
from .expr import Expr, JetVar, NamedConst, ZERO, add, as_expr, is_zero, mul, partial_diff, to_string, total_diff_t, total_diff_x

U, U_X, U_T, U_XX, U_XT, U_TT = (JetVar(n) for n in ("u", "u_x", "u_t", "u_xx", "u_xt", "u_tt"))


@dataclass(frozen=True)
class VectorField:
    """X = xi d/dx + tau d/dt + eta d/du."""

    xi: Expr
    tau: Expr
    eta: Expr

    def __post_init__(self):
        for name in ("xi", "tau", "eta"):
            e = as_expr(getattr(self, name))
            object.__setattr__(self, name, e)
            for s in e.free_symbols():
                if isinstance(s, JetVar) and s.order >= 1:
                    raise ValueError(f"{name} may not depend on {s.name}")

    @classmethod
    def of(cls, xi, tau, eta) -> "VectorField":
        return cls(as_expr(xi), as_expr(tau), as_expr(eta))

    def components(self):
        return (self.xi, self.tau, self.eta)

    def __add__(self, other):
        return VectorField(*(add(a, b) for a, b in zip(self.components(), other.components())))

    def scaled(self, c) -> "VectorField":
        return VectorField(*(mul(c, a) for a in self.components()))

    def apply(self, e: Expr) -> Expr:
        """Action on a function of (x, t, u)."""
        return add(mul(self.xi, partial_diff(e, "x")), mul(self.tau, partial_diff(e, "t")),
                   mul(self.eta, partial_diff(e, "u")))

    def to_dict(self) -> dict:
        return {"xi": to_string(self.xi), "tau": to_string(self.tau), "eta": to_string(self.eta)}

    def __str__(self):
        return f"({self.xi}) d/dx + ({self.tau}) d/dt + ({self.eta}) d/du"


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    return VectorField(*(add(v.apply(b), mul(-1, w.apply(a))) for a, b in zip(v.components(), w.components())))


def proportional(v: VectorField, w: VectorField):
    """Constant c with v == c*w componentwise, or None."""
    ratio = None
    for a, b in zip(v.components(), w.components()):
        if b == ZERO:
            if not is_zero(a):
                return None
            continue
        r = mul(a, b ** -1)
        if ratio is None:
            ratio = r
        elif not is_zero(add(r, mul(-1, ratio))):
            return None
    if ratio is None:
        return ZERO
    if any(not isinstance(s, NamedConst) for s in ratio.free_symbols()):
        return None
    return ratio


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    mu_x: Expr
    mu_t: Expr
    mu_xx: Expr


def prolong2(vf: VectorField) -> ProlongedField:
    xi, tau, eta = vf.components()
    dx_xi, dx_tau = total_diff_x(xi), total_diff_x(tau)
    mu_x = add(total_diff_x(eta), mul(-1, U_X, dx_xi), mul(-1, U_T, dx_tau))
    mu_t = add(total_diff_t(eta), mul(-1, U_X, total_diff_t(xi)), mul(-1, U_T, total_diff_t(tau)))
    mu_xx = add(total_diff_x(mu_x), mul(-1, U_XX, dx_xi), mul(-1, U_XT, dx_tau))
    return ProlongedField(vf, mu_x, mu_t, mu_xx)


def apply_prolonged(pf: ProlongedField, target: Expr) -> Expr:
    """X^(2) applied to an expression in (x, t, u, u_x, u_t, u_xx)."""
    syms = target.free_symbols()
    for j in (U_XT, U_TT):
        if j in syms:
            raise UncoveredJetVariable(f"no prolongation coefficient is built for {j.name}")
    vf = pf.base
    return add(
        mul(vf.xi, partial_diff(target, "x")),
        mul(vf.tau, partial_diff(target, "t")),
        mul(vf.eta, partial_diff(target, "u")),
        mul(pf.mu_x, partial_diff(target, "u_x")),
        mul(pf.mu_t, partial_diff(target, "u_t")),
        mul(pf.mu_xx, partial_diff(target, "u_xx")),
    )

"""Liouville-Green transformation of second-order expressions.

For ``τu = w⁻¹(-(p u')' + q u)`` put ``t = ∫ √(w/p) dx``, ``m = (p w)^(1/4)``
and ``ũ(t) = m u``.  Then ``τu = zu`` becomes ``-ũ'' + Q ũ = z ũ`` with

    Q = q/w - (m/w) (p (1/m)')'.

The module applies this to the Chaudhuri-Everitt expression, whose half-line
maps onto a finite interval, and checks the result against the Bessel-type
expression on ``(0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy import integrate

from .expressions import X, QuasiDifferentialExpression, _qde, build_classical

__all__ = [
    "LiouvilleTransform",
    "LiouvilleGreenResult",
    "ChainReport",
    "TransportReport",
    "liouville_transform",
    "chaudhuri_everitt_chain",
    "liouville_green",
    "transport_solution",
]


@dataclass(frozen=True)
class LiouvilleTransform:
    t_of_x: sp.Expr
    amplitude: sp.Expr
    potential: sp.Expr
    base: float
    identity_residual: sp.Expr

    def t(self, x) -> np.ndarray:
        return sp.lambdify(X, self.t_of_x, "numpy")(np.asarray(x, dtype=float))


def liouville_transform(expr: QuasiDifferentialExpression,
                        base: float | None = None) -> LiouvilleTransform:
    """Symbolic transform with ``t(base) = 0`` (``base`` defaults to the left endpoint).

    ``identity_residual`` is the leftover when ``u = f(t)/m`` is substituted
    into ``m·(τ - z)u`` and compared with ``-f'' + (Q - z) f``; it must simplify
    to zero.
    """
    if expr.order != 2 or not expr.symbolic:
        raise ValueError("needs a symbolic second-order expression")
    if base is None:
        base = expr.interval[0]
    # a positive variable keeps sqrt and fractional powers free of Abs terms;
    # valid on the catalog half-lines and shifted intervals alike after simplify
    xp = sp.Symbol("x", positive=True)
    p, q = (sp.sympify(c.symbolic_form).subs(X, xp) for c in expr.coefficients)
    w = sp.sympify(expr.weight.symbolic_form).subs(X, xp)
    xi = sp.Symbol("xi", positive=True)
    integrand = sp.sqrt(w / p)
    t_expr = sp.simplify(sp.integrate(integrand.subs(xp, xi), (xi, sp.nsimplify(base), xp)))
    m = (p * w) ** sp.Rational(1, 4)
    potential = sp.simplify(q / w - m / w * sp.diff(p * sp.diff(1 / m, xp), xp))

    f0, f1, f2 = sp.symbols("f0 f1 f2")
    tp = sp.diff(t_expr, xp)

    def d(e):
        return sp.diff(e, xp) + sp.diff(e, f0) * f1 * tp + sp.diff(e, f1) * f2 * tp

    u = f0 / m
    lhs = (-d(p * d(u)) + q * u) / w * m
    residual = sp.simplify(sp.expand(lhs - (-f2 + potential * f0)))
    back = {xp: X}
    return LiouvilleTransform(t_expr.subs(back), m.subs(back), potential.subs(back),
                              float(base), residual.subs(back))


@dataclass(frozen=True)
class ChainReport:
    """The Chaudhuri-Everitt expression as a Bessel-type expression on ``(0, 1)``."""

    length: float
    t_at_zero: float
    t_at_infinity: float
    spectral_scale: sp.Expr
    alpha: sp.Expr
    scaled_potential: sp.Expr
    identity_residual: sp.Expr
    amplitude: sp.Expr = sp.Integer(1)

    @property
    def exact(self) -> bool:
        return self.identity_residual == 0

    def to_json(self) -> dict:
        return {"t(0)": self.t_at_zero, "t(inf)": self.t_at_infinity,
                "length": self.length, "spectral_scale": str(self.spectral_scale),
                "alpha": str(self.alpha), "alpha_float": float(self.alpha),
                "scaled_potential": str(self.scaled_potential),
                "identity_residual": str(self.identity_residual)}


def chaudhuri_everitt_chain() -> ChainReport:
    """Transport the CE expression to ``s = t/t(∞) ∈ (0, 1)``.

    The endpoint map values come from adaptive quadrature of ``√(w/p)``,
    independently of the symbolic antiderivative.
    """
    ce = build_classical("chaudhuri_everitt")
    lt = liouville_transform(ce, 0.0)
    p, _ = (c.symbolic_form for c in ce.coefficients)
    dens = sp.lambdify(X, sp.sqrt(ce.weight.symbolic_form / p), "math")
    t0 = integrate.quad(dens, 0, 0)[0]
    t_inf = sum(integrate.quad(dens, lo, hi, epsabs=0, epsrel=1e-13)[0]
                for lo, hi in ((0, 1), (1, np.inf)))
    xp = sp.Symbol("x", positive=True)
    t_pos = lt.t_of_x.subs(X, xp)
    length = sp.limit(t_pos, xp, sp.oo)
    s = sp.Symbol("s", positive=True)
    x_of_s = sp.solve(sp.Eq(t_pos / length, s), xp)[0]
    scaled = sp.simplify(length ** 2 * lt.potential.subs(X, xp).subs(xp, x_of_s))
    c = sp.simplify(scaled * (1 - s) ** 2)
    if c.free_symbols:
        raise ArithmeticError(f"transported potential is not inverse-square: {scaled}")
    alpha = sp.sqrt(c + sp.Rational(1, 4))
    return ChainReport(float(length), t0, t_inf, sp.simplify(length ** 2), alpha,
                       scaled, lt.identity_residual, lt.amplitude)


@dataclass(frozen=True)
class LiouvilleGreenResult:
    """Normal form in the variable ``t`` (stored under the symbol ``x``)."""

    expression: QuasiDifferentialExpression
    t_of_x: sp.Expr
    amplitude: sp.Expr
    scaling: ChainReport


def liouville_green(source: QuasiDifferentialExpression | None = None) -> LiouvilleGreenResult:
    """Normal form ``-d²/dt² + Q(t)`` of the CE expression on ``[0, t(∞))``."""
    if source is None:
        source = build_classical("chaudhuri_everitt")
    if source.name != "chaudhuri_everitt":
        raise ValueError("liouville_green transforms the chaudhuri_everitt expression")
    lt = liouville_transform(source, 0.0)
    chain = chaudhuri_everitt_chain()
    xp = sp.Symbol("x", positive=True)
    tp = sp.Symbol("t", positive=True)
    x_of_t = sp.solve(sp.Eq(lt.t_of_x.subs(X, xp), tp), xp)[0]
    q_t = sp.factor(sp.simplify(lt.potential.subs(X, xp).subs(xp, x_of_t)))
    length = sp.sqrt(chain.spectral_scale)
    normal = _qde("chaudhuri_everitt_normal_form", [1, q_t.subs(tp, X)], 1,
                  (0.0, float(length)), ("regular", "singular"), {"length": length})
    return LiouvilleGreenResult(normal, lt.t_of_x, lt.amplitude, chain)


@dataclass(frozen=True)
class TransportReport:
    z: complex
    s: np.ndarray
    values: np.ndarray
    max_residual: float
    max_abs_residual: float
    reintegration_error: float


def transport_solution(z: complex = 1j, points: int = 200, x_max: float = 1e4,
                       initial=(1.0, 0.0)) -> TransportReport:
    """Solve the CE equation, transport the solution, test the Bessel equation.

    A solution of ``τ_CE u = z u`` with ``u(0), (p u')(0) = initial`` is
    integrated on ``[0, x_max]`` and mapped to ``ũ(s) = m(x) u(x)`` with
    ``s = x/(x+1)``.  ``max_residual`` is the largest relative residual of
    ``-ũ'' + (α²-1/4)(1-s)⁻² ũ - 6 z ũ`` with ``ũ''`` from the chain rule and
    ``u''`` from the CE equation.  ``reintegration_error`` compares the
    transported values with an independent integration of the Bessel-type
    equation in ``s``.
    """
    z = complex(z)
    chain = chaudhuri_everitt_chain()
    c = float(chain.alpha ** 2 - sp.Rational(1, 4))
    k = float(chain.spectral_scale)
    ce = build_classical("chaudhuri_everitt")
    p_sym, q_sym = (cf.symbolic_form for cf in ce.coefficients)
    m_sym = chain.amplitude
    f = {name: sp.lambdify(X, e, "numpy") for name, e in {
        "p": p_sym, "dp": sp.diff(p_sym, X), "q": q_sym, "m": m_sym,
        "dm": sp.diff(m_sym, X), "ddm": sp.diff(m_sym, X, 2)}.items()}

    def rhs(x, y):
        u, v = y  # v = p u'
        return [v / f["p"](x), (f["q"](x) - z) * u]

    xs = np.expm1(np.linspace(0, math.log1p(x_max), points))
    xs[-1] = x_max
    sol = integrate.solve_ivp(rhs, (0.0, x_max), np.array(initial, dtype=complex),
                              method="DOP853", t_eval=xs, rtol=1e-12, atol=1e-14)
    if sol.status != 0:
        raise RuntimeError(f"CE integration failed: {sol.message}")
    u, v = sol.y
    p, dp, q = f["p"](xs), f["dp"](xs), f["q"](xs)
    du = v / p
    ddu = ((q - z) * u - dp * du) / p
    m, dm, ddm = f["m"](xs), f["dm"](xs), f["ddm"](xs)
    s = xs / (xs + 1)
    dxds = 1 / (1 - s) ** 2
    d2xds2 = 2 / (1 - s) ** 3
    ut = m * u
    ut_s = (dm * u + m * du) * dxds
    ut_ss = (ddm * u + 2 * dm * du + m * ddu) * dxds ** 2 + (dm * u + m * du) * d2xds2
    terms = [-ut_ss, c / (1 - s) ** 2 * ut, -k * z * ut]
    res = terms[0] + terms[1] + terms[2]
    scale = sum(np.abs(t) for t in terms)
    rel = np.divide(np.abs(res), scale, out=np.zeros_like(scale), where=scale > 0)

    def bessel(s_, y):
        return [y[1], (c / (1 - s_) ** 2 - k * z) * y[0]]

    check = integrate.solve_ivp(bessel, (s[0], s[-1]), [ut[0], ut_s[0]], method="DOP853",
                                t_eval=s, rtol=1e-12, atol=1e-14)
    reint = float(np.max(np.abs(check.y[0] - ut) / np.maximum(np.abs(ut), 1e-300)))
    return TransportReport(z, s, ut, float(np.max(rel)), float(np.max(np.abs(res))), reint)

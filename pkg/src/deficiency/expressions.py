"""Quasi-differential expressions of order 2n.

An expression with coefficients ``p_0, ..., p_n`` and weight ``w`` acts as

    τu = w⁻¹ Σ_k (-1)^(n-k) (p_k u^(n-k))^(n-k)

and is also generated by the quasi-derivative ladder

    u^[k] = u^(k) (k < n),   u^[n] = p_0 u^(n),
    u^[n+k] = p_k u^[n-k] - (u^[n+k-1])',   τu = w⁻¹ u^[2n].

Coefficients built by the classical constructors carry a sympy closed form,
which supplies exact derivatives.  Generic numeric coefficients fall back to
central differences.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .stirling import jacobi_stirling, legendre_stirling, stirling2

__all__ = [
    "X",
    "CoefficientFunction",
    "FunctionWithDerivatives",
    "QuasiDifferentialExpression",
    "PowerTerm",
    "PowerExpansion",
    "KernelExponent",
    "build_classical",
    "CLASSICAL_NAMES",
    "quasi_derivatives",
    "apply",
    "apply_ladder",
    "apply_symbolic",
    "apply_power_expansion",
    "compose_square",
    "power_expansion",
    "bessel_kernel_exponents",
    "kernel_function",
    "ParameterError",
]

X = sp.Symbol("x", real=True)

_UNBOUNDED = 10 ** 6


class ParameterError(ValueError):
    pass


def _sym(v):
    """Exact sympy number for ints, Fractions and sympy input; floats kept."""
    if isinstance(v, sp.Basic):
        return v
    if isinstance(v, bool):
        raise TypeError("boolean is not a parameter")
    if isinstance(v, int):
        return sp.Integer(v)
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    if isinstance(v, str):
        return sp.sympify(v)
    return sp.Float(v)


def _numeric(v) -> float | None:
    try:
        return float(v)
    except TypeError:
        return None


class CoefficientFunction:
    """A real coefficient on the interval, symbolic or numeric."""

    def __init__(self, expr=None, func: Callable | None = None, scale: float = 1.0,
                 order_available: int = 4):
        if (expr is None) == (func is None):
            raise ValueError("give exactly one of expr or func")
        self.symbolic_form = None if expr is None else sp.sympify(expr)
        self._func = func
        self.scale = scale
        self._order_available = order_available
        self._derivs: dict = {}

    @property
    def derivative_order_available(self) -> int:
        return _UNBOUNDED if self.symbolic_form is not None else self._order_available

    @functools.cached_property
    def _compiled(self):
        return sp.lambdify(X, self.symbolic_form, "numpy")

    def __call__(self, xs):
        xs = np.asarray(xs, dtype=float)
        if self.symbolic_form is None:
            return np.asarray(self._func(xs), dtype=float) * np.ones_like(xs)
        return np.asarray(self._compiled(xs)) * np.ones_like(xs)

    def derivative(self, k: int) -> "CoefficientFunction":
        if k == 0:
            return self
        if k not in self._derivs:
            if self.symbolic_form is not None:
                self._derivs[k] = CoefficientFunction(sp.diff(self.symbolic_form, X, k))
            else:
                if k > self._order_available:
                    raise ValueError(f"numeric coefficient supplies only "
                                     f"{self._order_available} derivatives")
                self._derivs[k] = CoefficientFunction(func=_central_difference(
                    self._func, k, self.scale))
        return self._derivs[k]

    def is_constant(self, value) -> bool:
        return self.symbolic_form is not None and sp.simplify(self.symbolic_form - value) == 0

    def __repr__(self) -> str:
        if self.symbolic_form is not None:
            return f"CoefficientFunction({self.symbolic_form})"
        return "CoefficientFunction(<numeric>)"


def _central_difference(f: Callable, k: int, scale: float) -> Callable:
    h = np.finfo(float).eps ** (1.0 / (k + 2)) * scale

    def dk(xs):
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        for i in range(k + 1):
            out += (-1) ** i * comb(k, i) * np.asarray(f(xs + (k / 2 - i) * h))
        return out / h ** k

    return dk


@functools.lru_cache(maxsize=512)
def _nth_derivative(expr, k: int):
    return expr if k == 0 else sp.diff(_nth_derivative(expr, k - 1), X)


class FunctionWithDerivatives:
    """A test function ``u`` that supplies ``u^(k)(x)`` on demand."""

    def __init__(self, derivs: Callable[[int, np.ndarray], np.ndarray], max_order: int,
                 name: str = "u", symbolic_form=None):
        self._derivs = derivs
        self.max_order = max_order
        self.name = name
        self.symbolic_form = symbolic_form

    @classmethod
    def from_sympy(cls, expr, max_order: int = 12, name: str | None = None):
        expr = sp.sympify(expr)
        compiled = {}

        def derivs(k, xs):
            if k not in compiled:
                compiled[k] = sp.lambdify(X, _nth_derivative(expr, k), "numpy")
            xs = np.asarray(xs, dtype=float)
            return np.asarray(compiled[k](xs)) * np.ones_like(xs)

        return cls(derivs, max_order, name or str(expr), expr)

    @classmethod
    def from_callables(cls, funcs: Sequence[Callable], name: str = "u"):
        funcs = list(funcs)

        def derivs(k, xs):
            return np.asarray(funcs[k](np.asarray(xs, dtype=float)))

        return cls(derivs, len(funcs) - 1, name)

    def __call__(self, xs, k: int = 0):
        if k > self.max_order:
            raise ValueError(f"{self.name} supplies derivatives only up to order "
                             f"{self.max_order}, order {k} requested")
        return self._derivs(k, xs)

    def check_consistency(self, xs, h: float = 1e-4) -> float:
        """Largest mismatch between ``u'`` and a central difference of ``u``."""
        xs = np.asarray(xs, dtype=float)
        fd = (self(xs + h) - self(xs - h)) / (2 * h)
        d1 = self(xs, 1)
        return float(np.max(np.abs(fd - d1) / np.maximum(1.0, np.abs(d1))))


@dataclass(frozen=True)
class QuasiDifferentialExpression:
    name: str
    coefficients: tuple
    weight: CoefficientFunction
    interval: tuple
    endpoint_kinds: tuple
    params: dict = field(default_factory=dict, compare=False)
    anchor: float | None = None

    def __post_init__(self):
        if len(self.coefficients) < 2:
            raise ValueError("need at least p_0 and p_1")
        a, b = self.interval
        if not a < b:
            raise ValueError("interval must satisfy a < b")
        for k in self.endpoint_kinds:
            if k not in ("regular", "singular", "unknown"):
                raise ValueError(f"unknown endpoint kind {k!r}")
        if self.anchor is None:
            object.__setattr__(self, "anchor", _default_anchor(a, b))

    @property
    def n(self) -> int:
        return len(self.coefficients) - 1

    @property
    def order(self) -> int:
        return 2 * self.n

    @property
    def weighted(self) -> bool:
        return not self.weight.is_constant(1)

    @property
    def symbolic(self) -> bool:
        return all(c.symbolic_form is not None for c in self.coefficients) and \
            self.weight.symbolic_form is not None

    def describe(self) -> str:
        parts = [f"p{k} = {c.symbolic_form}" for k, c in enumerate(self.coefficients)]
        parts.append(f"w = {self.weight.symbolic_form}")
        return f"{self.name} on {self.interval}: " + ", ".join(parts)


def _default_anchor(a: float, b: float) -> float:
    if np.isfinite(a) and np.isfinite(b):
        return 0.5 * (a + b)
    if np.isfinite(a):
        return a + 1.0
    if np.isfinite(b):
        return b - 1.0
    return 0.0


def _qde(name, coeffs, weight, interval, kinds, params, anchor=None):
    return QuasiDifferentialExpression(
        name, tuple(CoefficientFunction(sp.sympify(c)) for c in coeffs),
        CoefficientFunction(sp.sympify(weight)), interval, kinds, params, anchor)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParameterError(message)


def _bessel_alpha(alpha):
    a = _sym(alpha)
    v = _numeric(a)
    _require(v is None or v >= 1, f"bessel_alpha needs alpha >= 1, got {alpha}")
    return _qde("bessel_alpha", [1, (a ** 2 - sp.Rational(1, 4)) / (1 - X) ** 2], 1,
                (0.0, 1.0), ("regular", "singular"), {"alpha": a})


def _bessel4_alpha(alpha):
    a = _sym(alpha)
    v = _numeric(a)
    _require(v is None or v >= 1, f"bessel4_alpha needs alpha >= 1, got {alpha}")
    p1 = (2 * a ** 2 - sp.Rational(1, 2)) / (1 - X) ** 2
    p2 = (a ** 4 - sp.Rational(13, 2) * a ** 2 + sp.Rational(5, 4) ** 2) / (1 - X) ** 4
    return _qde("bessel4_alpha", [1, p1, p2], 1, (0.0, 1.0), ("regular", "singular"),
                {"alpha": a})


def _bessel_gamma(gamma):
    g = _sym(gamma)
    v = _numeric(g)
    _require(v is None or v >= 0, f"bessel_gamma needs gamma >= 0, got {gamma}")
    return _qde("bessel_gamma", [1, (g ** 2 - sp.Rational(1, 4)) / X ** 2], 1,
                (0.0, np.inf), ("singular", "singular"), {"gamma": g})


def _bessel_channel(n, ell, L, alpha=0):
    from .channels import ChannelSpec, channel_coefficient

    spec = ChannelSpec(n, ell, L, alpha)
    c = channel_coefficient(spec.n, spec.ell, spec.L)
    return _qde("bessel_channel", [1, sp.Integer(c) / X ** 2], 1, (0.0, np.inf),
                ("singular", "singular"),
                {"n": n, "ell": ell, "L": L, "alpha": _sym(alpha)})


def _legendre():
    return _qde("legendre", [1 - X ** 2, 0], 1, (-1.0, 1.0), ("singular", "singular"), {})


def _laguerre(alpha):
    a = _sym(alpha)
    v = _numeric(a)
    _require(v is None or v > -1, f"laguerre needs alpha > -1, got {alpha}")
    kind0 = "regular" if v is not None and v < 0 else "singular"
    return _qde("laguerre", [X ** (a + 1) * sp.exp(-X), 0], X ** a * sp.exp(-X),
                (0.0, np.inf), (kind0, "singular"), {"alpha": a})


def _hermite():
    w = sp.exp(-X ** 2)
    return _qde("hermite", [w, 0], w, (-np.inf, np.inf), ("singular", "singular"), {})


def _jacobi(alpha, beta):
    a, b = _sym(alpha), _sym(beta)
    va, vb = _numeric(a), _numeric(b)
    _require(va is None or va > -1, f"jacobi needs alpha > -1, got {alpha}")
    _require(vb is None or vb > -1, f"jacobi needs beta > -1, got {beta}")

    def kind(v):
        return "regular" if v is not None and v < 0 else "singular"

    return _qde("jacobi", [(1 - X) ** (a + 1) * (1 + X) ** (b + 1), 0],
                (1 - X) ** a * (1 + X) ** b, (-1.0, 1.0), (kind(vb), kind(va)),
                {"alpha": a, "beta": b})


def _chaudhuri_everitt():
    return _qde("chaudhuri_everitt", [(X + 1) ** 4 / 6, (X + 1) ** 2], 1, (0.0, np.inf),
                ("regular", "singular"), {})


def _free(a=0.0, b=np.inf):
    kinds = tuple("regular" if np.isfinite(e) else "singular" for e in (a, b))
    return _qde("free", [1, 0], 1, (float(a), float(b)), kinds, {})


_BUILDERS = {
    "bessel_alpha": _bessel_alpha,
    "bessel4_alpha": _bessel4_alpha,
    "bessel_gamma": _bessel_gamma,
    "bessel_channel": _bessel_channel,
    "legendre": _legendre,
    "laguerre": _laguerre,
    "hermite": _hermite,
    "jacobi": _jacobi,
    "chaudhuri_everitt": _chaudhuri_everitt,
    "free": _free,
}
CLASSICAL_NAMES = tuple(_BUILDERS)


def build_classical(name: str, **params) -> QuasiDifferentialExpression:
    """Build one of the catalog expressions.

    Parameters by name: ``bessel_alpha(alpha)``, ``bessel4_alpha(alpha)``,
    ``bessel_gamma(gamma)``, ``bessel_channel(n, ell, L, alpha)``,
    ``legendre``, ``laguerre(alpha)``, ``hermite``, ``jacobi(alpha, beta)``,
    ``chaudhuri_everitt`` and ``free(a, b)`` (``-d²/dx²``).
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ParameterError(f"unknown expression {name!r}; known: {', '.join(_BUILDERS)}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name}: {exc}") from None


# ---------------------------------------------------------------- ladder


def _d(poly: dict) -> dict:
    """Differentiate a linear combination of coefficient products times u^(i)."""
    out: dict = {}
    for (factors, i), c in poly.items():
        for pos, (k, order) in enumerate(factors):
            new = list(factors)
            new[pos] = (k, order + 1)
            key = (tuple(sorted(new)), i)
            out[key] = out.get(key, 0) + c
        key = (factors, i + 1)
        out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if v != 0}


def _times_p(poly: dict, k: int) -> dict:
    return {(tuple(sorted(f + ((k, 0),))), i): c for (f, i), c in poly.items()}


def _sub(a: dict, b: dict) -> dict:
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, 0) - c
    return {k: v for k, v in out.items() if v != 0}


@functools.lru_cache(maxsize=None)
def _ladder(n: int) -> tuple:
    u = [{((), k): 1} for k in range(n)]
    u.append({(((0, 0),), n): 1})
    for k in range(1, n + 1):
        u.append(_sub(_times_p(u[n - k], k), _d(u[n + k - 1])))
    return tuple(u)


def _check_u(expr: QuasiDifferentialExpression, u: FunctionWithDerivatives) -> None:
    if u.max_order < expr.order:
        raise ValueError(f"missing derivative data: {u.name} supplies order "
                         f"{u.max_order}, expression needs {expr.order}")


def quasi_derivatives(expr: QuasiDifferentialExpression, u: FunctionWithDerivatives,
                      x) -> np.ndarray:
    """``u^[0](x), ..., u^[2n](x)`` stacked along the first axis."""
    _check_u(expr, u)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ladder = _ladder(expr.n)
    coef_cache: dict = {}
    u_cache: dict = {}
    rows = []
    for poly in ladder:
        total = np.zeros(xs.shape, dtype=complex)
        for (factors, i), c in poly.items():
            term = np.full(xs.shape, complex(c))
            for k, order in factors:
                if (k, order) not in coef_cache:
                    coef_cache[(k, order)] = expr.coefficients[k].derivative(order)(xs)
                term = term * coef_cache[(k, order)]
            if i not in u_cache:
                u_cache[i] = u(xs, i)
            total = total + term * u_cache[i]
        rows.append(total)
    out = np.array(rows)
    if np.all(out.imag == 0):
        out = out.real
    return out if np.ndim(x) else out[:, 0]


def apply_ladder(expr, u, xs) -> np.ndarray:
    """``τu`` computed as ``w⁻¹ u^[2n]``."""
    xs = np.asarray(xs, dtype=float)
    return quasi_derivatives(expr, u, xs)[-1] / expr.weight(xs)


def apply(expr: QuasiDifferentialExpression, u: FunctionWithDerivatives, xs) -> np.ndarray:
    """``τu`` from the expanded divergence form, divided by the weight."""
    _check_u(expr, u)
    xs = np.asarray(xs, dtype=float)
    n = expr.n
    total = np.zeros(xs.shape, dtype=np.result_type(u(xs), float))
    for k, p in enumerate(expr.coefficients):
        r = n - k
        inner = sum(comb(r, i) * p.derivative(i)(xs) * u(xs, 2 * r - i) for i in range(r + 1))
        total = total + (-1) ** r * inner
    return total / expr.weight(xs)


def apply_symbolic(expr: QuasiDifferentialExpression, u):
    """Sympy form of ``τu`` for a sympy expression ``u`` in :data:`X`."""
    if not expr.symbolic:
        raise ValueError("symbolic application needs symbolic coefficients")
    n = expr.n
    total = sum((-1) ** (n - k) * sp.diff(c.symbolic_form * sp.diff(u, X, n - k), X, n - k)
                for k, c in enumerate(expr.coefficients))
    return total / expr.weight.symbolic_form


# ---------------------------------------------------------------- squaring


def compose_square(expr: QuasiDifferentialExpression) -> QuasiDifferentialExpression:
    """Lagrangian symmetric form of ``τ²`` for a second-order unweighted ``τ``.

    Writes ``τ² = D² P0 D² - D P1 D + P2`` by matching the coefficients of
    ``f'''', f''', f'', f', f`` and checks the two symmetry identities that
    the odd-order coefficients must satisfy.
    """
    if expr.order != 2:
        raise ValueError("compose_square needs a second-order expression")
    if not expr.symbolic:
        raise ValueError("compose_square needs symbolic coefficients")
    if expr.weighted:
        raise ValueError("compose_square handles unweighted expressions only")
    p, q = (c.symbolic_form for c in expr.coefficients)
    f = sp.Function("f")(X)

    def tau(g):
        return -sp.diff(p * sp.diff(g, X), X) + q * g

    square = sp.expand(tau(tau(f)))
    derivs = [sp.diff(f, X, k) for k in range(5)]
    reps = {derivs[k]: sp.Symbol(f"_f{k}") for k in range(4, 0, -1)}
    poly = square.subs(reps).subs(f, sp.Symbol("_f0"))
    c = [sp.simplify(poly.coeff(sp.Symbol(f"_f{k}"))) for k in range(5)]
    p0 = c[4]
    p1 = sp.simplify(sp.diff(p0, X, 2) - c[2])
    p2 = sp.simplify(c[0])
    if sp.simplify(c[3] - 2 * sp.diff(p0, X)) != 0 or sp.simplify(c[1] + sp.diff(p1, X)) != 0:
        raise ArithmeticError("square is not formally symmetric")
    p1 = sp.factor(sp.together(p1))
    p2 = sp.factor(sp.together(p2))
    return _qde(f"{expr.name}^2", [p0, p1, p2], 1, expr.interval, expr.endpoint_kinds,
                dict(expr.params), expr.anchor)


# ---------------------------------------------------------------- powers


@dataclass(frozen=True)
class PowerTerm:
    j: int
    coefficient: object
    weight: sp.Expr


@dataclass(frozen=True)
class PowerExpansion:
    """``τ^m = w⁻¹ Σ_j (-1)^j c_j D^j W_j D^j``."""

    family: str
    m: int
    terms: tuple
    outer_weight: sp.Expr
    exact: bool
    params: dict = field(default_factory=dict, compare=False)

    def coefficients(self) -> dict:
        return {t.j: t.coefficient for t in self.terms}


def power_expansion(family: str, m: int, **params) -> PowerExpansion:
    """Stirling-type Lagrangian symmetric form of the ``m``-th power.

    Legendre uses Legendre-Stirling numbers with ``W_j = (1-x²)^j``.  Laguerre
    uses ``S(m, j)`` with ``W_j = x^(α+j) e^(-x)``.  Hermite uses
    ``S(m, j) 2^(m-j)`` with ``W_j = e^(-x²)``.  Jacobi uses Jacobi-Stirling
    numbers with ``W_j = (1-x)^(α+j) (1+x)^(β+j)``.
    """
    if int(m) != m or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    base = build_classical(family, **params)
    terms = []
    for j in range(1, m + 1):
        if family == "legendre":
            c, w = legendre_stirling(m, j), (1 - X ** 2) ** j
        elif family == "laguerre":
            a = base.params["alpha"]
            c, w = stirling2(m, j), X ** (a + j) * sp.exp(-X)
        elif family == "hermite":
            c, w = stirling2(m, j) * 2 ** (m - j), sp.exp(-X ** 2)
        elif family == "jacobi":
            a, b = params.get("alpha", 0), params.get("beta", 0)
            sa, sb = base.params["alpha"], base.params["beta"]
            c = jacobi_stirling(m, j, _exact_or_float(a), _exact_or_float(b))
            w = (1 - X) ** (sa + j) * (1 + X) ** (sb + j)
        else:
            raise ParameterError(f"no power expansion for {family!r}")
        terms.append(PowerTerm(j, c, w))
    exact = all(isinstance(t.coefficient, Fraction) for t in terms)
    return PowerExpansion(family, m, tuple(terms), base.weight.symbolic_form, exact,
                          dict(base.params))


def _exact_or_float(v):
    if isinstance(v, (int, Fraction)):
        return v
    if isinstance(v, sp.Rational):
        return Fraction(int(v.p), int(v.q))
    if isinstance(v, str):
        v = sp.sympify(v)
        if isinstance(v, sp.Rational):
            return Fraction(int(v.p), int(v.q))
    return float(v)


def apply_power_expansion(pe: PowerExpansion, u: FunctionWithDerivatives, xs) -> np.ndarray:
    """Evaluate the expanded power on ``u`` via the Leibniz rule."""
    xs = np.asarray(xs, dtype=float)
    if u.max_order < 2 * pe.m:
        raise ValueError(f"missing derivative data: need order {2 * pe.m}")
    total = np.zeros(xs.shape)
    for t in pe.terms:
        c = float(t.coefficient)
        inner = np.zeros(xs.shape)
        for i in range(t.j + 1):
            wi = _compiled_derivative(t.weight, i)(xs) * np.ones_like(xs)
            inner += comb(t.j, i) * wi * u(xs, 2 * t.j - i)
        total += (-1) ** t.j * c * inner
    w = _compiled_derivative(pe.outer_weight, 0)(xs) * np.ones_like(xs)
    return total / w


@functools.lru_cache(maxsize=256)
def _compiled_derivative(expr, k: int):
    return sp.lambdify(X, sp.diff(expr, X, k), "numpy")


# ---------------------------------------------------------------- kernels


@dataclass(frozen=True)
class KernelExponent:
    beta: sp.Expr
    in_l2: bool

    @property
    def value(self) -> float:
        return float(self.beta)


def bessel_kernel_exponents(power: int, alpha) -> list:
    """Exponents ``b`` with ``(1-x)^b`` in the kernel of ``τ_{2,α}`` or its square.

    Power 2 gives ``1/2 ± α``; power 4 adds ``5/2 ± α``.  The flag is
    ``b > -1/2``, the exact condition for square integrability on (0, 1).
    """
    if power not in (2, 4):
        raise ParameterError("power must be 2 or 4")
    a = _sym(alpha)
    _require(float(a) >= 1, f"alpha must be >= 1, got {alpha}")
    half = sp.Rational(1, 2)
    betas = [half + a, half - a]
    if power == 4:
        betas += [5 * half + a, 5 * half - a]
    return [KernelExponent(b, bool(b + half > 0)) for b in betas]


def kernel_function(beta, log_power: int = 0, max_order: int = 12) -> FunctionWithDerivatives:
    """``(1-x)^β`` (times ``ln(1-x)^log_power``) as a test function.

    With ``s = 1 - x`` and ``L = ln s``, the ``j``-th ``x``-derivative is
    ``(-1)^j ∂_β^k [ff_j(β) s^(β-j)]`` where ``ff_j`` is the falling factorial,
    which expands by Leibniz into ``Σ_i C(k,i) ff_j^(i)(β) s^(β-j) L^(k-i)``.
    """
    beta = _sym(beta)
    k = int(log_power)
    b = float(beta)
    expr = (1 - X) ** beta * sp.log(1 - X) ** k
    ff = [np.polynomial.Polynomial([1.0])]
    for j in range(max_order):
        ff.append(ff[-1] * np.polynomial.Polynomial([-j, 1.0]))

    def derivs(j, xs):
        s = 1.0 - np.asarray(xs, dtype=float)
        log_s = np.log(s)
        total = np.zeros_like(s)
        for i in range(k + 1):
            total = total + comb(k, i) * ff[j].deriv(i)(b) * log_s ** (k - i)
        return (-1) ** j * total * s ** (b - j)

    return FunctionWithDerivatives(derivs, max_order, f"u[{beta}]", expr)

"""Numerical endpoint classification for symmetric quasi-differential expressions.

The ``2n`` solutions of ``τy = zy`` are integrated from an interior anchor
toward an endpoint as a first-order system in the quasi-derivatives.  The
Gram matrix ``G = ∫ conj(y_i) y_j w dx`` of the basis grows monotonically on
the way.  Exactly ``d`` independent solutions are square integrable near the
endpoint when the sum of the ``d`` smallest eigenvalues of ``G`` stays
bounded while the sum of ``d + 1`` does not.

Three numerical devices keep recessive solutions alive next to dominant ones:

* the basis is re-diagonalized against ``G`` after every chunk, so each
  column carries its own scale and small columns are purged of the dominant
  ones (a Riccati-like continuation);
* the eigen-decomposition is a one-sided cyclic Jacobi iteration, which is
  relatively accurate for the graded matrices that arise;
* rows and columns of the state are rescaled before each chunk.

Boundedness of a partial sum is decided from its per-chunk increments by two
independent tests: a local decay-rate fit with a confidence interval, and a
block ratio of tail sums.  When they disagree the verdict is inconclusive,
and nothing downstream guesses.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy as sp
from scipy import integrate, stats

from .counts import DefectPair
from .expressions import (X, FunctionWithDerivatives, QuasiDifferentialExpression,
                          apply, bessel_kernel_exponents, build_classical, kernel_function)

__all__ = [
    "Endpoint",
    "Controls",
    "TailFit",
    "L2Verdict",
    "SolutionSample",
    "EndpointClassification",
    "DeficiencyReport",
    "BoundaryValues",
    "KernelReport",
    "InconclusiveError",
    "IntegrationError",
    "ExtrapolationError",
    "endpoints_of",
    "integrate_toward_endpoint",
    "l2_test",
    "l2_test_function",
    "classify_endpoint",
    "deficiency_indices_minimal",
    "deficiency_report",
    "generalized_boundary_values",
    "kernel_l2_count",
    "kernel_l2_report",
]

_S = sp.Symbol("s", positive=True)


class InconclusiveError(RuntimeError):
    """The two square-integrability tests disagree or are too uncertain."""

    def __init__(self, message: str, evidence=None):
        super().__init__(message)
        self.evidence = evidence


class IntegrationError(RuntimeError):
    def __init__(self, message: str, reached: float):
        super().__init__(f"{message} (reached x = {reached:.6g})")
        self.reached = reached


class ExtrapolationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Endpoint:
    """An endpoint of the host interval.

    ``side`` is ``"left"`` or ``"right"``; it is inferred for infinite
    locations and by :func:`endpoints_of`.
    """

    location: float
    kind_hint: str = "unknown"
    side: str | None = None

    def __post_init__(self):
        loc = float(self.location)
        object.__setattr__(self, "location", loc)
        if self.kind_hint not in ("regular", "singular", "unknown"):
            raise ValueError(f"unknown kind hint {self.kind_hint!r}")
        side = self.side
        if side is None and math.isinf(loc):
            side = "left" if loc < 0 else "right"
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right' for a finite endpoint")
        if math.isinf(loc) and (loc < 0) != (side == "left"):
            raise ValueError("an infinite endpoint must sit on its own side")
        if math.isinf(loc) and self.kind_hint == "regular":
            raise ValueError("an infinite endpoint is never regular")
        object.__setattr__(self, "side", side)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.location)

    def to_json(self) -> dict:
        loc = self.location if self.finite else ("inf" if self.location > 0 else "-inf")
        return {"location": loc, "side": self.side, "kind_hint": self.kind_hint}


def endpoints_of(expr: QuasiDifferentialExpression) -> tuple[Endpoint, Endpoint]:
    a, b = expr.interval
    ka, kb = expr.endpoint_kinds
    return Endpoint(a, ka, "left"), Endpoint(b, kb, "right")


def _resolve(expr: QuasiDifferentialExpression, ep) -> Endpoint:
    left, right = endpoints_of(expr)
    if isinstance(ep, Endpoint):
        ref = left if ep.side == "left" else right
        if ep.location != ref.location:
            raise ValueError(f"endpoint {ep.location} is not the {ep.side} end of "
                             f"{expr.interval}")
        return ep
    if isinstance(ep, str) and ep in ("a", "left"):
        return left
    if isinstance(ep, str) and ep in ("b", "right"):
        return right
    for cand in (left, right):
        if float(ep) == cand.location:
            return cand
    raise ValueError(f"{ep!r} is not an endpoint of {expr.interval}")


@dataclass(frozen=True)
class Controls:
    rtol: float = 1e-11
    atol: float = 1e-14
    endpoint_gap: float = 1e-8
    chunks_per_octave: int = 2
    lambda_max: float = 1e50
    growth_low: float = 4.0
    growth_high: float = 64.0
    s_max: float = 2.0 ** 27
    max_chunks: int = 600
    window: int = 12
    delta: float = 0.005
    saturation: float = 1e-10
    confidence: float = 0.95
    max_ci_width: float = 0.2
    gauss_points: int = 20


DEFAULT_CONTROLS = Controls()


# ---------------------------------------------------------------- local coordinates


class _Local:
    """Coefficients as functions of the distance ``s`` to the endpoint.

    Finite endpoints use ``x = e ∓ s`` and the integration variable
    ``t = -ln s``; infinite ones use ``x = ±s`` and integrate in ``s``.
    Symbolic coefficients are rewritten in ``s`` before compilation, so
    ``1 - x`` near ``x = 1`` is evaluated without cancellation.
    """

    def __init__(self, expr: QuasiDifferentialExpression, ep: Endpoint):
        self.ep = ep
        self.n = expr.n
        e = ep.location
        if ep.finite:
            self.sign = -1.0 if ep.side == "right" else 1.0
            sub = e + self.sign * _S
        else:
            self.sign = 1.0 if ep.location > 0 else -1.0
            sub = self.sign * _S
        self.x_of_s = (lambda s: e + self.sign * s) if ep.finite else (lambda s: self.sign * s)
        funcs = [("ip0", None, expr.coefficients[0], True)]
        funcs += [(f"p{k}", None, c, False) for k, c in enumerate(expr.coefficients) if k > 0]
        funcs.append(("w", None, expr.weight, False))
        self.scalar = {}
        self.vector = {}
        self.symbolic = {}
        for name, _, coef, invert in funcs:
            if coef.symbolic_form is not None:
                form = sp.sympify(coef.symbolic_form).subs(X, sub)
                if invert:
                    form = sp.powsimp(1 / form, force=True)
                self.symbolic[name] = form
                self.scalar[name] = sp.lambdify(_S, form, "math")
                vec = sp.lambdify(_S, form, "numpy")
                self.vector[name] = _broadcasting(vec)
            else:
                self.scalar[name], self.vector[name] = _numeric_local(coef, self.x_of_s, invert)

    def coefficient_names(self) -> list:
        return ["ip0"] + [f"p{k}" for k in range(1, self.n + 1)] + ["w"]


def _broadcasting(f):
    def g(s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(np.asarray(f(s), dtype=float), s.shape).copy()
    return g


def _numeric_local(coef, x_of_s, invert):
    def scalar(s):
        v = float(np.asarray(coef(np.array([x_of_s(s)])))[0])
        return 1.0 / v if invert else v

    def vector(s):
        v = np.asarray(coef(x_of_s(np.asarray(s, dtype=float))), dtype=float)
        return 1.0 / v if invert else v

    return scalar, vector


def _system_structure(n: int) -> list:
    """Constant entries of the quasi-derivative system matrix.

    Entries are (row, col, tag) with tag ``1``, ``-1``, ``"ip0"``, ``"pk"`` or
    ``"pn-zw"``.
    """
    entries = [(j, j + 1, 1) for j in range(n - 1)]
    entries.append((n - 1, n, "ip0"))
    for k in range(1, n):
        entries.append((n + k - 1, n - k, f"p{k}"))
        entries.append((n + k - 1, n + k, -1))
    entries.append((2 * n - 1, 0, "pn-zw"))
    return entries


class _System:
    def __init__(self, local: _Local, z: complex):
        self.local = local
        self.z = complex(z)
        self.n = local.n
        self.finite = local.ep.finite
        # dx/dtau: x = e + sign*s with s = exp(-t) gives -sign*s; x = sign*s gives sign
        self.entries = _system_structure(self.n)

    def s_of(self, tau):
        return math.exp(-tau) if self.finite else tau

    def dxdtau(self, s):
        return -self.local.sign * s if self.finite else self.local.sign

    def matrix(self, tau: float) -> np.ndarray:
        s = self.s_of(tau)
        f = self.local.scalar
        m = 2 * self.n
        a = np.zeros((m, m), dtype=complex)
        for r, c, tag in self.entries:
            if tag == "ip0":
                a[r, c] = f["ip0"](s)
            elif tag == "pn-zw":
                a[r, c] = f[f"p{self.n}"](s) - self.z * f["w"](s)
            elif isinstance(tag, str):
                a[r, c] = f[tag](s)
            else:
                a[r, c] = tag
        return a * self.dxdtau(s)


# ---------------------------------------------------------------- Jacobi eigen-solver


def _hermitian_jacobi(a: np.ndarray, tol: float = 1e-16, sweeps: int = 40):
    """Eigen-decomposition of a small Hermitian positive semi-definite matrix.

    Cyclic Jacobi rotations; an off-diagonal entry is annihilated unless it
    is negligible relative to the geometric mean of its diagonal pair, which
    preserves the small eigenvalues of graded matrices.
    """
    a = np.array(a, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    m = a.shape[0]
    v = np.eye(m, dtype=complex)
    for _ in range(sweeps):
        rotated = False
        for p in range(m - 1):
            for q in range(p + 1, m):
                b = a[p, q]
                mag = abs(b)
                app, aqq = a[p, p].real, a[q, q].real
                if mag == 0 or mag <= tol * math.sqrt(abs(app * aqq)):
                    continue
                rotated = True
                phase = b / mag
                zeta = (aqq - app) / (2 * mag)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                # Q = diag(1, conj(phase)) @ [[c, s], [-s, c]] on rows/cols (p, q)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * col_p + c * np.conj(phase) * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                a[p, q] = a[q, p] = 0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * vp + c * np.conj(phase) * vq
        if not rotated:
            break
    return np.real(np.diag(a)).copy(), v


# ---------------------------------------------------------------- integration


@dataclass
class SolutionSample:
    """Solutions of ``τy = zy`` sampled on a grid approaching an endpoint.

    ``values[k]`` holds the quasi-derivatives (rows) of the ``2n`` solutions
    (columns) at ``grid[k]``, in the basis fixed by identity initial data at
    ``anchor``.  ``gram_eigenvalues[k]`` is the spectrum of the accumulated
    Gram matrix up to ``grid[k]``; ``distance[k]`` is the distance to the
    endpoint (finite) or ``|x|`` (infinite).
    """

    z: complex
    endpoint: Endpoint
    anchor: float
    grid: np.ndarray
    distance: np.ndarray
    values: np.ndarray
    gram_eigenvalues: np.ndarray
    weight_name: str = "w"
    stop_reason: str = ""

    @property
    def n_solutions(self) -> int:
        return self.values.shape[-1]

    def solution(self, j: int) -> np.ndarray:
        """Values ``y_j`` on the grid."""
        return self.values[:, 0, j]

    def partial_sums(self) -> np.ndarray:
        """``S_j`` (sum of the ``j`` smallest Gram eigenvalues), shape (points, 2n)."""
        return np.cumsum(np.sort(self.gram_eigenvalues, axis=1), axis=1)


def integrate_toward_endpoint(expr: QuasiDifferentialExpression, z: complex, ep,
                              controls: Controls = DEFAULT_CONTROLS,
                              allow_real: bool = False) -> SolutionSample:
    """Integrate the ``2n`` canonical solutions from the anchor toward ``ep``."""
    z = complex(z)
    if z.imag == 0 and not allow_real:
        raise ValueError("z must be nonreal (pass allow_real=True for kernel studies)")
    ep = _resolve(expr, ep)
    local = _Local(expr, ep)
    system = _System(local, z)
    n2 = 2 * expr.n
    anchor = float(expr.anchor)
    if ep.finite:
        s0 = abs(anchor - ep.location)
        tau = -math.log(s0)
        tau_end = -math.log(controls.endpoint_gap)
        octaves = (tau_end - tau) / math.log(2)
        steps = max(1, math.ceil(octaves * controls.chunks_per_octave))
        h_fixed = (tau_end - tau) / steps
    else:
        s0 = local.sign * anchor
        tau = s0
        tau_end = controls.s_max
        h_fixed = None
    h = h_fixed or 0.5
    nodes, gw = np.polynomial.legendre.leggauss(controls.gauss_points)

    phi = np.eye(n2, dtype=complex)
    lam = np.zeros(n2)
    transform = np.eye(n2, dtype=complex)
    grid, dist, vals, eigs = [], [], [], []
    reason = ""
    for _ in range(controls.max_chunks):
        if ep.finite and tau >= tau_end - 1e-12:
            reason = "endpoint gap reached"
            break
        t1 = min(tau + h, tau_end)
        col = np.linalg.norm(phi, axis=0)
        col[col == 0] = 1.0
        psi = phi / col
        row = np.max(np.abs(psi), axis=1)
        row[row == 0] = 1.0
        y0 = psi / row[:, None]

        def rhs(t, y, row=row):
            m = system.matrix(t) * (row[None, :] / row[:, None])
            return (m @ y.reshape(n2, n2)).ravel()

        sol = integrate.solve_ivp(rhs, (tau, t1), y0.ravel(), method="DOP853",
                                  rtol=controls.rtol, atol=controls.atol, dense_output=True)
        if sol.status < 0:
            s_reached = system.s_of(sol.t[-1])
            raise IntegrationError(f"integration failed: {sol.message}",
                                   local.x_of_s(s_reached))
        tq = 0.5 * (tau + t1) + 0.5 * (t1 - tau) * nodes
        yq = sol.sol(tq).reshape(n2, n2, -1)[0] * row[0]  # (columns, nodes)
        sq = np.exp(-tq) if ep.finite else tq
        dens = local.vector["w"](sq) * np.abs(np.array([system.dxdtau(s) for s in sq]))
        wq = 0.5 * (t1 - tau) * gw * dens
        dg = np.einsum("q,iq,jq->ij", wq, yq.conj(), yq)
        dg = dg * col[:, None] * col[None, :]
        end = sol.y[:, -1].reshape(n2, n2) * row[:, None] * col[None, :]
        g = np.diag(lam).astype(complex) + dg
        new_lam, v = _hermitian_jacobi(g)
        new_lam = np.maximum(new_lam, np.maximum(lam.min(), 0.0))
        growth = new_lam.max() / lam.max() if lam.max() > 0 else 1.0
        if not ep.finite and growth > 1e8 and h > 1e-6:
            h *= 0.25
            continue
        phi = end @ v
        transform = transform @ v
        lam = new_lam
        tau = t1
        s_now = system.s_of(tau)
        grid.append(local.x_of_s(s_now))
        dist.append(s_now)
        vals.append(phi @ transform.conj().T)
        eigs.append(lam.copy())
        if not np.all(np.isfinite(lam)) or lam.max() > 1e280:
            reason = "overflow guard"
            break
        if not ep.finite:
            if lam.max() > controls.lambda_max:
                reason = "Gram growth limit reached"
                break
            if tau >= tau_end:
                reason = "distance limit reached"
                break
            if growth > controls.growth_high:
                h *= 0.5
            elif growth < controls.growth_low:
                h = min(2 * h, max(s_now, 1.0))
    else:
        reason = "chunk budget exhausted"
    return SolutionSample(z, ep, anchor, np.array(grid), np.array(dist), np.array(vals),
                          np.array(eigs), "w", reason)


# ---------------------------------------------------------------- tail tests


@dataclass(frozen=True)
class TailFit:
    """Evidence on the convergence of a monotone sequence of partial sums.

    ``kappa`` is the local decay rate of the per-chunk increments per unit of
    the fit variable (``log2`` of the inverse distance at a finite endpoint,
    ``log2 s`` or ``s`` at infinity) and ``half_width`` its confidence
    half-width.  ``block_kappa`` is the same rate from the ratio of the two
    halves of the window.  ``exponent`` translates ``kappa`` into the local
    exponent of the density: ``|y|²w ~ dist^exponent`` (finite endpoint,
    power model at infinity) or ``~ exp(exponent·s)``.
    """

    status: str
    model: str
    kappa: float
    half_width: float
    block_kappa: float
    exponent: float
    residual: float
    points: int
    saturated: bool
    limit: float

    @property
    def ci_width(self) -> float:
        return 2 * self.half_width

    @property
    def convergent(self) -> bool | None:
        return {"convergent": True, "divergent": False}.get(self.status)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("status", "model", "kappa", "half_width",
                                              "block_kappa", "exponent", "residual",
                                              "points", "saturated", "limit")}


def _polyfit_slope(x: np.ndarray, y: np.ndarray, degree: int, confidence: float):
    """Slope at ``x[-1]`` of a least-squares polynomial, with a t half-width."""
    xc = x - x[-1]
    v = np.vander(xc, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(v, y, rcond=None)
    res = y - v @ coef
    dof = len(x) - (degree + 1)
    sigma2 = float(res @ res) / dof if dof > 0 else math.inf
    cov = sigma2 * np.linalg.pinv(v.T @ v)
    se = math.sqrt(max(cov[1, 1], 0.0)) if math.isfinite(sigma2) else math.inf
    q = stats.t.ppf(0.5 + confidence / 2, dof) if dof > 0 else math.inf
    rms = math.sqrt(float(res @ res) / len(x))
    return float(coef[1]), float(q * se), rms


def _tail_fit_model(sigma, mass, width, totals, model, controls: Controls) -> TailFit:
    mass = np.maximum(np.asarray(mass, dtype=float), 0.0)
    totals = np.asarray(totals, dtype=float)
    small = mass <= controls.saturation * np.maximum(totals, 1e-300)
    saturated = len(small) >= 2 and bool(small[-1] and small[-2])
    stop = len(mass)
    if saturated:
        stop = len(mass) - int(np.argmin(small[::-1]))
        while stop > 0 and small[stop - 1]:
            stop -= 1
    idx = np.arange(stop)
    idx = idx[mass[idx] > 0]
    idx = idx[-controls.window:]
    limit = float(totals[-1]) if len(totals) else 0.0
    if len(idx) < 3:
        status = "convergent" if saturated else "inconclusive"
        return TailFit(status, model, math.inf if saturated else math.nan, math.nan,
                       math.nan, math.nan, math.nan, int(len(idx)), saturated, limit)
    x = np.asarray(sigma, dtype=float)[idx]
    y = np.log2(mass[idx] / np.asarray(width, dtype=float)[idx])
    degree = 2 if len(idx) >= 6 else 1
    slope, hw, rms = _polyfit_slope(x, y, degree, controls.confidence)
    kappa = -slope
    half = len(idx) // 2
    a, b = idx[:half], idx[-half:]
    wa = np.asarray(width)[a].sum()
    wb = np.asarray(width)[b].sum()
    xa = np.average(np.asarray(sigma)[a], weights=np.asarray(width)[a])
    xb = np.average(np.asarray(sigma)[b], weights=np.asarray(width)[b])
    block = -(math.log2(mass[b].sum() / wb) - math.log2(mass[a].sum() / wa)) / (xb - xa)
    d = controls.delta
    conv_a, div_a = kappa - hw > d, kappa + hw < d
    if saturated and kappa > d and block > d:
        status = "convergent"
    elif conv_a and block > d:
        status = "convergent"
    elif div_a and block < d:
        status = "divergent"
    else:
        status = "inconclusive"
    if model == "exponential":
        exponent = -kappa * math.log(2)
    elif model == "power":
        exponent = -kappa - 1
    else:
        exponent = kappa - 1
    return TailFit(status, model, kappa, hw, block, exponent, rms, int(len(idx)),
                   saturated, limit)


def _tail_fit(distance: np.ndarray, prev: np.ndarray, mass: np.ndarray, totals: np.ndarray,
              finite: bool, controls: Controls) -> TailFit:
    """Fit the increments ``mass[k]`` collected between ``prev[k]`` and ``distance[k]``."""
    distance = np.asarray(distance, dtype=float)
    prev = np.asarray(prev, dtype=float)
    if finite:
        lo, hi = -np.log2(prev), -np.log2(distance)
        return _tail_fit_model(0.5 * (lo + hi), mass, hi - lo, totals, "octave", controls)
    fits = []
    pos = prev > 0
    if np.count_nonzero(pos) >= 3:
        lo, hi = np.log2(np.where(pos, prev, 1.0)), np.log2(distance)
        fits.append(_tail_fit_model(0.5 * (lo + hi)[pos], np.asarray(mass)[pos],
                                    (hi - lo)[pos], np.asarray(totals)[pos], "power",
                                    controls))
    fits.append(_tail_fit_model(0.5 * (prev + distance), mass, distance - prev, totals,
                                "exponential", controls))
    ranked = sorted(fits, key=lambda f: (math.isnan(f.residual), f.residual))
    return ranked[0]


@dataclass(frozen=True)
class L2Verdict:
    is_square_integrable: bool
    evidence: TailFit
    pointwise: TailFit | None = None
    weight: str = "w"

    def to_json(self) -> dict:
        out = {"is_square_integrable": self.is_square_integrable, "weight": self.weight,
               "quadrature": self.evidence.to_json()}
        if self.pointwise is not None:
            out["pointwise"] = self.pointwise.to_json()
        return out


def _decide(fit: TailFit, controls: Controls, what: str) -> bool:
    if fit.status == "inconclusive":
        raise InconclusiveError(f"{what}: the decay-rate fit and the tail-sum test do not "
                                f"agree (kappa={fit.kappa:.4g} ± {fit.half_width:.2g}, "
                                f"block={fit.block_kappa:.4g})", fit)
    if not fit.saturated and not fit.ci_width < controls.max_ci_width:
        raise InconclusiveError(f"{what}: decay-rate confidence width {fit.ci_width:.3g} "
                                f"exceeds {controls.max_ci_width}", fit)
    return fit.status == "convergent"


def l2_test(sample: SolutionSample, ep: Endpoint | None = None, weight=None,
            column: int = 0, controls: Controls = DEFAULT_CONTROLS) -> L2Verdict:
    """Square integrability of one sampled solution near the endpoint.

    ``weight`` is a callable in ``x``; it defaults to ``1``.  Test (a) fits
    the pointwise density ``|y|² w · dist`` per unit of the fit variable,
    test (b) sums trapezoid shell masses; both must agree.
    """
    ep = ep or sample.endpoint
    y = np.asarray(sample.solution(column)) if sample.values.ndim == 3 else \
        np.asarray(sample.values)
    return _l2_from_points(np.asarray(sample.grid), np.asarray(sample.distance), y, ep,
                           weight, controls)


def _l2_from_points(x, dist, y, ep: Endpoint, weight, controls: Controls) -> L2Verdict:
    w = np.ones_like(x) if weight is None else np.asarray(weight(x), dtype=float) * \
        np.ones_like(x)
    f = np.abs(y) ** 2 * w
    if ep.finite:
        u = -np.log2(dist)
        jac = dist * math.log(2)
    else:
        u = np.log2(dist)
        jac = dist * math.log(2)
    dens = f * jac
    shell = 0.5 * (dens[1:] + dens[:-1]) * np.diff(u)
    totals = np.cumsum(shell)
    quad = _tail_fit(dist[1:], dist[:-1], shell, totals, ep.finite, controls)
    pointwise = _pointwise_fit(u, dens, ep, controls)
    ok_q = _decide(quad, controls, "shell quadrature")
    ok_p = pointwise.status == "convergent" or (pointwise.status != "divergent" and quad.saturated)
    if pointwise.status == "inconclusive" and not quad.saturated:
        raise InconclusiveError("pointwise density fit is inconclusive", pointwise)
    if ok_q != ok_p:
        raise InconclusiveError("pointwise fit and shell quadrature disagree", quad)
    return L2Verdict(ok_q, quad, pointwise)


def _pointwise_fit(u, dens, ep: Endpoint, controls: Controls) -> TailFit:
    # last decade of the approach (about 3.3 units of log2 distance), at least 6 points
    keep = dens > 0
    u, dens = u[keep], dens[keep]
    sel = u >= u[-1] - math.log2(10) if len(u) else keep
    if np.count_nonzero(sel) < 6:
        sel = np.arange(len(u)) >= len(u) - 6
    x, yv = u[sel], np.log2(dens[sel])
    if len(x) < 3:
        return TailFit("inconclusive", "pointwise", math.nan, math.nan, math.nan, math.nan,
                       math.nan, len(x), False, math.nan)
    slope, hw, rms = _polyfit_slope(x, yv, 1, controls.confidence)
    kappa = -slope
    d = controls.delta
    status = "convergent" if kappa - hw > d else "divergent" if kappa + hw < d \
        else "inconclusive"
    exponent = kappa - 1 if ep.finite else -kappa - 1
    return TailFit(status, "pointwise", kappa, hw, kappa, exponent, rms, len(x), False,
                   math.nan)


def l2_test_function(f, ep: Endpoint, weight=None, start: float = 1.0,
                     controls: Controls = DEFAULT_CONTROLS) -> L2Verdict:
    """Square integrability near ``ep`` of a callable ``f``.

    ``start`` is the initial distance to the endpoint (or ``|x|`` at
    infinity).  Shell masses come from adaptive quadrature on octave shells.
    """
    octaves = int(math.ceil(math.log2(start / controls.endpoint_gap))) if ep.finite else 27
    if ep.finite:
        dist = start * 2.0 ** -np.arange(octaves + 1)
        x = ep.location + (1 if ep.side == "left" else -1) * dist
    else:
        dist = start * 2.0 ** np.arange(octaves + 1)
        x = np.sign(ep.location) * dist
    wfun = (lambda t: 1.0) if weight is None else weight

    def integrand(s):
        xx = ep.location + (1 if ep.side == "left" else -1) * s if ep.finite \
            else math.copysign(s, ep.location)
        return abs(complex(f(xx))) ** 2 * float(wfun(xx))

    shells = []
    for lo, hi in zip(dist[:-1], dist[1:]):
        a, b = sorted((lo, hi))
        val, _ = integrate.quad(integrand, a, b, limit=200, epsabs=0, epsrel=1e-12)
        shells.append(val)
    shells = np.array(shells)
    totals = np.cumsum(shells)
    quad = _tail_fit(dist[1:], dist[:-1], shells, totals, ep.finite, controls)
    yv = np.array([complex(f(t)) for t in x])
    wv = np.array([float(wfun(t)) for t in x])
    u = -np.log2(dist) if ep.finite else np.log2(dist)
    dens = np.abs(yv) ** 2 * wv * dist * math.log(2)
    pointwise = _pointwise_fit(u, dens, ep, controls)
    ok_q = _decide(quad, controls, "shell quadrature")
    if pointwise.status == "inconclusive" and not quad.saturated:
        raise InconclusiveError("pointwise density fit is inconclusive", pointwise)
    ok_p = pointwise.status == "convergent" or quad.saturated
    if ok_q != ok_p:
        raise InconclusiveError("pointwise fit and shell quadrature disagree", quad)
    return L2Verdict(ok_q, quad, pointwise)


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class EndpointClassification:
    kind: str
    l2_solution_count: int
    z_used: complex
    endpoint: Endpoint
    fits: tuple = ()
    regular_checks: dict = field(default_factory=dict)
    stop_reason: str = ""

    @property
    def d(self) -> int:
        return self.l2_solution_count

    def max_ci_width(self) -> float:
        widths = [f.ci_width for f in self.fits if not f.saturated]
        widths += [f.ci_width for f in self.regular_checks.values() if not f.saturated]
        return max(widths, default=0.0)

    def to_json(self) -> dict:
        return {"endpoint": self.endpoint.to_json(), "kind": self.kind,
                "d": self.l2_solution_count, "z": [self.z_used.real, self.z_used.imag],
                "partial_sums": [f.to_json() for f in self.fits],
                "coefficient_integrability": {k: v.to_json()
                                              for k, v in self.regular_checks.items()},
                "stop_reason": self.stop_reason}


def _regular_checks(expr: QuasiDifferentialExpression, ep: Endpoint,
                    controls: Controls) -> dict:
    """Integrability near ``ep`` of ``1/p_0``, ``p_1 .. p_n`` and ``w``."""
    local = _Local(expr, ep)
    s0 = abs(expr.anchor - ep.location)
    octaves = int(math.ceil(math.log2(s0 / controls.endpoint_gap)))
    dist = s0 * 2.0 ** -np.arange(octaves + 1)
    out = {}
    for name in local.coefficient_names():
        f = local.scalar[name]
        shells = []
        for hi, lo in zip(dist[:-1], dist[1:]):
            val, _ = integrate.quad(lambda s: abs(f(s)), lo, hi, limit=200, epsabs=0,
                                    epsrel=1e-12)
            shells.append(val)
        shells = np.array(shells)
        totals = np.cumsum(shells)
        if totals[-1] == 0:
            out[name] = TailFit("convergent", "octave", math.inf, 0.0, math.inf, math.inf,
                                0.0, len(shells), True, 0.0)
            continue
        out[name] = _tail_fit(dist[1:], dist[:-1], shells, totals, True, controls)
    return out


def classify_endpoint(expr: QuasiDifferentialExpression, ep, z: complex = 1j,
                      controls: Controls = DEFAULT_CONTROLS) -> EndpointClassification:
    """Classify ``ep`` as regular, limit circle, limit point or intermediate.

    ``d`` counts the solutions of ``τy = zy`` that are square integrable
    near the endpoint; ``d = 2n`` is limit circle, ``d = n`` limit point and
    values in between are reported as ``"intermediate"``.
    """
    ep = _resolve(expr, ep)
    z = complex(z)
    n = expr.n
    checks = {}
    if ep.finite and ep.kind_hint in ("regular", "unknown"):
        checks = _regular_checks(expr, ep, controls)
        verdicts = [_decide(f, controls, f"integrability of {k}") for k, f in checks.items()]
        if all(verdicts):
            return EndpointClassification("regular", 2 * n, z, ep, (), checks,
                                          "coefficients integrable")
        if ep.kind_hint == "regular":
            warnings.warn(f"endpoint {ep.location} is marked regular but a coefficient is "
                          "not integrable there; integrating instead", stacklevel=2)
    sample = integrate_toward_endpoint(expr, z, ep, controls, allow_real=True)
    sums = sample.partial_sums()
    fits = []
    dist = sample.distance
    prev = np.concatenate([[abs(sample.anchor - ep.location) if ep.finite
                            else math.copysign(1.0, ep.location) * sample.anchor], dist[:-1]])
    for j in range(2 * n):
        s = sums[:, j]
        mass = np.diff(np.concatenate([[0.0], s]))
        fits.append(_tail_fit(dist, prev, mass, s, ep.finite, controls))
    flags = []
    for j, f in enumerate(fits):
        flags.append(_decide(f, controls, f"partial sum S_{j + 1} at x={ep.location}"))
    d = sum(flags)
    if flags != [True] * d + [False] * (2 * n - d):
        raise InconclusiveError(f"non-monotone convergence pattern {flags}", tuple(fits))
    if z.imag != 0 and d < n:
        raise InconclusiveError(f"found {d} square-integrable solutions for nonreal z; "
                                f"at least {n} must exist", tuple(fits))
    kind = "limit_circle" if d == 2 * n else "limit_point" if d == n else "intermediate"
    return EndpointClassification(kind, d, z, ep, tuple(fits), checks, sample.stop_reason)


@dataclass(frozen=True)
class DeficiencyReport:
    pair: DefectPair
    plus: tuple
    minus: tuple

    def to_json(self) -> dict:
        return {"deficiency_indices": self.pair.to_json(),
                "d_a": self.plus[0].d, "d_b": self.plus[1].d,
                "z=+i": [c.to_json() for c in self.plus],
                "z=-i": [c.to_json() for c in self.minus]}

    def max_ci_width(self) -> float:
        return max(c.max_ci_width() for c in self.plus + self.minus)


def deficiency_report(expr: QuasiDifferentialExpression,
                      controls: Controls = DEFAULT_CONTROLS) -> DeficiencyReport:
    counts = {}
    classes = {}
    for z in (1j, -1j):
        ca = classify_endpoint(expr, "a", z, controls)
        cb = classify_endpoint(expr, "b", z, controls)
        classes[z] = (ca, cb)
        counts[z] = ca.d + cb.d - 2 * expr.n
    if counts[1j] != counts[-1j]:
        raise InconclusiveError(f"counts differ between z=i ({counts[1j]}) and z=-i "
                                f"({counts[-1j]}) for real coefficients")
    if counts[1j] < 0:
        raise InconclusiveError(f"negative deficiency count {counts[1j]}")
    return DeficiencyReport(DefectPair(counts[1j], counts[-1j]), classes[1j], classes[-1j])


def deficiency_indices_minimal(expr: QuasiDifferentialExpression,
                               controls: Controls = DEFAULT_CONTROLS) -> DefectPair:
    """``n± = d_a + d_b - 2n`` from endpoint counts at ``z = i``, checked at ``-i``."""
    return deficiency_report(expr, controls).pair


# ---------------------------------------------------------------- boundary values


@dataclass(frozen=True)
class BoundaryValues:
    g_tilde: float
    g_tilde_prime: float
    error: tuple
    endpoint: float
    family: str

    def as_tuple(self) -> tuple:
        return (self.g_tilde, self.g_tilde_prime)


def _extrapolate(values: np.ndarray) -> tuple[float, float]:
    """Aitken acceleration of a sequence on a geometric approach; (limit, error)."""
    v = np.asarray(values)
    acc = []
    for k in range(2, len(v)):
        d1 = v[k] - v[k - 1]
        d2 = v[k] - 2 * v[k - 1] + v[k - 2]
        acc.append(v[k] if abs(d2) <= 1e-300 or abs(d1) <= 1e-15 * abs(v[k])
                   else v[k] - d1 * d1 / d2)
    acc = np.array(acc)
    err = abs(acc[-1] - acc[-2]) + abs(acc[-1] - v[-1]) * 1e-3
    return complex(acc[-1]), float(err)


def generalized_boundary_values(g: FunctionWithDerivatives, expr: QuasiDifferentialExpression,
                                endpoint=None, levels: int = 30,
                                tol: float = 1e-6) -> BoundaryValues:
    """``(g̃, g̃')`` at a singular endpoint of ``bessel_gamma`` (``γ ∈ [0, 1)``) or ``legendre``.

    With distinguished solutions ``u_a`` (dominant) and ``u_b`` (principal)
    normalized by ``W(u_a, u_b) = 1``, the boundary values are the coefficients
    of ``g`` along them, extracted as the Wronskians ``W(g, u_b)`` and
    ``W(u_a, g)``.  These equal the ratio limits ``g/u_a`` and
    ``(g - g̃ u_a)/u_b`` but converge much faster.  The limit is taken by
    Aitken extrapolation on the approach ``dist = 2^-k``.
    """
    if expr.name == "bessel_gamma":
        gamma = float(expr.params["gamma"])
        if not 0 <= gamma < 1:
            raise ValueError(f"boundary values need gamma in [0, 1), got {gamma}")
        e = 0.0 if endpoint is None else float(endpoint)
        if e != 0.0:
            raise ValueError("bessel_gamma boundary values are defined at x = 0")

        def pair(s):
            x = s
            gv, gd = g(np.array([x]), 0)[0], g(np.array([x]), 1)[0]
            ub, ubd = x ** (0.5 + gamma), (0.5 + gamma) * x ** (gamma - 0.5)
            if gamma == 0:
                ua = x ** 0.5 * math.log(1 / x)
                uad = 0.5 * x ** -0.5 * math.log(1 / x) - x ** -0.5
            else:
                ua = x ** (0.5 - gamma) / (2 * gamma)
                uad = (0.5 - gamma) * x ** (-0.5 - gamma) / (2 * gamma)
            return gv * ubd - gd * ub, ua * gd - uad * gv
    elif expr.name == "legendre":
        e = 1.0 if endpoint is None else float(endpoint)
        if e not in (1.0, -1.0):
            raise ValueError("legendre boundary values are defined at x = ±1")

        def pair(s):
            x = e - s if e > 0 else e + s
            p = s * (2 - s)
            u2 = 0.5 * math.log(s / (2 - s)) if e > 0 else 0.5 * math.log((2 - s) / s)
            gv, gd = g(np.array([x]), 0)[0], g(np.array([x]), 1)[0]
            return -p * gd, u2 * p * gd + gv
    else:
        raise ValueError("boundary values are available for bessel_gamma and legendre only")
    dist = 0.5 * 2.0 ** -np.arange(levels)
    vals = np.array([pair(s) for s in dist], dtype=complex)
    gt, et = _extrapolate(vals[:, 0])
    gp, ep_ = _extrapolate(vals[:, 1])
    scale = max(1.0, abs(gt), abs(gp))
    if not (et <= tol * scale and ep_ <= tol * scale) or not (np.isfinite(gt) and np.isfinite(gp)):
        raise ExtrapolationError(f"boundary-value limits did not settle (errors {et:.3g}, "
                                 f"{ep_:.3g})")
    gt = gt.real if gt.imag == 0 else gt
    gp = gp.real if gp.imag == 0 else gp
    return BoundaryValues(gt, gp, (et, ep_), e, expr.name)


# ---------------------------------------------------------------- kernel counts


@dataclass(frozen=True)
class KernelReport:
    power: int
    alpha: object
    square: bool
    count: int
    basis: tuple
    in_l2: tuple
    residuals: tuple
    in_range: bool

    def to_json(self) -> dict:
        return {"power": self.power, "alpha": str(self.alpha), "square": self.square,
                "count": self.count,
                "basis": [f"(1-x)^({b})" + (f"*ln(1-x)^{k}" if k else "")
                          for b, k in self.basis],
                "in_l2": list(self.in_l2), "residuals": list(self.residuals),
                "in_range": self.in_range}


def _kernel_basis(power: int, alpha) -> list:
    """``(β, k)`` pairs for ``(1-x)^β ln(1-x)^k``; repeated exponents add log powers."""
    exps = bessel_kernel_exponents(power, alpha)
    basis: list = []
    for e in exps:
        k = sum(1 for b, _ in basis if _same(b, e.beta))
        basis.append((e.beta, k))
    return basis


def _same(a, b) -> bool:
    diff = sp.nsimplify(a - b)
    return diff == 0 or bool(diff.is_zero)


def _tau2_image(beta, k: int, alpha) -> list:
    """``τ_{2,α}[(1-x)^β L^k]`` with ``L = ln(1-x)`` as ``[(β-2, j, coeff)]``."""
    c0 = alpha ** 2 - sp.Rational(1, 4) - beta * (beta - 1)
    out = [(beta - 2, k, sp.simplify(c0))]
    if k >= 1:
        out.append((beta - 2, k - 1, sp.simplify(-(2 * beta - 1) * k)))
    if k >= 2:
        out.append((beta - 2, k - 2, sp.Integer(-k * (k - 1))))
    return [t for t in out if t[2] != 0]


def kernel_l2_report(power: int, alpha, square: bool = False,
                     samples: int = 20) -> KernelReport:
    """Square-integrable kernel elements of ``τ_{2,α}``, its square, or the square domain.

    ``power`` is 2 or 4.  With ``square=True`` (power 2 applied twice) the count
    is of kernel elements ``u`` of ``τ²`` with ``u`` and ``τu`` both square
    integrable.  Each basis function is checked numerically against the
    expression it should annihilate.
    """
    if square and power != 2:
        raise ValueError("square=True applies to power 2")
    kernel_power = 4 if square else power
    a = sp.nsimplify(alpha) if isinstance(alpha, str) else sp.sympify(alpha)
    in_range = bool(1 <= float(a) < 3)
    if not in_range:
        warnings.warn(f"alpha={alpha} is outside [1, 3); the count is computed for this "
                      "alpha but the limit-3 statement does not cover it", stacklevel=2)
    basis = _kernel_basis(kernel_power, a)
    expr = build_classical("bessel_alpha" if kernel_power == 2 else "bessel4_alpha", alpha=a)
    xs = np.linspace(0.05, 0.95, samples)
    residuals = []
    for beta, k in basis:
        u = kernel_function(beta, k)
        r = apply(expr, u, xs)
        scale = np.max(np.abs(u(xs, expr.order))) + np.max(np.abs(u(xs)))
        rel = float(np.max(np.abs(r)) / scale)
        if rel > 1e-8:
            raise ArithmeticError(f"(1-x)^{beta} ln^{k} is not annihilated (residual {rel:.2e})")
        residuals.append(rel)
    half = sp.Rational(1, 2)
    in_l2 = tuple(bool(b + half > 0) for b, _ in basis)
    if not square:
        count = sum(in_l2)
    else:
        # u in the L2 span with tau u in L2: the L2 span minus the rank of the
        # non-L2 part of the image
        l2_basis = [bk for bk, ok in zip(basis, in_l2) if ok]
        monomials: list = []
        rows = []
        for beta, k in l2_basis:
            row = {}
            for e, j, c in _tau2_image(beta, k, a):
                if e + half > 0:
                    continue
                key = next((m for m in monomials if _same(m[0], e) and m[1] == j),
                           None)
                if key is None:
                    key = (e, j)
                    monomials.append(key)
                row[key] = row.get(key, 0) + c
            rows.append(row)
        mat = sp.Matrix([[r.get(m, 0) for m in monomials] for r in rows]) if monomials \
            else sp.zeros(len(rows), 0)
        rank = mat.rank(simplify=True) if monomials else 0
        count = len(l2_basis) - rank
    return KernelReport(power, a, square, int(count), tuple(basis), in_l2, tuple(residuals),
                        in_range)


def kernel_l2_count(power: int, alpha, square: bool = False) -> int:
    """Number of square-integrable kernel solutions; see :func:`kernel_l2_report`."""
    return kernel_l2_report(power, alpha, square).count

"""Roots of real polynomials and their half-plane counts under ``P ∓ iε``.

For a real polynomial ``P`` of degree ``m`` with positive leading coefficient
and simple roots, the roots of ``P(z) - iε`` split between the upper and
lower half-planes as ``(k, k)`` when ``m = 2k`` and ``(k, k-1)`` when
``m = 2k - 1``; for ``P(z) + iε`` the odd split is ``(k-1, k)``.  Each simple
real root ``z0`` moves to first order to ``z0 + iε/P'(z0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "RealPolynomial",
    "RootSet",
    "HalfPlaneCount",
    "RootFindingError",
    "AmbiguousTrackingError",
    "PathReport",
    "find_roots",
    "halfplane_counts",
    "lemma_prediction",
    "safe_epsilon",
    "first_order_root_shift",
    "make_simple",
    "track_roots",
]


class RootFindingError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class AmbiguousTrackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RealPolynomial:
    """Real coefficients ``a_0, ..., a_m`` indexed by power."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = [float(c) for c in self.coefficients]
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be finite")
        while coeffs and coeffs[-1] == 0.0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise ValueError("polynomial must have degree at least 1")
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_roots(cls, roots: Sequence[float], leading: float = 1.0) -> "RealPolynomial":
        c = np.polynomial.polynomial.polyfromroots(roots) * leading
        return cls(tuple(np.real_if_close(c).real))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> float:
        return self.coefficients[-1]

    def __call__(self, z):
        return _horner(np.asarray(self.coefficients, dtype=complex), z)

    def derivative(self) -> "RealPolynomial | None":
        if self.degree == 1:
            return None
        return RealPolynomial(tuple(k * a for k, a in enumerate(self.coefficients) if k > 0))

    def eval_derivative(self, z):
        d = [k * a for k, a in enumerate(self.coefficients) if k > 0]
        return _horner(np.asarray(d, dtype=complex), z)

    def shifted(self, c: float) -> "RealPolynomial":
        coeffs = list(self.coefficients)
        coeffs[0] += c
        return RealPolynomial(tuple(coeffs))

    def perturbed(self, epsilon: float, sign: str) -> np.ndarray:
        """Complex coefficients of ``P - iε`` (plus) or ``P + iε`` (minus)."""
        c = np.asarray(self.coefficients, dtype=complex)
        c[0] += -1j * epsilon if _sign(sign) > 0 else 1j * epsilon
        return c

    def __str__(self) -> str:
        terms = []
        for k, a in reversed(list(enumerate(self.coefficients))):
            if a == 0:
                continue
            terms.append(f"{a:g}" + ("" if k == 0 else "·t" if k == 1 else f"·t^{k}"))
        return " + ".join(terms)


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residual_bound: float
    method: str = "aberth"

    def __len__(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class HalfPlaneCount:
    in_upper: int
    in_lower: int
    on_axis: int
    epsilon: float

    def as_tuple(self) -> tuple:
        return (self.in_upper, self.in_lower, self.on_axis)

    def swap(self) -> "HalfPlaneCount":
        return HalfPlaneCount(self.in_lower, self.in_upper, self.on_axis, self.epsilon)


def _sign(sign: str) -> int:
    if sign in ("plus", "+"):
        return 1
    if sign in ("minus", "-"):
        return -1
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


def _horner(c: np.ndarray, z):
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z) + c[-1]
    for a in c[-2::-1]:
        out = out * z + a
    return out


def _scaled_residual(c: np.ndarray, roots: np.ndarray) -> float:
    if len(roots) == 0:
        return 0.0
    num = np.abs(_horner(c, roots))
    den = _horner(np.abs(c).astype(complex), np.abs(roots)).real
    # den vanishes only at a root 0 of a polynomial with a_0 = 0, where num is 0 too
    return float(np.max(np.divide(num, den, out=num.copy(), where=den > 0)))


def _aberth(c: np.ndarray, maxiter: int) -> tuple[np.ndarray, bool]:
    m = len(c) - 1
    dc = c[1:] * np.arange(1, m + 1)
    # Fujiwara-type radius; starting points on a slightly rotated circle
    ratios = np.abs(c[:-1] / c[-1]) ** (1.0 / (m - np.arange(m)))
    radius = max(2.0 * float(np.max(ratios)), 1e-12)
    angles = 2 * np.pi * np.arange(m) / m + 0.4
    z = radius * np.exp(1j * angles)
    for _ in range(maxiter):
        p = _horner(c, z)
        dp = _horner(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 4 * np.finfo(float).eps * np.maximum(np.abs(z), 1e-300)):
            return z, True
    return z, False


def _companion(c: np.ndarray) -> np.ndarray:
    m = len(c) - 1
    comp = np.zeros((m, m), dtype=complex)
    comp[1:, :-1] = np.eye(m - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(comp)


def _newton_polish(c: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    m = len(c) - 1
    dc = c[1:] * np.arange(1, m + 1)
    best = z.copy()
    for _ in range(steps):
        dp = _horner(dc, best)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = _horner(c, best) / dp
        step = np.where(np.isfinite(step), step, 0.0)
        trial = best - step
        improved = np.abs(_horner(c, trial)) < np.abs(_horner(c, best))
        best = np.where(improved, trial, best)
    return best


def _as_complex_coeffs(p) -> np.ndarray:
    if isinstance(p, RealPolynomial):
        return np.asarray(p.coefficients, dtype=complex)
    c = np.asarray(p, dtype=complex)
    nz = np.nonzero(c)[0]
    if len(nz) == 0 or nz[-1] < 1:
        raise ValueError("polynomial must have degree at least 1")
    return c[: nz[-1] + 1]


def find_roots(p, tol: float = 1e-12, maxiter: int = 500) -> RootSet:
    """All roots with multiplicity.

    ``p`` is a :class:`RealPolynomial` or a complex coefficient array in
    increasing powers.  ``residual_bound`` is the largest backward error
    ``|P(r)| / sum |a_k||r|^k`` over the returned roots.
    """
    c = _as_complex_coeffs(p)
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    if len(c) == 2:
        root = np.array([-c[0] / c[1]])
        return RootSet(root, _scaled_residual(c, root), "linear")
    z, converged = _aberth(c, maxiter)
    z = _newton_polish(c, z)
    res = _scaled_residual(c, z)
    method = "aberth"
    if not converged or res > tol:
        zc = _newton_polish(c, _companion(c))
        rc = _scaled_residual(c, zc)
        if rc < res:
            z, res, method = zc, rc, "companion"
    if res > tol:
        raise RootFindingError("root finder did not reach the tolerance", res)
    order = np.lexsort((z.imag, z.real))
    return RootSet(z[order], res, method)


def lemma_prediction(degree: int, sign: str = "plus") -> tuple[int, int]:
    """Predicted (upper, lower) counts for ``P ∓ iε`` with small ε."""
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if degree % 2 == 0:
        return (degree // 2, degree // 2)
    k = (degree + 1) // 2
    return (k, k - 1) if _sign(sign) > 0 else (k - 1, k)


def halfplane_counts(p: RealPolynomial, epsilon: float, sign: str = "plus",
                     tol: float = 1e-12) -> HalfPlaneCount:
    """Count roots of ``P - iε`` (plus) or ``P + iε`` (minus) by half-plane.

    A root is counted on the axis when ``|Im z|`` is within
    ``min(1e-12·max(1, |z|max), forward error bound of z)``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    c = p.perturbed(epsilon, sign)
    rs = find_roots(c, tol=max(tol, 1e-12))
    return _count(rs.roots, epsilon, c, rs.residual_bound)


def _count(roots: np.ndarray, epsilon: float, c: np.ndarray | None = None,
           backward: float = 0.0) -> HalfPlaneCount:
    scale = max(1.0, float(np.max(np.abs(roots))))
    band = np.full(len(roots), 1e-12 * scale)
    if c is not None:
        # forward error bound backward·Σ|a_k||z|^k / |P'(z)| of each root; a
        # well-conditioned root is resolved even when it sits closer to the axis
        m = len(c) - 1
        dc = c[1:] * np.arange(1, m + 1)
        mag = _horner(np.abs(c).astype(complex), np.abs(roots)).real
        dp = np.abs(_horner(dc, roots))
        bound = 8 * max(backward, np.finfo(float).eps) * mag / np.maximum(dp, 1e-300)
        band = np.minimum(band, bound)
    im = roots.imag
    return HalfPlaneCount(int(np.sum(im > band)), int(np.sum(im < -band)),
                          int(np.sum(np.abs(im) <= band)), epsilon)


def _min_separation(roots: np.ndarray) -> float:
    if len(roots) < 2:
        return math.inf
    d = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(d, np.inf)
    return float(np.min(d))


def safe_epsilon(p: RealPolynomial, rho: float = 0.1) -> float:
    """A computable stand-in for "ε sufficiently small".

    ``rho * min|P'(z_j)| * min(sep/2, min |Im z_j| over non-real roots)``.
    """
    roots = find_roots(p).roots
    scale = max(1.0, float(np.max(np.abs(roots))))
    if p.degree == 1:
        return rho * abs(p.leading) * scale
    dmin = float(np.min(np.abs(p.eval_derivative(roots))))
    reach = _min_separation(roots) / 2
    nonreal = np.abs(roots.imag) > 1e-9 * scale
    if np.any(nonreal):
        reach = min(reach, float(np.min(np.abs(roots.imag[nonreal]))))
    return rho * dmin * reach


def first_order_root_shift(p: RealPolynomial, z0: float, epsilon: float,
                           tol: float = 1e-9) -> complex:
    """First-order position ``z0 + iε/P'(z0)`` of the root of ``P - iε``."""
    scale = float(np.sum(np.abs(p.coefficients))) * max(1.0, abs(z0)) ** p.degree
    if abs(complex(p(z0))) > tol * scale:
        raise ValueError(f"{z0} is not a root (|P(z0)| = {abs(complex(p(z0))):.3e})")
    d = complex(p.eval_derivative(z0))
    if abs(d) <= tol * scale:
        raise ValueError(f"{z0} is not a simple root (P'(z0) = {d})")
    return complex(z0) + 1j * epsilon / d


def make_simple(p: RealPolynomial, tol: float = 1e-6,
                budget: int = 64) -> tuple[RealPolynomial, float]:
    """Return ``(p + c, c)`` with all roots of ``p + c`` distinct."""

    def ok(q: RealPolynomial) -> bool:
        roots = find_roots(q, tol=1e-9).roots
        scale = max(1.0, float(np.max(np.abs(roots))))
        return _min_separation(roots) > tol * scale

    if ok(p):
        return p, 0.0
    step = 0.125 * max(abs(a) for a in p.coefficients)
    for k in range(1, budget + 1):
        for c in (-k * step, k * step):
            q = p.shifted(c)
            if ok(q):
                return q, c
    raise RuntimeError("no shift with simple roots found within the search budget")


@dataclass
class PathReport:
    eps_grid: list
    paths: list = field(default_factory=list)
    halfplanes: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    @property
    def confined(self) -> bool:
        return all(len(set(h)) == 1 for h in self.halfplanes)


def track_roots(p: RealPolynomial, sign: str, eps_grid: Sequence[float]) -> PathReport:
    """Follow each root of ``P ∓ iε`` across an increasing ε grid."""
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise ValueError("eps_grid must be nonempty")
    if any(e <= 0 for e in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps_grid must be positive and strictly increasing")
    report = PathReport(grid)
    c = p.perturbed(grid[0], sign)
    rs = find_roots(c)
    current = rs.roots
    report.paths = [[r] for r in current]
    report.counts.append(_count(current, grid[0], c, rs.residual_bound))
    for k, eps in enumerate(grid[1:], start=1):
        c = p.perturbed(eps, sign)
        rs = find_roots(c)
        new = rs.roots
        cost = np.abs(current[:, None] - new[None, :])
        rows, cols = linear_sum_assignment(cost)
        sep = _min_separation(new)
        moved = cost[rows, cols]
        if len(new) > 1 and np.max(moved) >= 0.5 * sep:
            raise AmbiguousTrackingError(
                f"ambiguous continuation between eps={grid[k - 1]:g} and eps={eps:g}; "
                f"refine the grid there (largest step {np.max(moved):.3g}, "
                f"root separation {sep:.3g})")
        matched = new[cols[np.argsort(rows)]]
        for path, r in zip(report.paths, matched):
            path.append(r)
        current = matched
        report.counts.append(_count(new, eps, c, rs.residual_bound))
    for path in report.paths:
        report.halfplanes.append(["upper" if r.imag > 0 else "lower" if r.imag < 0
                                  else "axis" for r in path])
    return report

"""Exact Stirling-type numbers from their explicit alternating sums.

All three families are computed with :class:`fractions.Fraction`.  The sums
alternate with large terms and the values leave the exactly representable
float range (``2**53``) early, so exact arithmetic is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from numbers import Rational

import mpmath

__all__ = [
    "stirling2",
    "legendre_stirling",
    "jacobi_stirling",
    "StirlingTable",
    "stirling_table",
    "recurrence_table",
    "GammaPoleError",
]


class GammaPoleError(ValueError):
    def __init__(self, r: int, x):
        super().__init__(f"Gamma ratio has a pole at r={r} (alpha+beta+r+2 = {x})")
        self.r = r


def _check(m: int, j: int) -> None:
    if int(m) != m or int(j) != j or m < 1 or j < 1:
        raise ValueError(f"indices must be positive integers, got ({m}, {j})")


def stirling2(m: int, j: int) -> Fraction:
    """Stirling number of the second kind."""
    _check(m, j)
    total = sum((-1) ** (i + j) * comb(j, i) * i ** m for i in range(j + 1))
    return Fraction(total, factorial(j))


def legendre_stirling(m: int, j: int) -> Fraction:
    """Legendre-Stirling number ``PS_m^(j)``."""
    _check(m, j)
    total = Fraction(0)
    for k in range(1, j + 1):
        total += Fraction((-1) ** (k + j) * (2 * k + 1) * (k * k + k) ** m,
                          factorial(k + j + 1) * factorial(j - k))
    return total


def _is_exact(v) -> bool:
    return isinstance(v, (int, Rational)) and not isinstance(v, bool)


def jacobi_stirling(n: int, j: int, alpha=0, beta=0):
    """Jacobi-Stirling number with parameters ``alpha``, ``beta``.

    The term for index ``r`` is
    ``Γ(s+r+2)(s+2r+1) (r² + s r + r)^(n-1) / ((r-1)! (j-r)! Γ(s+j+r+2))``
    with ``s = alpha + beta``.  The Gamma ratio is the finite product
    ``1/((x)(x+1)...(x+j-1))`` with ``x = s+r+2``.

    Rational parameters give an exact :class:`~fractions.Fraction`.  Other
    real parameters go through 50-digit arithmetic and return an
    ``mpmath.mpf`` (approximate).
    """
    _check(n, j)
    exact = _is_exact(alpha) and _is_exact(beta)
    if exact:
        s = Fraction(alpha) + Fraction(beta)
        one = Fraction(1)
    else:
        with mpmath.workdps(50):
            return _jacobi_stirling_mp(n, j, _mp(alpha) + _mp(beta))
    total = Fraction(0)
    for r in range(1, j + 1):
        x = s + r + 2
        pochhammer = one
        for i in range(j):
            if x + i == 0:
                raise GammaPoleError(r, x)
            pochhammer *= x + i
        lam = r * r + s * r + r
        total += ((-1) ** (r + j) * (s + 2 * r + 1) * lam ** (n - 1)
                  / (factorial(r - 1) * factorial(j - r) * pochhammer))
    return total


def _mp(v):
    if isinstance(v, Rational) and not isinstance(v, bool):
        return mpmath.mpf(v.numerator) / v.denominator
    if hasattr(v, "evalf"):  # sympy numbers such as sqrt(2)
        return mpmath.mpf(str(v.evalf(60)))
    return mpmath.mpf(v)


def _jacobi_stirling_mp(n: int, j: int, s):
    total = mpmath.mpf(0)
    for r in range(1, j + 1):
        x = s + r + 2
        pochhammer = mpmath.mpf(1)
        for i in range(j):
            if x + i == 0:
                raise GammaPoleError(r, x)
            pochhammer *= x + i
        lam = r * r + s * r + r
        total += ((-1) ** (r + j) * (s + 2 * r + 1) * lam ** (n - 1)
                  / (factorial(r - 1) * factorial(j - r) * pochhammer))
    return total


@dataclass(frozen=True)
class StirlingTable:
    family: str
    params: tuple = ()
    entries: dict = field(default_factory=dict)
    exact: bool = True

    def __getitem__(self, key):
        return self.entries[key]

    def row(self, m: int) -> list:
        return [self.entries[(m, j)] for j in range(1, m + 1)]


def stirling_table(family: str, m_max: int, alpha=0, beta=0) -> StirlingTable:
    """Entries ``(m, j)`` for ``1 <= j <= m <= m_max``."""
    if family == "classical":
        fn, params = stirling2, ()
    elif family == "legendre":
        fn, params = legendre_stirling, ()
    elif family == "jacobi":
        params = (alpha, beta)

        def fn(m, j):
            return jacobi_stirling(m, j, alpha, beta)
    else:
        raise ValueError(f"unknown Stirling family {family!r}")
    entries = {(m, j): fn(m, j) for m in range(1, m_max + 1) for j in range(1, m + 1)}
    exact = all(isinstance(v, Fraction) for v in entries.values())
    return StirlingTable(family, params, entries, exact)


def recurrence_table(family: str, m_max: int) -> dict:
    """Entries ``(m, j)`` from the triangular recurrences, independent of the sums.

    ``S(m, j) = j S(m-1, j) + S(m-1, j-1)`` and
    ``PS(m, j) = j(j+1) PS(m-1, j) + PS(m-1, j-1)``, both seeded by ``(1, 1) = 1``.
    """
    if family not in ("classical", "legendre"):
        raise ValueError(f"no recurrence for family {family!r}")
    table = {(1, 1): 1}
    for m in range(2, m_max + 1):
        for j in range(1, m + 1):
            factor = j if family == "classical" else j * (j + 1)
            table[(m, j)] = factor * table.get((m - 1, j), 0) + table.get((m - 1, j - 1), 0)
    return {k: Fraction(v) for k, v in table.items()}

"""Arithmetic of defect numbers and deficiency indices.

Counts live in the extended naturals ``{0, 1, 2, ...} ∪ {∞}``.  Fredholm
indices live in the extended integers and use signed infinities.

The hypotheses behind the product and power formulas (closed operators,
zero in the field of regularity, dense domains of the powers) are operator
facts that no finite computation can certify.  They are preconditions the
caller is responsible for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "ExtendedCount",
    "INFINITY",
    "DefectPair",
    "FredholmClass",
    "product_defect",
    "even_power_indices",
    "odd_power_indices",
    "power_indices",
    "polynomial_indices",
    "direct_sum_indices",
    "fredholm_index",
    "index_of_product",
]


class ExtendedCount:
    """A nonnegative integer or the unsigned symbol ``INFINITY``."""

    __slots__ = ("_value",)

    def __init__(self, value: int | None):
        if value is not None:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError(f"count must be an integer, got {value!r}")
            value = int(value)
            if value < 0:
                raise ValueError(f"count must be nonnegative, got {value}")
        self._value = value

    @classmethod
    def coerce(cls, x) -> "ExtendedCount":
        if isinstance(x, ExtendedCount):
            return x
        if isinstance(x, float) and math.isinf(x) and x > 0:
            return INFINITY
        if isinstance(x, str):
            s = x.strip().lower()
            if s in ("inf", "infinity", "∞"):
                return INFINITY
            return cls(int(s))
        return cls(x)

    @property
    def is_finite(self) -> bool:
        return self._value is not None

    @property
    def value(self) -> int | None:
        """The integer value, or ``None`` for infinity."""
        return self._value

    def __int__(self) -> int:
        if self._value is None:
            raise OverflowError("cannot convert INFINITY to int")
        return self._value

    def __add__(self, other) -> "ExtendedCount":
        other = ExtendedCount.coerce(other)
        if self._value is None or other._value is None:
            return INFINITY
        return ExtendedCount(self._value + other._value)

    __radd__ = __add__

    def __mul__(self, k) -> "ExtendedCount":
        # scaling by a nonnegative integer; 0·∞ = 0 by convention
        if isinstance(k, ExtendedCount):
            if not k.is_finite:
                return ExtendedCount(0) if self._value == 0 else INFINITY
            k = k._value
        if isinstance(k, bool) or int(k) != k or k < 0:
            raise ValueError(f"can only scale by a nonnegative integer, got {k!r}")
        k = int(k)
        if k == 0:
            return ExtendedCount(0)
        if self._value is None:
            return INFINITY
        return ExtendedCount(k * self._value)

    __rmul__ = __mul__

    def _key(self):
        return (1, 0) if self._value is None else (0, self._value)

    def __eq__(self, other) -> bool:
        try:
            other = ExtendedCount.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._value == other._value

    def __lt__(self, other) -> bool:
        return self._key() < ExtendedCount.coerce(other)._key()

    def __le__(self, other) -> bool:
        return self._key() <= ExtendedCount.coerce(other)._key()

    def __gt__(self, other) -> bool:
        return self._key() > ExtendedCount.coerce(other)._key()

    def __ge__(self, other) -> bool:
        return self._key() >= ExtendedCount.coerce(other)._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return "INFINITY" if self._value is None else f"ExtendedCount({self._value})"

    def __str__(self) -> str:
        return "inf" if self._value is None else str(self._value)

    def to_json(self):
        return "inf" if self._value is None else self._value


INFINITY = ExtendedCount(None)


@dataclass(frozen=True)
class DefectPair:
    """Deficiency indices ``(n_plus, n_minus)``."""

    n_plus: ExtendedCount
    n_minus: ExtendedCount

    def __post_init__(self):
        object.__setattr__(self, "n_plus", ExtendedCount.coerce(self.n_plus))
        object.__setattr__(self, "n_minus", ExtendedCount.coerce(self.n_minus))

    @classmethod
    def of(cls, pair) -> "DefectPair":
        if isinstance(pair, DefectPair):
            return pair
        a, b = pair
        return cls(a, b)

    def equal_indices(self) -> bool:
        return self.n_plus == self.n_minus

    def swap(self) -> "DefectPair":
        return DefectPair(self.n_minus, self.n_plus)

    def total(self) -> ExtendedCount:
        return self.n_plus + self.n_minus

    def __add__(self, other: "DefectPair") -> "DefectPair":
        other = DefectPair.of(other)
        return DefectPair(self.n_plus + other.n_plus, self.n_minus + other.n_minus)

    def __eq__(self, other) -> bool:
        try:
            other = DefectPair.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.n_plus == other.n_plus and self.n_minus == other.n_minus

    def __hash__(self) -> int:
        return hash((self.n_plus, self.n_minus))

    def __iter__(self):
        return iter((self.n_plus, self.n_minus))

    def __str__(self) -> str:
        return f"({self.n_plus}, {self.n_minus})"

    def to_json(self):
        return [self.n_plus.to_json(), self.n_minus.to_json()]


_FREDHOLM_KINDS = ("fredholm", "left_semi", "right_semi", "none")


@dataclass(frozen=True)
class FredholmClass:
    kind: str
    dim_ker: ExtendedCount
    dim_coker: ExtendedCount

    def __post_init__(self):
        if self.kind not in _FREDHOLM_KINDS:
            raise ValueError(f"unknown Fredholm kind {self.kind!r}")
        ker = ExtendedCount.coerce(self.dim_ker)
        coker = ExtendedCount.coerce(self.dim_coker)
        object.__setattr__(self, "dim_ker", ker)
        object.__setattr__(self, "dim_coker", coker)
        if self.kind == "fredholm" and not (ker.is_finite and coker.is_finite):
            raise ValueError("a Fredholm operator has finite kernel and cokernel")
        if self.kind == "left_semi" and not ker.is_finite:
            raise ValueError("a left semi-Fredholm operator has finite kernel")
        if self.kind == "right_semi" and not coker.is_finite:
            raise ValueError("a right semi-Fredholm operator has finite cokernel")

    @classmethod
    def from_dims(cls, dim_ker, dim_coker) -> "FredholmClass":
        """Pick the strongest kind compatible with the two dimensions."""
        ker = ExtendedCount.coerce(dim_ker)
        coker = ExtendedCount.coerce(dim_coker)
        if ker.is_finite and coker.is_finite:
            kind = "fredholm"
        elif ker.is_finite:
            kind = "left_semi"
        elif coker.is_finite:
            kind = "right_semi"
        else:
            kind = "none"
        return cls(kind, ker, coker)


def _positive_int(k, name: str) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"{name} must be a positive integer, got {k!r}")
    return int(k)


def product_defect(d1, d2) -> ExtendedCount:
    """Defect number of ``T1 T2`` at 0 from those of the factors.

    Valid when 0 lies in the field of regularity of both factors.
    """
    return ExtendedCount.coerce(d1) + ExtendedCount.coerce(d2)


def even_power_indices(p, k: int) -> DefectPair:
    """Indices of ``S**(2k)``."""
    k = _positive_int(k, "k")
    p = DefectPair.of(p)
    both = k * p.total()
    return DefectPair(both, both)


def odd_power_indices(p, k: int) -> DefectPair:
    """Indices of ``S**(2k+1)``.  Power 1 is excluded; use ``power_indices``."""
    k = _positive_int(k, "k")
    p = DefectPair.of(p)
    base = k * p.total()
    return DefectPair(base + p.n_plus, base + p.n_minus)


def power_indices(p, m: int) -> DefectPair:
    """Indices of ``S**m``, dispatching on the parity of ``m``."""
    m = _positive_int(m, "m")
    p = DefectPair.of(p)
    if m == 1:
        return p
    if m % 2 == 0:
        return even_power_indices(p, m // 2)
    return odd_power_indices(p, m // 2)


def polynomial_indices(p, poly) -> DefectPair:
    """Indices of ``P(S)`` for a real polynomial ``P`` of degree ``m >= 1``.

    Only the degree and the sign of the leading coefficient matter.  A
    negative leading coefficient swaps the pair, since ``n±(-A) = n∓(A)``.
    """
    coeffs = _coefficients_of(poly)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ValueError("polynomial must have degree at least 1")
    result = power_indices(p, len(coeffs) - 1)
    return result if coeffs[-1] > 0 else result.swap()


def _coefficients_of(poly) -> list:
    if hasattr(poly, "coefficients"):
        return list(poly.coefficients)
    return list(poly)


def direct_sum_indices(parts: Iterable) -> DefectPair:
    """Componentwise sum over a finite sequence of pairs.

    Infinite families are passed as their finite prefix; the remaining
    summands are assumed to be ``(0, 0)``.
    """
    total = DefectPair(0, 0)
    for part in parts:
        total = total + DefectPair.of(part)
    return total


def fredholm_index(c: FredholmClass) -> int | float:
    """``dim ker - dim coker`` in the extended integers (``±math.inf``)."""
    if c.kind == "none":
        raise ValueError("the index is undefined for a non semi-Fredholm operator")
    if not c.dim_ker.is_finite:
        return math.inf
    if not c.dim_coker.is_finite:
        return -math.inf
    return int(c.dim_ker) - int(c.dim_coker)


def index_of_product(i1, i2) -> int | float:
    """Index of a product from the indices of its factors."""
    for i in (i1, i2):
        if isinstance(i, float) and not math.isinf(i):
            raise TypeError(f"index must be an integer or ±inf, got {i!r}")
    if math.isinf(i1) and math.isinf(i2) and (i1 > 0) != (i2 > 0):
        raise ValueError("indices +inf and -inf cannot be combined")
    if math.isinf(i1) or math.isinf(i2):
        return i1 if math.isinf(i1) else i2
    return int(i1) + int(i2)


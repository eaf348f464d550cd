"""Index bookkeeping for the spherically decomposed perturbed Laplacian.

The channel expression is ``-d²/dr² + c/r²`` on ``(0, ∞)`` with
``c = ℓ(ℓ+n-2) - L(L+n-2)``.  Channels with ``ℓ ≤ L`` are limit circle at 0
and contribute ``(1, 1)``; the rest are limit point there and contribute
nothing.  Since infinitely many channels cannot be integrated, the tail
``ℓ > L + 2`` is certified by the closed form only.

The boundary parameter α is carried and range-checked but does not enter
the channel potential or the indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import sympy as sp

from .counts import DefectPair, direct_sum_indices, power_indices

__all__ = [
    "ChannelSpec",
    "ChannelRow",
    "DecompositionReport",
    "ChannelCheck",
    "channel_coefficient",
    "channel_indices",
    "decompose",
    "dirichlet_perturbation_indices",
    "dirichlet_report",
    "cross_validate_channels",
    "CROSS_VALIDATION_CASES",
]

ALPHA_MIN = Fraction(-1, 4)
ALPHA_MAX = Fraction(3, 4)


def _nonneg_int(v, name: str, minimum: int = 0) -> int:
    if isinstance(v, bool) or int(v) != v or v < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {v!r}")
    return int(v)


@dataclass(frozen=True)
class ChannelSpec:
    n: int
    ell: int
    L: int
    alpha: object = 0

    def __post_init__(self):
        object.__setattr__(self, "n", _nonneg_int(self.n, "dimension n", 2))
        object.__setattr__(self, "ell", _nonneg_int(self.ell, "ell"))
        object.__setattr__(self, "L", _nonneg_int(self.L, "L"))
        a = float(sp.sympify(self.alpha)) if isinstance(self.alpha, str) else float(self.alpha)
        if not ALPHA_MIN <= a < ALPHA_MAX:
            raise ValueError(f"alpha must lie in [-1/4, 3/4), got {self.alpha}")


def channel_coefficient(n: int, ell: int, L: int) -> int:
    """``ℓ(ℓ+n-2) - L(L+n-2)``, the numerator of the channel potential."""
    n = _nonneg_int(n, "dimension n", 2)
    ell = _nonneg_int(ell, "ell")
    L = _nonneg_int(L, "L")
    return ell * (ell + n - 2) - L * (L + n - 2)


def channel_indices(spec: ChannelSpec) -> DefectPair:
    return DefectPair(1, 1) if spec.ell <= spec.L else DefectPair(0, 0)


@dataclass(frozen=True)
class ChannelRow:
    ell: int
    coefficient: int
    indices: DefectPair


@dataclass(frozen=True)
class DecompositionReport:
    n: int
    L: int
    alpha: object
    channels: tuple
    tail_start: int
    total: DefectPair
    powers: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n, "L": self.L, "alpha": str(self.alpha),
            "channels": [{"ell": r.ell, "coefficient": r.coefficient,
                          "indices": r.indices.to_json()} for r in self.channels],
            "tail": {"from_ell": self.tail_start, "indices": [0, 0],
                     "certified": "closed form, ell > L"},
            "total": self.total.to_json(),
            "powers": {str(m): p.to_json() for m, p in sorted(self.powers.items())},
        }

    def table(self) -> str:
        lines = [f"n={self.n} L={self.L} alpha={self.alpha}",
                 f"{'ell':>5} {'c':>6} {'n±':>8}"]
        for r in self.channels:
            lines.append(f"{r.ell:>5} {r.coefficient:>6} {str(r.indices):>8}")
        lines.append(f"{'>=' + str(self.tail_start):>5} {'':>6} {'(0, 0)':>8}")
        lines.append(f"total {self.total}")
        for m, p in sorted(self.powers.items()):
            lines.append(f"power {m}: {p}")
        return "\n".join(lines)


def decompose(n: int, L: int, alpha=0, m_max: int = 1) -> DecompositionReport:
    """Channels ``ℓ = 0 .. L+2`` explicitly, the tail by the closed form, and powers."""
    m_max = _nonneg_int(m_max, "m_max", 1)
    base = ChannelSpec(n, 0, L, alpha)
    rows = []
    for ell in range(base.L + 3):
        spec = ChannelSpec(base.n, ell, base.L, alpha)
        rows.append(ChannelRow(ell, channel_coefficient(spec.n, ell, spec.L),
                               channel_indices(spec)))
    total = direct_sum_indices(r.indices for r in rows)
    expected = DefectPair(base.L + 1, base.L + 1)
    if total != expected:
        raise ArithmeticError(f"channel sum {total} differs from {expected}")
    powers = {m: power_indices(total, m) for m in range(1, m_max + 1)}
    return DecompositionReport(base.n, base.L, alpha, tuple(rows), base.L + 3, total, powers)


def dirichlet_perturbation_indices(m: int) -> DefectPair:
    """Indices of the ``m``-th power of the singularly perturbed Dirichlet Laplacian."""
    m = _nonneg_int(m, "m", 1)
    return power_indices(DefectPair(1, 1), m)


def dirichlet_report(m_max: int) -> list:
    """Index table for powers ``1..m_max`` with the kernel dimension of the adjoint."""
    rows = []
    for m in range(1, _nonneg_int(m_max, "m_max", 1) + 1):
        pair = dirichlet_perturbation_indices(m)
        rows.append({"m": m, "indices": pair.to_json(),
                     "adjoint_kernel_dimension": pair.n_plus.to_json()})
    return rows


# (n, L, ell): (n, L) in {2,3}x{0,1} and ell <= L+1
CROSS_VALIDATION_CASES = tuple((n, L, ell) for n in (2, 3) for L in (0, 1)
                               for ell in range(L + 2))


@dataclass(frozen=True)
class ChannelCheck:
    n: int
    L: int
    ell: int
    coefficient: int
    expected: DefectPair
    observed: DefectPair
    kind_at_zero: str
    kind_at_infinity: str

    @property
    def agree(self) -> bool:
        lc_expected = self.ell <= self.L
        return (self.expected == self.observed
                and (self.kind_at_zero == "limit_circle") == lc_expected
                and self.kind_at_infinity == "limit_point")


def cross_validate_channels(cases=CROSS_VALIDATION_CASES, alpha=0, controls=None) -> list:
    """Numeric classification of each channel expression against the closed form."""
    from .expressions import build_classical
    from .weyl import DEFAULT_CONTROLS, deficiency_report

    controls = controls or DEFAULT_CONTROLS
    out = []
    for n, L, ell in cases:
        expr = build_classical("bessel_channel", n=n, ell=ell, L=L, alpha=alpha)
        rep = deficiency_report(expr, controls)
        out.append(ChannelCheck(n, L, ell, channel_coefficient(n, ell, L),
                                channel_indices(ChannelSpec(n, ell, L, alpha)), rep.pair,
                                rep.plus[0].kind, rep.plus[1].kind))
    return out

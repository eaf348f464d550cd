"""Kernel counts of the Bessel-type expression near x = 1.

Run: python demos/limit3.py
"""
import sympy as sp

from deficiency.weyl import kernel_l2_report

for alpha in (1, 2, sp.Rational(5, 2), sp.sqrt(33) / 2, sp.Rational(7, 2)):
    for power, square in ((2, False), (4, False), (2, True)):
        rep = kernel_l2_report(power, alpha, square)
        label = "square" if square else f"power {power}"
        basis = ", ".join(f"{b}{'*log' * k}" for b, k in rep.basis)
        print(f"alpha={str(alpha):<12} {label:<8} count={rep.count}  exponents: {basis}")
    print()
# alpha = 7/2 lies outside [1, 3): the power-4 count drops to 2 and a warning is issued

"""Deficiency indices of the classical expressions with the evidence behind them.

Run: python demos/index_tables.py
"""
from deficiency import build_classical, deficiency_report, power_indices

CASES = [("legendre", {}), ("hermite", {}), ("laguerre", {"alpha": 0.5}),
         ("laguerre", {"alpha": 2}), ("bessel_gamma", {"gamma": 0.99}),
         ("jacobi", {"alpha": 0.5, "beta": 2})]

for name, params in CASES:
    rep = deficiency_report(build_classical(name, **params))
    a, b = rep.plus
    powers = [str(power_indices(rep.pair, m)) for m in (2, 3)]
    print(f"{name:<13} {str(params):<28} n± = {rep.pair}   "
          f"a: {a.kind} (d={a.d})  b: {b.kind} (d={b.d})   "
          f"CI width {rep.max_ci_width():.2g}   squares/cubes {', '.join(powers)}")

"""Where the roots of P(z) - iε go for small ε.

Run: python demos/halfplane.py
"""
import numpy as np

from deficiency import RealPolynomial, first_order_root_shift, halfplane_counts, track_roots
from deficiency.halfplane import safe_epsilon

p = RealPolynomial((0.0, -1.0, 0.0, 1.0))  # x³ - x
eps = safe_epsilon(p)
hc = halfplane_counts(p, eps, "plus")
print(f"x^3 - x, eps={eps:.3g}: {hc.in_upper} roots above, {hc.in_lower} below")
for z0 in (-1.0, 0.0, 1.0):
    errs = []
    for e in (1e-3, 5e-4):
        pred = first_order_root_shift(p, z0, e)
        true = [r for r in np.roots([1, 0, -1, -1j * e]) if abs(r - z0) < 0.1][0]
        errs.append(abs(true - pred))
    print(f"  root {z0:+.0f}: first-order error ratio when eps halves = {errs[0] / errs[1]:.3f}")

# at z0 = 0 the second derivative vanishes, so the error is O(eps^3) and the ratio is 8

track = track_roots(p, "plus", np.geomspace(1e-6, 1e-1, 12))
print("each root keeps its half-plane along the eps grid:", track.confined)
print("counts along the grid:", sorted({(c.in_upper, c.in_lower) for c in track.counts}))

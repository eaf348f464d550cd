"""The half-line expression with inverse-square-like decay, mapped to (0, 1).

Run: python demos/chaudhuri_everitt.py
"""
from deficiency import build_classical, liouville_green, transport_solution
from deficiency.weyl import classify_endpoint

lg = liouville_green()
print("t(x)      =", lg.t_of_x)
print("amplitude =", lg.amplitude)
print("Q(t)      =", lg.expression.coefficients[1].symbolic_form)
chain = lg.scaling
print(f"t(0) = {chain.t_at_zero:.3g}, t(inf) = {chain.t_at_infinity:.17g}")
print(f"rescaled to (0, 1): alpha = {chain.alpha}, spectral factor {chain.spectral_scale}")

tr = transport_solution()
print(f"transported solution: max relative residual {tr.max_residual:.2e}, "
      f"independent reintegration {tr.reintegration_error:.2e}")

ce = classify_endpoint(build_classical("chaudhuri_everitt"), "b")
be = classify_endpoint(build_classical("bessel_alpha", alpha=chain.alpha), "b")
print(f"x -> inf: {ce.kind};  s -> 1 after the transform: {be.kind}")

"""Deficiency indices of powers and polynomials of symmetric operators."""
from .channels import (ChannelSpec, DecompositionReport, channel_coefficient, channel_indices,
                       decompose, dirichlet_perturbation_indices)
from .counts import (INFINITY, DefectPair, ExtendedCount, FredholmClass, direct_sum_indices,
                     even_power_indices, fredholm_index, index_of_product, odd_power_indices,
                     polynomial_indices, power_indices, product_defect)
from .expressions import (CoefficientFunction, FunctionWithDerivatives,
                          QuasiDifferentialExpression, apply, bessel_kernel_exponents,
                          build_classical, compose_square, kernel_function, power_expansion,
                          quasi_derivatives)
from .halfplane import (HalfPlaneCount, RealPolynomial, RootSet, find_roots,
                        first_order_root_shift, halfplane_counts, make_simple, track_roots)
from .liouville import chaudhuri_everitt_chain, liouville_green, transport_solution
from .stirling import jacobi_stirling, legendre_stirling, stirling2, stirling_table
from .weyl import (Endpoint, classify_endpoint, deficiency_indices_minimal, deficiency_report,
                   generalized_boundary_values, integrate_toward_endpoint, kernel_l2_count,
                   l2_test)

__version__ = "0.1.0"

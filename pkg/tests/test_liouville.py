import math

import numpy as np
import pytest
import sympy as sp

from deficiency import build_classical, chaudhuri_everitt_chain, liouville_green, transport_solution
from deficiency.expressions import X
from deficiency.liouville import liouville_transform


@pytest.fixture(scope="module")
def chain():
    return chaudhuri_everitt_chain()


def test_endpoint_map(chain):
    assert abs(chain.t_at_zero) <= 1e-10
    assert abs(chain.t_at_infinity - math.sqrt(6)) <= 1e-10


def test_chain_constants(chain):
    assert chain.alpha == sp.sqrt(33) / 2
    assert chain.spectral_scale == 6
    assert chain.exact
    s = sp.Symbol("s", positive=True)
    assert sp.simplify(chain.scaled_potential - 8 / (1 - s) ** 2) == 0


def test_transform_identity_free():
    # constant coefficients: t = x and no potential
    lt = liouville_transform(build_classical("free"))
    assert lt.identity_residual == 0
    assert sp.simplify(lt.t_of_x - X) == 0
    assert lt.potential == 0


def test_transform_rejects_higher_order():
    with pytest.raises(ValueError):
        liouville_transform(build_classical("bessel4_alpha", alpha=2))


def test_liouville_green_normal_form():
    lg = liouville_green()
    assert sp.simplify(lg.t_of_x - sp.sqrt(6) * X / (X + 1)) == 0
    assert sp.simplify(lg.amplitude - 6 ** sp.Rational(3, 4) * (X + 1) / 6) == 0
    e = lg.expression
    assert e.interval == pytest.approx((0.0, math.sqrt(6)))
    assert e.endpoint_kinds == ("regular", "singular")
    q = e.coefficients[1].symbolic_form
    assert sp.simplify(q - 8 / (X - sp.sqrt(6)) ** 2) == 0


def test_liouville_green_rejects_other_sources():
    with pytest.raises(ValueError):
        liouville_green(build_classical("free"))


def test_normal_form_potential_by_hand():
    # t = √6 x/(x+1) inverts to x = t/(√6 - t); substitute into Q(x) independently
    ce = build_classical("chaudhuri_everitt")
    lt = liouville_transform(ce, 0.0)
    for t in (0.3, 1.0, 2.0, 2.4):
        x = t / (math.sqrt(6) - t)
        q = float(lt.potential.subs(X, x))
        assert q == pytest.approx(8 / (t - math.sqrt(6)) ** 2, rel=1e-12)


def test_transport_residual():
    tr = transport_solution()
    assert tr.max_residual <= 1e-6
    assert tr.reintegration_error <= 1e-6
    assert np.all(np.diff(tr.s) > 0) and tr.s[-1] < 1


@pytest.mark.parametrize("z,initial", [(2j, (0.0, 1.0)), (-1j, (1.0, 1.0))])
def test_transport_other_data(z, initial):
    assert transport_solution(z, initial=initial).max_residual <= 1e-6

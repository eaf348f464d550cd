import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from deficiency.halfplane import (AmbiguousTrackingError, RealPolynomial, find_roots,
                                  first_order_root_shift, halfplane_counts, lemma_prediction,
                                  make_simple, safe_epsilon, track_roots)

T2M1 = RealPolynomial((-1, 0, 1))
T3MT = RealPolynomial((0, -1, 0, 1))


def test_find_roots_examples():
    assert np.allclose(find_roots(T2M1).roots, [-1, 1])
    assert np.allclose(sorted(find_roots(RealPolynomial((1, 0, 1))).roots, key=np.imag),
                       [-1j, 1j])
    rs = find_roots(T3MT.perturbed(1e-3, "plus"))
    assert len(rs) == 3 and rs.residual_bound <= 1e-12
    c = T3MT.perturbed(1e-3, "plus")
    assert np.max(np.abs(np.polyval(c[::-1], rs.roots))) <= 1e-12


def test_root_at_zero_has_finite_residual():
    assert find_roots(T3MT).residual_bound < 1e-14


def test_halfplane_examples():
    assert halfplane_counts(T2M1, 1e-3, "plus").as_tuple() == (1, 1, 0)
    assert halfplane_counts(RealPolynomial((0, 1)), 1e-3, "plus").as_tuple() == (1, 0, 0)
    assert halfplane_counts(T3MT, 1e-3, "plus").as_tuple() == (2, 1, 0)
    assert halfplane_counts(T3MT, 1e-3, "minus").as_tuple() == (1, 2, 0)
    with pytest.raises(ValueError):
        halfplane_counts(T2M1, 0.0)


def test_lemma_prediction():
    assert lemma_prediction(4) == (2, 2)
    assert lemma_prediction(3, "plus") == (2, 1)
    assert lemma_prediction(3, "minus") == (1, 2)


def test_first_order_shift_examples():
    assert first_order_root_shift(T2M1, 1.0, 1e-3) == pytest.approx(1 + 0.0005j, abs=1e-15)
    assert first_order_root_shift(RealPolynomial((0, 1)), 0.0, 0.25) == 0.25j
    assert first_order_root_shift(T3MT, -1.0, 1e-3) == pytest.approx(-1 + 0.0005j, abs=1e-15)
    with pytest.raises(ValueError):
        first_order_root_shift(T2M1, 0.5, 1e-3)
    with pytest.raises(ValueError):
        first_order_root_shift(RealPolynomial((0, 0, 1)), 0.0, 1e-3)


def test_derivative_signs_alternate():
    # sgn P'(z_k) = (-1)^(k-1) counting real roots from the right
    p = RealPolynomial.from_roots([-2.0, -0.5, 1.0, 3.0, 4.5])
    roots = np.sort(find_roots(p).roots.real)[::-1]
    signs = np.sign(p.eval_derivative(roots).real)
    assert list(signs) == [(-1) ** k for k in range(5)]


def test_make_simple_examples():
    q, c = make_simple(RealPolynomial((0, 0, 1)))
    assert c != 0
    r = find_roots(q).roots
    assert abs(r[0] - r[1]) > 1e-6
    assert make_simple(T2M1) == (T2M1, 0.0)
    q, c = make_simple(RealPolynomial.from_roots([1, 1, -1]))
    r = find_roots(q).roots
    d = np.abs(r[:, None] - r[None, :]) + np.eye(3)
    assert np.min(d) > 1e-6 and c != 0


def test_track_roots_examples():
    rep = track_roots(T2M1, "plus", [1e-3, 1e-1, 1, 10])
    assert rep.confined and len(rep.paths) == 2
    rep = track_roots(RealPolynomial((0, 1)), "plus", [0.1, 2.0, 50.0])
    assert rep.halfplanes == [["upper"] * 3]
    grid = [2.0 ** k for k in range(-10, 7)] + [100.0]
    rep = track_roots(RealPolynomial((4, 0, -5, 0, 1)), "plus", grid)
    assert rep.confined
    assert all((c.in_upper, c.in_lower) == (2, 2) for c in rep.counts)


def test_track_roots_rejects_bad_grids():
    with pytest.raises(ValueError):
        track_roots(T2M1, "plus", [])
    with pytest.raises(ValueError):
        track_roots(T2M1, "plus", [1.0, 0.5])
    with pytest.raises(AmbiguousTrackingError):
        # one jump from clustered roots to roots of modulus 10
        track_roots(RealPolynomial((0, -1e-9, 0, 1)), "plus", [1e-12, 1e3])


def test_polynomial_validation():
    with pytest.raises(ValueError):
        RealPolynomial((1.0,))
    with pytest.raises(ValueError):
        RealPolynomial((1.0, float("nan")))
    assert RealPolynomial((1, 2, 0, 0)).degree == 1


# subnormal coefficients lose the relative accuracy the residual test relies on
coeff_lists = st.lists(st.floats(-5, 5, allow_nan=False, allow_subnormal=False),
                       min_size=2, max_size=13).filter(
    lambda c: abs(c[-1]) > 1e-2)


@given(coeff_lists)
def test_companion_oracle(c):
    rs = find_roots(RealPolynomial(tuple(c)))
    ref = np.roots(c[::-1])
    cost = np.abs(rs.roots[:, None] - ref[None, :])
    rows, cols = linear_sum_assignment(cost)
    scale = max(1.0, float(np.max(np.abs(ref))))
    # matched roots agree; clustered roots are ill-conditioned in either method
    assert np.max(cost[rows, cols]) <= 1e-8 * scale or _clustered(ref)


def _clustered(r):
    d = np.abs(r[:, None] - r[None, :]) + np.eye(len(r)) * 1e9
    return np.min(d) < 1e-3


@given(coeff_lists, st.sampled_from(["plus", "minus"]))
def test_conjugation_symmetry(c, sign):
    c = list(c)
    c[-1] = abs(c[-1])
    p, _ = make_simple(RealPolynomial(tuple(c)))
    eps = safe_epsilon(p)
    other = "minus" if sign == "plus" else "plus"
    assert halfplane_counts(p, eps, sign) == halfplane_counts(p, eps, other).swap()


@given(coeff_lists)
def test_lemma_counts(c):
    c = list(c)
    c[-1] = abs(c[-1])
    p, _ = make_simple(RealPolynomial(tuple(c)))
    eps = safe_epsilon(p)
    for sign in ("plus", "minus"):
        h = halfplane_counts(p, eps, sign)
        assert (h.in_upper, h.in_lower, h.on_axis) == (*lemma_prediction(p.degree, sign), 0)


@given(st.lists(st.floats(-4, 4, allow_nan=False), min_size=1, max_size=7, unique=True))
def test_shift_error_is_second_order(roots):
    roots = sorted(roots)
    if len(roots) > 1 and np.min(np.diff(roots)) < 0.05:
        return
    p = RealPolynomial.from_roots(roots)
    eps = safe_epsilon(p)
    z0 = roots[-1]
    errs = []
    for e in (eps, eps / 2):
        pred = first_order_root_shift(p, z0, e)
        true = find_roots(p.perturbed(e, "plus")).roots
        errs.append(np.min(np.abs(true - pred)))
    if errs[1] > 1e-11:
        assert 2.0 <= errs[0] / errs[1] <= 8.0

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deficiency.stirling import (GammaPoleError, jacobi_stirling, legendre_stirling,
                                 recurrence_table, stirling2, stirling_table)


def _classical_recurrence(m_max):
    # independent of the package: build S(m, j) row by row
    rows = {1: [0, 1]}
    for m in range(2, m_max + 1):
        prev = rows[m - 1] + [0]
        rows[m] = [0] + [j * prev[j] + prev[j - 1] for j in range(1, m + 1)]
    return rows


def test_stirling2_examples():
    assert stirling2(1, 1) == 1
    assert stirling2(3, 2) == 3
    assert stirling2(2, 3) == 0


def test_legendre_stirling_examples():
    assert legendre_stirling(1, 1) == 1
    assert legendre_stirling(2, 1) == 2
    assert legendre_stirling(2, 2) == 1


def test_jacobi_stirling_examples():
    assert jacobi_stirling(1, 1, 0, 0) == 1
    # the j=2 entry at alpha=beta=0 is the Legendre value, pinned by the m-fold oracle
    assert jacobi_stirling(2, 2, 0, 0) == 1
    assert jacobi_stirling(2, 1, 0, 0) == 2
    with pytest.raises(GammaPoleError) as info:
        jacobi_stirling(2, 2, Fraction(-3), Fraction(-1, 1))
    assert info.value.r == 1


def test_known_rows():
    assert [stirling2(5, j) for j in range(1, 6)] == [1, 15, 25, 10, 1]
    assert [legendre_stirling(3, j) for j in range(1, 4)] == [4, 8, 1]


def test_classical_against_independent_recurrence():
    rows = _classical_recurrence(20)
    for m in range(1, 21):
        assert [stirling2(m, j) for j in range(1, m + 1)] == rows[m][1:]


def test_recurrence_tables_match_sums():
    for (m, j), v in recurrence_table("classical", 20).items():
        assert stirling2(m, j) == v
    for (m, j), v in recurrence_table("legendre", 15).items():
        assert legendre_stirling(m, j) == v
    with pytest.raises(ValueError):
        recurrence_table("jacobi", 3)


def test_jacobi_reduces_to_legendre():
    for m in range(1, 12):
        for j in range(1, m + 1):
            assert jacobi_stirling(m, j, 0, 0) == legendre_stirling(m, j)


def test_float_path_is_approximate_and_close():
    exact = jacobi_stirling(5, 3, Fraction(1, 2), Fraction(1, 3))
    approx = jacobi_stirling(5, 3, 0.5, 1 / 3)
    assert isinstance(approx, mpmath.mpf)
    assert abs(float(approx) - float(exact)) < 1e-12 * abs(float(exact))


def test_exact_beyond_double_precision():
    # entries past 2**53 are not representable as floats; the sums stay exact
    v = stirling2(30, 15)
    assert v.denominator == 1 and v > 2 ** 53
    assert int(float(v)) != v.numerator


def test_tables():
    t = stirling_table("legendre", 6)
    assert t.exact and t.row(3) == [4, 8, 1]
    assert all(v.denominator == 1 and v >= 0 for v in t.entries.values())
    t = stirling_table("jacobi", 4, Fraction(1, 2), 2)
    assert t.exact and len(t.entries) == 10
    assert not stirling_table("jacobi", 2, 0.25, 0.5).exact
    with pytest.raises(ValueError):
        stirling_table("bernoulli", 3)


def test_invalid_indices():
    with pytest.raises(ValueError):
        stirling2(0, 1)
    with pytest.raises(ValueError):
        legendre_stirling(2, 0)


@given(st.integers(1, 25), st.integers(1, 25))
def test_classical_values_are_nonnegative_integers(m, j):
    v = stirling2(m, j)
    assert v.denominator == 1 and v >= 0
    assert (v == 0) == (j > m)


@given(st.integers(2, 18), st.integers(1, 18))
def test_legendre_recurrence(m, j):
    v = legendre_stirling(m, j)
    assert v.denominator == 1 and v >= 0
    prev = legendre_stirling(m - 1, j) if j <= m - 1 else 0
    prev_j = legendre_stirling(m - 1, j - 1) if j > 1 else 0
    assert v == j * (j + 1) * prev + prev_j


@given(st.integers(1, 8), st.fractions(-Fraction(9, 10), 5, max_denominator=12),
       st.fractions(-Fraction(9, 10), 5, max_denominator=12))
def test_jacobi_last_entry_is_one(m, a, b):
    assert jacobi_stirling(m, m, a, b) == 1

import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from cstnet.linalg import (
    ExactMatrix,
    SignPattern,
    batched_minors,
    det,
    in_column_span,
    minor,
    minor_sign_set,
    nullspace,
    rank,
    rref,
    subsets,
    term_signs,
    to_exact,
)

small = st.integers(-4, 4)


def matrices(rows=st.integers(1, 4), cols=st.integers(1, 4), entries=small):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(entries, min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0])
    )


def square(n_max=5, entries=small):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n)
    )


def test_to_exact():
    assert to_exact(3) == 3 and isinstance(to_exact(3), int)
    assert to_exact("3/2") == Fraction(3, 2)
    assert to_exact(0.5) == Fraction(1, 2)
    assert to_exact(Fraction(4, 2)) == 2
    with pytest.raises((TypeError, ValueError)):
        to_exact(float("nan"))


def test_basic_shapes_and_ops():
    A = ExactMatrix([[1, 2], [3, 4]])
    assert A.shape == (2, 2) and A.is_integer
    assert A.T.tolist() == [[1, 3], [2, 4]]
    assert (A @ ExactMatrix.identity(2)) == A
    assert (A - A) == ExactMatrix.zeros(2, 2)
    assert A.scale(Fraction(1, 2))[0, 1] == 1
    assert A.apply([1, 1]) == (3, 7)
    assert A.select([1], [0]).tolist() == [[3]]
    assert ExactMatrix.diag([1, 2]).tolist() == [[1, 0], [0, 2]]


def test_worked_examples():
    assert det(ExactMatrix([[1, 2], [3, 4]])) == -2
    assert rank(ExactMatrix([[1, -1], [-1, 1]])) == 1
    assert minor(ExactMatrix([[2, 1], [1, 0]]), [0], [1]) == 1
    assert minor(ExactMatrix([[1]]), [], []) == 1
    assert det(ExactMatrix([[Fraction(1, 2), 1], [1, 2]])) == 0


def test_minor_errors():
    A = ExactMatrix([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        minor(A, [0], [0, 1])
    with pytest.raises(IndexError):
        minor(A, [0, 5], [0, 1])


@given(square())
def test_det_matches_sympy(rows):
    assert det(ExactMatrix(rows)) == sympy.Matrix(rows).det()


@given(square(4, st.fractions(min_value=-3, max_value=3, max_denominator=5)))
def test_det_rational_matches_sympy(rows):
    expected = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows]).det()
    assert det(ExactMatrix(rows)) == Fraction(int(expected.p), int(expected.q))


@given(matrices())
def test_rank_matches_sympy(rows):
    assert rank(ExactMatrix(rows)) == sympy.Matrix(rows).rank()


@given(matrices())
def test_rank_transpose_invariant(rows):
    A = ExactMatrix(rows)
    assert rank(A) == rank(A.T)


@given(matrices())
def test_rref_and_nullspace(rows):
    A = ExactMatrix(rows)
    R, pivots = rref(A)
    assert len(pivots) == rank(A)
    basis = nullspace(A)
    assert len(basis) == A.cols - rank(A)
    for v in basis:
        assert all(x == 0 for x in A.apply(v))


@given(matrices(), st.lists(small, min_size=4, max_size=4))
def test_column_span(rows, coeffs):
    A = ExactMatrix(rows)
    v = A.apply(coeffs[: A.cols])
    assert in_column_span(A, v)
    # a vector is outside the span iff appending it raises the rank
    w = tuple(x + 1 for x in v)
    assert in_column_span(A, w) == (rank(A.hstack(ExactMatrix([[x] for x in w]))) == rank(A))


@given(matrices(st.integers(1, 5), st.integers(1, 6)), st.integers(1, 4))
def test_batched_minors_agree_with_single(rows, k):
    A = ExactMatrix(rows)
    k = min(k, A.rows, A.cols)
    rs, cs = subsets(A.rows, k), subsets(A.cols, k)
    got = batched_minors(A, rs, cs)
    assert got == [[minor(A, a, b) for b in cs] for a in rs]


def test_batched_minors_overflow_fallback():
    big = 10**12
    A = ExactMatrix([[big, 1, 2], [3, big, 5], [7, 8, big]])
    rs = cs = subsets(3, 3)
    assert batched_minors(A, rs, cs)[0][0] == det(A) == sympy.Matrix(A.tolist()).det()


def test_subsets_are_lexicographic():
    assert subsets(4, 2) == list(itertools.combinations(range(4), 2))
    assert subsets(3, 0) == [()]


@given(matrices(st.integers(1, 3), st.integers(1, 3), st.integers(-2, 2)))
def test_sign_set_contains_actual_sign(rows):
    A = ExactMatrix(rows)
    P = SignPattern.of(A)
    k = min(A.rows, A.cols)
    for a in subsets(A.rows, k):
        for b in subsets(A.cols, k):
            possible = minor_sign_set(P, a, b)
            m = minor(A, a, b)
            assert (m > 0) - (m < 0) in possible
            terms = term_signs(P, a, b)
            if not terms:
                assert possible == frozenset({0})
            elif len(set(terms)) == 1:
                assert possible == frozenset({terms[0]})
            else:
                assert possible == frozenset({-1, 0, 1})

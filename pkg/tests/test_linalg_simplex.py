from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfdiv import linalg
from surfdiv.errors import PreconditionError
from surfdiv.scalars import QuadScalar
from surfdiv.simplex import feasibility

small = st.integers(min_value=-6, max_value=6)


def test_solve_and_inverse():
    a = [[2, 1], [1, 3]]
    x = linalg.solve(a, [3, 5])
    assert x == [Fraction(4, 5), Fraction(7, 5)]
    assert linalg.matmul(a, linalg.inverse(a)) == linalg.identity(2)
    with pytest.raises(PreconditionError):
        linalg.solve([[1, 2], [2, 4]], [1, 1])


def test_negative_definite_cartan():
    assert linalg.is_negative_definite([[-2, 1], [1, -2]])
    assert not linalg.is_negative_definite([[-2, 2], [2, -2]])
    assert linalg.leading_minors([[-2, 1], [1, -2]]) == [-2, 3]


def test_integer_kernel_is_saturated():
    k = linalg.integer_kernel([[2, 4, 6]], 3)
    assert len(k) == 2
    for v in k:
        assert 2 * v[0] + 4 * v[1] + 6 * v[2] == 0
    # (1, 1, -1) has gcd 1 and lies in the kernel: it must be an integer combination
    coeffs = linalg.solve_in_span(k, [1, 1, -1])
    assert all(Fraction(c).denominator == 1 for c in coeffs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=2))
def test_integer_kernel_property(rows):
    k = linalg.integer_kernel(rows, 4)
    assert len(k) == 4 - linalg.rank(rows)
    for v in k:
        assert all(linalg.dot(r, v) == 0 for r in rows)
    if k:
        # saturation: the kernel lattice has gcd of maximal minors 1 (checked via HNF rows being primitive)
        assert linalg.rank(k) == len(k)


def test_simplex_feasible_and_farkas():
    cols = [[1, 0], [1, 1]]
    res = feasibility(cols, [3, 1])
    assert res.feasible and res.x == [2, 1]
    res = feasibility(cols, [-1, 0])
    assert not res.feasible
    y = res.farkas
    assert all(linalg.dot(y, c) >= 0 for c in cols) and linalg.dot(y, [-1, 0]) < 0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=6), st.lists(small, min_size=3, max_size=3))
def test_simplex_answers_are_certified(cols, b):
    res = feasibility(cols, b)
    if res.feasible:
        assert all(x >= 0 for x in res.x)
        total = [sum(x * c[i] for x, c in zip(res.x, cols)) for i in range(3)]
        assert total == [Fraction(v) for v in b]
    else:
        assert all(linalg.dot(res.farkas, c) >= 0 for c in cols)
        assert linalg.dot(res.farkas, b) < 0


def test_simplex_over_quadratic_field():
    r = QuadScalar.sqrt(2)
    res = feasibility([[1, 0], [0, 1]], [r, 1 - r])
    assert not res.feasible
    res = feasibility([[1, 0], [0, 1]], [r, 2 - r])
    assert res.feasible and res.x[0] == r

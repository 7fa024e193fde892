import random
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfdiv.errors import RadicandError
from surfdiv.scalars import QuadScalar, fmt, is_squarefree, sqrt_convergents

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=40)
radicands = st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13])


def test_fraction_normalization():
    x = Fraction(6, -4)
    assert (x.numerator, x.denominator) == (-3, 2)


def test_quad_basic_arithmetic():
    r = QuadScalar.sqrt(2)
    assert r * r == 2
    assert (1 - r) * (1 - r) == QuadScalar(3, -2, 2)
    assert (3 - 2 * r) * (3 - 2 * r) == QuadScalar(17, -12, 2)
    assert (7 - 5 * r) * (7 - 5 * r) == QuadScalar(99, -70, 2)
    assert (r + 1) / (r - 1) == 3 + 2 * r


def test_quad_sign_near_zero():
    # 99 - 70 sqrt 2 is about 0.00505; 577 - 408 sqrt 2 about 0.00087
    assert QuadScalar(99, -70, 2) > 0
    assert QuadScalar(577, -408, 2) > 0
    assert QuadScalar(-577, 408, 2) < 0
    assert QuadScalar(0, 0, 2).sign() == 0


def test_mixed_radicands_rejected():
    with pytest.raises(RadicandError):
        QuadScalar.sqrt(2) + QuadScalar.sqrt(3)


def test_squarefree():
    assert is_squarefree(2) and is_squarefree(6) and not is_squarefree(8)


def test_convergents_of_sqrt2():
    it = sqrt_convergents(2)
    assert [next(it) for _ in range(5)] == [Fraction(1), Fraction(3, 2), Fraction(7, 5), Fraction(17, 12), Fraction(41, 29)]


def test_fmt():
    assert fmt(Fraction(-3, 4)) == "-3/4"
    assert fmt(Fraction(5)) == "5"
    assert fmt(QuadScalar(3, -2, 2)) == "3-2*sqrt(2)"
    assert fmt(QuadScalar(0, 1, 2)) == "1*sqrt(2)"


def _decimal_sign(a, b, d):
    getcontext().prec = 100
    approx = Decimal(a.numerator) / Decimal(a.denominator) + Decimal(b.numerator) / Decimal(b.denominator) * Decimal(d).sqrt()
    if approx.copy_abs() <= Decimal(10) ** -80:
        return 0
    return 1 if approx > 0 else -1


@settings(max_examples=300, deadline=None)
@given(rationals, rationals, radicands)
def test_sign_agrees_with_100_digit_arithmetic(a, b, d):
    assert QuadScalar(a, b, d).sign() == _decimal_sign(a, b, d)


def test_sign_ten_thousand_random_inputs():
    rng = random.Random(7)
    for _ in range(10_000):
        d = rng.choice([2, 3, 5, 7])
        # include Pell-like near-cancellations
        q, p = rng.choice([(1, 1), (3, 2), (7, 5), (17, 12), (41, 29), (99, 70), (239, 169)])
        if d == 2 and rng.random() < 0.3:
            a, b = Fraction(q * q + 2 * p * p), Fraction(-2 * p * q)
        else:
            a = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 1000))
            b = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 1000))
        assert QuadScalar(a, b, d).sign() == _decimal_sign(a, b, d)


@settings(max_examples=300, deadline=None)
@given(rationals, rationals, rationals, rationals, radicands)
def test_field_axioms(a, b, c, e, d):
    x, y = QuadScalar(a, b, d), QuadScalar(c, e, d)
    assert x + y == y + x
    assert x * y == y * x
    assert (x - y) + y == x
    if y != 0:
        assert (x / y) * y == x
    assert y * y.conjugate() == y.norm()

"""Exact scalars: rationals (``fractions.Fraction``) and real quadratic numbers.

All comparisons are decided exactly. A :class:`QuadScalar` ``a + b*sqrt(d)``
never touches floating point when its sign is needed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Iterator, Union

from .errors import RadicandError

Rational = Fraction
Scalar = Union[int, Fraction, "QuadScalar"]


def is_squarefree(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@total_ordering
class QuadScalar:
    """An element ``a + b*sqrt(d)`` of the real quadratic field Q(sqrt(d))."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 2):
        if not is_squarefree(d):
            raise ValueError(f"radicand {d} is not a square-free integer > 1")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    @classmethod
    def sqrt(cls, d: int) -> "QuadScalar":
        return cls(0, 1, d)

    def _coerce(self, other) -> "QuadScalar | None":
        if isinstance(other, QuadScalar):
            if other.d != self.d:
                raise RadicandError(f"cannot mix sqrt({self.d}) with sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadScalar(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadScalar(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadScalar(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadScalar(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadScalar(
            self.a * o.a + self.b * o.b * self.d, self.a * o.b + self.b * o.a, self.d
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadScalar":
        return QuadScalar(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        num = self * o.conjugate()
        return QuadScalar(num.a / n, num.b / n, self.d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 against b^2 d
        lhs = self.a * self.a
        rhs = self.b * self.b * self.d
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def __eq__(self, other):
        if isinstance(other, QuadScalar):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadScalar({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt({self.d})"
        op = "+" if self.b > 0 else "-"
        return f"{self.a} {op} {abs(self.b)}*sqrt({self.d})"


def sign(x: Scalar) -> int:
    if isinstance(x, QuadScalar):
        return x.sign()
    return (x > 0) - (x < 0)


def radicand_of(values) -> int | None:
    """The common radicand of an iterable of scalars, or None if all rational."""
    d = None
    for v in values:
        if isinstance(v, QuadScalar):
            if d is None:
                d = v.d
            elif d != v.d:
                raise RadicandError(f"cannot mix sqrt({d}) with sqrt({v.d})")
    return d


def rational_part(x: Scalar) -> Fraction:
    return x.a if isinstance(x, QuadScalar) else Fraction(x)


def irrational_part(x: Scalar) -> Fraction:
    return x.b if isinstance(x, QuadScalar) else Fraction(0)


def sqrt_convergents(d: int) -> Iterator[Fraction]:
    """Continued-fraction convergents of sqrt(d), alternating around the root."""
    a0 = math.isqrt(d)
    if a0 * a0 == d:
        raise ValueError(f"{d} is a perfect square")
    m, q, a = 0, 1, a0
    h_prev, h = 1, a0
    k_prev, k = 0, 1
    yield Fraction(h, k)
    while True:
        m = q * a - m
        q = (d - m * m) // q
        a = (a0 + m) // q
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        yield Fraction(h, k)


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    return Fraction(text)


def fmt(x: Scalar) -> str:
    """Canonical text form used in reports and certificates ("p/q")."""
    if isinstance(x, QuadScalar):
        if x.b == 0:
            return fmt(x.a)
        root = f"{fmt(abs(x.b))}*sqrt({x.d})"
        if x.a == 0:
            return root if x.b > 0 else "-" + root
        return f"{fmt(x.a)}{'+' if x.b > 0 else '-'}{root}"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def lcm_denominator(values) -> int:
    m = 1
    for v in values:
        m = math.lcm(m, Fraction(v).denominator)
    return m

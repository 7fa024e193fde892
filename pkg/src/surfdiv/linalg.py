"""Exact dense linear algebra over ordered fields and over the integers.

Matrices are lists of rows. Entries may be ``int``, ``Fraction`` or
``QuadScalar``; nothing here ever converts to float.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .errors import PreconditionError


def _exact(x):
    return Fraction(x) if isinstance(x, int) else x


def zeros(m: int, n: int):
    return [[Fraction(0)] * n for _ in range(m)]


def identity(n: int):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def dot(u, v):
    total = 0
    for x, y in zip(u, v):
        if x and y:
            total = total + x * y
    return Fraction(total) if isinstance(total, int) else total


def matmul(a, b):
    bt = transpose(b)
    return [[dot(row, col) for col in bt] for row in a]


def matvec(a, v):
    return [dot(row, v) for row in a]


def solve(a: Sequence[Sequence], b: Sequence):
    """Solve the square system ``a x = b`` by Gauss-Jordan elimination."""
    n = len(a)
    m = [[_exact(x) for x in row] + [_exact(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise PreconditionError("singular system")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def inverse(a):
    n = len(a)
    cols = [solve(a, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return transpose(cols)


def det(a) -> Fraction:
    n = len(a)
    m = [list(map(Fraction, row)) for row in a]
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = -result
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] / p
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return result


def leading_minors(a) -> list[Fraction]:
    return [det([row[:k] for row in a[:k]]) for k in range(1, len(a) + 1)]


def is_negative_definite(a) -> bool:
    """Sylvester's criterion: leading minors alternate in sign, starting negative."""
    return all((d < 0) if k % 2 == 0 else (d > 0) for k, d in enumerate(leading_minors(a)))


def rank(rows) -> int:
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            if m[i][col] != 0:
                f = m[i][col] / m[r][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    return r


def solve_in_span(basis_rows, v):
    """Coordinates x with ``sum x_i basis_rows[i] = v``; basis rows independent."""
    k = len(basis_rows)
    n = len(v)
    # normal equations over Q are exact since the rows are independent
    gram = [[dot(basis_rows[i], basis_rows[j]) for j in range(k)] for i in range(k)]
    rhs = [dot(basis_rows[i], v) for i in range(k)]
    x = solve(gram, rhs)
    back = [sum((x[i] * basis_rows[i][c] for i in range(k)), Fraction(0)) for c in range(n)]
    if back != list(v):
        raise PreconditionError("vector does not lie in the span")
    return x


def left_inverse(basis_rows):
    """Matrix sending a vector in the span of the rows to its coordinates."""
    gram = [[dot(a, b) for b in basis_rows] for a in basis_rows]
    return matmul(inverse(gram), [list(r) for r in basis_rows])


# --- integer lattices ---------------------------------------------------------


def clear_denominators(row) -> list[int]:
    m = 1
    for x in row:
        m = lcm(m, Fraction(x).denominator)
    return [int(Fraction(x) * m) for x in row]


def primitive(row) -> list[int]:
    ints = clear_denominators(row)
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return ints
    return [x // g for x in ints]


def integer_kernel(rows, n: int) -> list[list[int]]:
    """Basis of the saturated lattice ``{v in Z^n : rows . v = 0}``.

    Unimodular column reduction of the (denominator-cleared) rows; the
    untouched columns of the transform span the kernel. The result is put in
    row Hermite normal form so it is canonical.
    """
    mat = [clear_denominators(r) for r in rows]
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    p = 0
    for row in mat:
        if p >= n:
            break
        while True:
            w = [sum(row[i] * u[i][j] for i in range(n)) for j in range(n)]
            nz = [j for j in range(p, n) if w[j] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: (abs(w[j]), j))
            done = True
            for j in nz:
                if j == jmin:
                    continue
                q = w[j] // w[jmin]
                for i in range(n):
                    u[i][j] -= q * u[i][jmin]
                if w[j] - q * w[jmin] != 0:
                    done = False
            if done:
                for i in range(n):
                    u[i][p], u[i][jmin] = u[i][jmin], u[i][p]
                p += 1
                break
    kernel = [[u[i][j] for i in range(n)] for j in range(p, n)]
    return hnf_rows(kernel)


def hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix (zero rows dropped)."""
    a = [list(r) for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    r = 0
    for col in range(ncols):
        if r >= len(a):
            break
        while True:
            nz = [i for i in range(r, len(a)) if a[i][col] != 0]
            if not nz:
                break
            imin = min(nz, key=lambda i: (abs(a[i][col]), i))
            a[r], a[imin] = a[imin], a[r]
            clean = True
            for i in range(r + 1, len(a)):
                if a[i][col] != 0:
                    q = a[i][col] // a[r][col]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][col] != 0:
                        clean = False
            if clean:
                break
        if r < len(a) and a[r][col] != 0:
            if a[r][col] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                q = a[i][col] // a[r][col]
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
            r += 1
    return [row for row in a if any(row)]


def is_unimodular_change(basis_a, basis_b) -> bool:
    """True iff two integer bases span the same lattice."""
    return hnf_rows(basis_a) == hnf_rows(basis_b)

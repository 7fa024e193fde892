"""Exact Phase-I simplex for cone-membership feasibility.

Works over any exactly ordered field (``Fraction`` or ``QuadScalar``).
Bland's smallest-index rule prevents cycling. An infeasible system comes back
with a Farkas vector ``y`` such that ``y.A_j >= 0`` for every column and
``y.b < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class Feasibility:
    feasible: bool
    x: list | None = None
    farkas: list | None = None
    pivots: int = 0


def feasibility(columns: Sequence[Sequence], b: Sequence, max_pivots: int = 100_000) -> Feasibility:
    """Decide whether ``b = sum x_j columns[j]`` has a solution with ``x >= 0``."""
    if all(isinstance(v, (int, Fraction)) for v in b) and all(
        isinstance(v, (int, Fraction)) for col in columns for v in col
    ):
        return _integer_feasibility(columns, b, max_pivots)
    return _field_feasibility(columns, b, max_pivots)


def _integer_feasibility(columns, b, max_pivots) -> Feasibility:
    """Same algorithm on a fraction-free tableau (integer pivoting).

    Each row is scaled to integers; all rows then share one implicit
    denominator ``det``, and the pivot update divides exactly by the previous
    pivot.
    """
    m = len(b)
    n = len(columns)
    if m == 0:
        return Feasibility(True, [Fraction(0)] * n)
    signs = [(-1 if bi < 0 else 1) for bi in b]
    scales = []
    rows = []
    for i in range(m):
        entries = [Fraction(columns[j][i]) for j in range(n)] + [Fraction(b[i])]
        lam = 1
        for v in entries:
            lam = lam * v.denominator // math.gcd(lam, v.denominator)
        s = signs[i] * lam
        scales.append(s)
        row = [int(v * s) for v in entries[:n]] + [int(k == i) for k in range(m)] + [int(entries[n] * s)]
        rows.append(row)
    basis = [n + i for i in range(m)]
    width = n + m
    cost = [-sum(rows[i][j] for i in range(m)) for j in range(n)] + [0] * m
    det = 1
    pivots = 0
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = Fraction(rows[i][width], a)
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ArithmeticError("phase I objective unbounded")
        r = best[1]
        prow = rows[r]
        piv = prow[enter]
        for i in range(m):
            if i != r:
                f = rows[i][enter]
                rows[i] = [(piv * v - f * w) // det for v, w in zip(rows[i], prow)]
        f = cost[enter]
        cost = [(piv * c - f * w) // det for c, w in zip(cost, prow[:width])]
        det = piv
        basis[r] = enter
        pivots += 1
        if pivots > max_pivots:
            raise ArithmeticError("simplex pivot limit exceeded")
    objective = sum(rows[i][width] for i in range(m) if basis[i] >= n)
    if objective == 0:
        x = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = Fraction(rows[i][width], det)
        return Feasibility(True, x=x, pivots=pivots)
    y_scaled = [sum(rows[i][n + k] for i in range(m) if basis[i] >= n) for k in range(m)]
    farkas = [Fraction(-scales[k] * y_scaled[k], det) for k in range(m)]
    return Feasibility(False, farkas=farkas, pivots=pivots)


def _field_feasibility(columns, b, max_pivots) -> Feasibility:
    m = len(b)
    n = len(columns)
    zero = Fraction(0)
    if m == 0:
        return Feasibility(True, [zero] * n)
    signs = [(-1 if bi < 0 else 1) for bi in b]
    # tableau rows: original columns, then m artificial columns, then rhs
    rows = []
    for i in range(m):
        s = signs[i]
        row = [s * columns[j][i] for j in range(n)]
        row += [Fraction(int(k == i)) for k in range(m)]
        row.append(s * b[i])
        rows.append(row)
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of min sum(artificials)
    cost = [zero] * width
    for j in range(n):
        cost[j] = -sum((rows[i][j] for i in range(m)), zero)
    pivots = 0
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][width] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded direction cannot occur in phase I
            raise ArithmeticError("phase I objective unbounded")
        r = best[1]
        piv = rows[r][enter]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(m):
            if i != r:
                f = rows[i][enter]
                if f != 0:
                    rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        f = cost[enter]
        cost = [c - f * w for c, w in zip(cost, rows[r][:width])]
        basis[r] = enter
        pivots += 1
        if pivots > max_pivots:
            raise ArithmeticError("simplex pivot limit exceeded")
    objective = sum((rows[i][width] for i in range(m) if basis[i] >= n), zero)
    if objective == 0:
        x = [zero] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = rows[i][width]
        return Feasibility(True, x=x, pivots=pivots)
    # y_flipped = c_B^T B^{-1}; B^{-1} sits in the artificial block of the tableau
    y_flipped = [
        sum((rows[i][n + k] for i in range(m) if basis[i] >= n), zero) for k in range(m)
    ]
    farkas = [-signs[k] * y_flipped[k] for k in range(m)]
    return Feasibility(False, farkas=farkas, pivots=pivots)

"""Intersection lattices of smooth projective surfaces.

A :class:`SurfaceLattice` fixes a basis of the Neron-Severi group, its Gram
matrix, the canonical class and a curated list of irreducible curves. Classes
living in a lattice carry its identity token, so coordinates from two
different surfaces can never be silently added together.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import linalg
from .errors import LatticeMismatchError, PreconditionError, SignatureError
from .scalars import QuadScalar, Scalar, fmt

_ids = itertools.count(1)

MODEL_TAGS = ("plane", "hirzebruch", "blowup-chain", "abelian-product", "custom")


def _scalar(x):
    if isinstance(x, QuadScalar):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class DivisorClass:
    """Coordinates of a divisor class in a fixed lattice basis."""

    coords: tuple
    lattice_id: int

    def _check(self, other: "DivisorClass"):
        if not isinstance(other, DivisorClass):
            raise TypeError(f"expected DivisorClass, got {type(other).__name__}")
        if other.lattice_id != self.lattice_id:
            raise LatticeMismatchError(
                f"classes from lattices {self.lattice_id} and {other.lattice_id} cannot be combined"
            )

    def __add__(self, other):
        self._check(other)
        return DivisorClass(tuple(a + b for a, b in zip(self.coords, other.coords)), self.lattice_id)

    def __sub__(self, other):
        self._check(other)
        return DivisorClass(tuple(a - b for a, b in zip(self.coords, other.coords)), self.lattice_id)

    def __neg__(self):
        return DivisorClass(tuple(-a for a in self.coords), self.lattice_id)

    def __mul__(self, s):
        if isinstance(s, DivisorClass):
            return NotImplemented
        s = _scalar(s)
        return DivisorClass(tuple(s * a for a in self.coords), self.lattice_id)

    __rmul__ = __mul__

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def is_integral(self) -> bool:
        return all(isinstance(a, Fraction) and a.denominator == 1 for a in self.coords)

    def key(self) -> tuple:
        """Lexicographic sort key (rational coordinates only)."""
        return tuple(self.coords)

    def __str__(self):
        return "(" + ", ".join(fmt(a) for a in self.coords) + ")"


@dataclass(frozen=True)
class CurveClass:
    """An irreducible curve: its class and arithmetic genus."""

    cls: DivisorClass
    genus: int
    name: str = ""
    irreducible: bool = True

    def __str__(self):
        return self.name or str(self.cls)


@dataclass(frozen=True)
class SignatureReport:
    diagonal: tuple
    positive: int
    negative: int
    zero: int

    @property
    def accepted(self) -> bool:
        return self.positive == 1 and self.zero == 0

    @property
    def signature(self) -> tuple[int, int]:
        return (self.positive, self.negative)

    def __str__(self):
        diag = ", ".join(fmt(x) for x in self.diagonal)
        return f"diagonal [{diag}] signature ({self.positive},{self.negative}) zeros {self.zero}"


def diagonalize(gram: Sequence[Sequence]) -> SignatureReport:
    """Exact congruence diagonalization of a symmetric rational matrix."""
    n = len(gram)
    a = [[Fraction(x) for x in row] for row in gram]
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i]:
                raise SignatureError(f"Gram matrix is not symmetric at ({i},{j})")
    diag = []
    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for row in a:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is not None:
                    # replace basis vector k by b_k + b_j, making the pivot 2*a[k][j]
                    a[k] = [x + y for x, y in zip(a[k], a[j])]
                    for row in a:
                        row[k] = row[k] + row[j]
        p = a[k][k]
        diag.append(p)
        if p == 0:
            continue
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
                for r in range(n):
                    a[r][i] -= f * a[r][k]
    pos = sum(1 for x in diag if x > 0)
    neg = sum(1 for x in diag if x < 0)
    return SignatureReport(tuple(diag), pos, neg, n - pos - neg)


class SurfaceLattice:
    """Neron-Severi lattice of a smooth projective surface with its curve list.

    ``gram`` is validated to have signature (1, rank-1) at construction, and
    every curve is checked against adjunction ``C^2 + K.C = 2g - 2`` and for
    primitivity.
    """

    def __init__(
        self,
        gram: Sequence[Sequence],
        canonical: Sequence,
        curves: Iterable = (),
        model_tag: str = "custom",
        basis_labels: Sequence[str] | None = None,
        check: bool = True,
    ):
        self.lattice_id = next(_ids)
        self.gram = tuple(tuple(Fraction(x) for x in row) for row in gram)
        self.rank = len(self.gram)
        if self.rank == 0 or any(len(row) != self.rank for row in self.gram):
            raise PreconditionError("Gram matrix must be square and non-empty")
        if model_tag not in MODEL_TAGS:
            raise PreconditionError(f"unknown model tag {model_tag!r}")
        self.model_tag = model_tag
        self.basis_labels = tuple(basis_labels) if basis_labels else tuple(f"b{i}" for i in range(self.rank))
        self.canonical = self.cls(canonical)
        if check:
            report = diagonalize(self.gram)
            if not report.accepted:
                raise SignatureError(f"intersection form rejected: {report}", report)
        built = []
        for item in curves:
            if isinstance(item, CurveClass):
                coords, genus, name = item.cls.coords, item.genus, item.name
            else:
                coords, genus, *rest = item
                name = rest[0] if rest else ""
            c = CurveClass(self.cls(coords), int(genus), name or f"C{len(built)}")
            if check:
                self._check_curve(c)
            built.append(c)
        self.curves = tuple(built)

    # -- construction helpers --------------------------------------------------

    def cls(self, coords) -> DivisorClass:
        coords = tuple(_scalar(x) for x in coords)
        if len(coords) != self.rank:
            raise PreconditionError(f"class has length {len(coords)}, lattice rank is {self.rank}")
        return DivisorClass(coords, self.lattice_id)

    def zero(self) -> DivisorClass:
        return self.cls([0] * self.rank)

    def unit(self, i: int) -> DivisorClass:
        return self.cls([int(j == i) for j in range(self.rank)])

    def _check_curve(self, c: CurveClass):
        if not c.cls.is_integral():
            raise PreconditionError(f"curve {c.name} is not an integral class")
        if list(c.cls.coords) != linalg.primitive(c.cls.coords):
            raise PreconditionError(f"curve {c.name} class {c.cls} is not primitive")
        lhs = self.pair(c.cls, c.cls) + self.pair(self.canonical, c.cls)
        if lhs != 2 * c.genus - 2:
            raise PreconditionError(
                f"curve {c.name}: C^2 + K.C = {fmt(lhs)} but genus {c.genus} needs {2 * c.genus - 2}"
            )

    # -- intersection pairing --------------------------------------------------

    def pair(self, u: DivisorClass, v: DivisorClass) -> Scalar:
        for w in (u, v):
            if not isinstance(w, DivisorClass):
                raise TypeError(f"expected DivisorClass, got {type(w).__name__}")
            if w.lattice_id != self.lattice_id:
                raise LatticeMismatchError(
                    f"class from lattice {w.lattice_id} paired in lattice {self.lattice_id}"
                )
        total = Fraction(0)
        for i, ui in enumerate(u.coords):
            if ui == 0:
                continue
            row = self.gram[i]
            for j, vj in enumerate(v.coords):
                if vj != 0 and row[j] != 0:
                    total = total + ui * row[j] * vj
        return total

    def square(self, u: DivisorClass) -> Scalar:
        return self.pair(u, u)

    @cached_property
    def curve_duals(self) -> tuple:
        """Rows ``G c`` for each listed curve, so ``v.c`` is one dot product."""
        return tuple(tuple(linalg.matvec(self.gram, c.cls.coords)) for c in self.curves)

    def pair_with_curves(self, v: DivisorClass) -> list:
        if v.lattice_id != self.lattice_id:
            raise LatticeMismatchError(f"class from lattice {v.lattice_id} paired in lattice {self.lattice_id}")
        return [linalg.dot(v.coords, g) for g in self.curve_duals]

    def gram_of(self, classes: Sequence[DivisorClass]):
        return [[self.pair(a, b) for b in classes] for a in classes]

    def combination(self, coeffs: dict[int, Scalar]) -> DivisorClass:
        """The class sum(coeffs[i] * curves[i])."""
        total = self.zero()
        for i, a in coeffs.items():
            total = total + a * self.curves[i].cls
        return total

    def curve_index(self, cls: DivisorClass) -> int | None:
        for i, c in enumerate(self.curves):
            if c.cls == cls:
                return i
        return None

    def curve_by_name(self, name: str) -> CurveClass:
        for c in self.curves:
            if c.name == name:
                return c
        raise KeyError(name)

    @cached_property
    def signature_report(self) -> SignatureReport:
        return diagonalize(self.gram)

    def describe(self) -> str:
        lines = [f"lattice #{self.lattice_id} ({self.model_tag}) rank {self.rank}"]
        lines.append("  basis: " + ", ".join(self.basis_labels))
        lines.append("  K = " + str(self.canonical))
        for c in self.curves:
            lines.append(f"  curve {c.name}: {c.cls} genus {c.genus} self-int {fmt(self.square(c.cls))}")
        return "\n".join(lines)

    def __repr__(self):
        return f"SurfaceLattice(id={self.lattice_id}, tag={self.model_tag}, rank={self.rank})"


def pair(lattice: SurfaceLattice, u: DivisorClass, v: DivisorClass) -> Scalar:
    return lattice.pair(u, v)


def check_signature(lattice_or_gram) -> SignatureReport:
    """Diagonalize exactly; raises :class:`SignatureError` unless signature is (1, n)."""
    gram = lattice_or_gram.gram if isinstance(lattice_or_gram, SurfaceLattice) else lattice_or_gram
    report = diagonalize(gram)
    if not report.accepted:
        raise SignatureError(f"intersection form rejected: {report}", report)
    return report


def orthogonal_complement_basis(lattice: SurfaceLattice, e: DivisorClass) -> list[DivisorClass]:
    """Integral basis of ``{v : v.e = 0}`` for a primitive (-1)-class ``e``."""
    if not e.is_integral() or list(e.coords) != linalg.primitive(e.coords):
        raise PreconditionError(f"class {e} is not primitive integral")
    if lattice.square(e) != -1:
        raise PreconditionError(f"class {e} has square {fmt(lattice.square(e))}, expected -1")
    functional = [lattice.pair(lattice.unit(i), e) for i in range(lattice.rank)]
    basis = [lattice.cls(v) for v in linalg.integer_kernel([functional], lattice.rank)]
    if basis:
        # the restriction of a (1, n) form to the complement of a negative class is (1, n-1)
        check_signature(lattice.gram_of(basis))
    return basis


def lattice_to_data(lattice: SurfaceLattice) -> dict:
    """Plain-data snapshot (rationals kept as Fraction) used in traces."""
    return {
        "gram": [list(r) for r in lattice.gram],
        "K": list(lattice.canonical.coords),
        "curves": [[list(c.cls.coords), c.genus, c.name] for c in lattice.curves],
        "labels": list(lattice.basis_labels),
        "tag": lattice.model_tag,
    }


def lattice_from_data(data: dict) -> SurfaceLattice:
    return SurfaceLattice(
        data["gram"],
        data["K"],
        [tuple(c) for c in data["curves"]],
        model_tag=data.get("tag", "custom"),
        basis_labels=data.get("labels"),
    )

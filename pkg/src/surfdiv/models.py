"""Concrete surfaces: the plane, Hirzebruch surfaces, blowup chains, E x E.

Blowup chains support two kinds of point configuration, each with a curve
list that provably generates the effective cone:

* up to eight generic points of the plane (del Pezzo surfaces), where the
  curve list is the set of (-1)-classes found by exhaustive search;
* torus-fixed points, i.e. the intersection point of two adjacent boundary
  curves, on the plane or on a Hirzebruch surface. Such blowups stay toric
  and the boundary curves generate the effective cone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .errors import PreconditionError, ResourceError
from .lattice import CurveClass, DivisorClass, SurfaceLattice
from .scalars import QuadScalar, sqrt_convergents


def class_label(coords: Sequence, labels: Sequence[str]) -> str:
    """Human-readable form such as ``2H-E1-E2``."""
    parts = []
    for c, lab in zip(coords, labels):
        c = Fraction(c)
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else (str(mag) if mag.denominator == 1 else f"({mag})")
        parts.append(f"{sign}{coef}{lab}")
    if not parts:
        return "0"
    text = "".join(parts)
    return text[1:] if text[0] == "+" else text


def projective_plane() -> SurfaceLattice:
    return SurfaceLattice([[1]], [-3], [([1], 0, "H")], model_tag="plane", basis_labels=["H"])


def hirzebruch(n: int) -> SurfaceLattice:
    """The Hirzebruch surface F_n in the basis (negative section s, fiber f)."""
    if n < 0:
        raise PreconditionError("Hirzebruch index must be nonnegative")
    return SurfaceLattice(
        [[-n, 1], [1, 0]],
        [-2, -(n + 2)],
        [([1, 0], 0, "s"), ([0, 1], 0, "f")],
        model_tag="hirzebruch",
        basis_labels=["s", "f"],
    )


# --- blowup chains ------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    """Position of a point to blow up.

    ``on`` names the existing curves through the point: empty for a generic
    point, or two adjacent boundary curves for a torus-fixed point.
    """

    on: tuple = ()

    @classmethod
    def generic(cls) -> "Point":
        return cls(())

    @classmethod
    def at(cls, a: str, b: str) -> "Point":
        return cls((a, b))

    @classmethod
    def near(cls, index: int, toward: str | None = None) -> "Point":
        """A point on the exceptional curve of point ``index`` (1-based)."""
        return cls((f"E{index}", toward or "*"))

    def is_generic(self) -> bool:
        return not self.on


@dataclass(frozen=True)
class BlowupChain:
    base: str = "plane"
    n: int = 0
    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.base not in ("plane", "hirzebruch"):
            raise PreconditionError(f"unknown base surface {self.base!r}")
        object.__setattr__(self, "points", tuple(self.points))


def _base_boundary(chain: BlowupChain):
    if chain.base == "plane":
        return ["H"], [[1]], [-3], [("L0", [1]), ("L1", [1]), ("L2", [1])]
    n = chain.n
    return (
        ["s", "f"],
        [[-n, 1], [1, 0]],
        [-2, -(n + 2)],
        [("f0", [0, 1]), ("s", [1, 0]), ("f1", [0, 1]), ("t", [1, n])],
    )


def _pad(v, r):
    return list(v) + [0] * (r - len(v))


def blow_up(chain: BlowupChain) -> SurfaceLattice:
    """Build the lattice and curve list of an iterated blowup."""
    pts = chain.points
    if all(p.is_generic() for p in pts):
        if chain.base != "plane":
            raise PreconditionError("generic points are supported on the plane only")
        return del_pezzo(len(pts))
    if any(p.is_generic() for p in pts):
        raise PreconditionError("mixing generic and torus-fixed points is not supported")
    labels, gram, canonical, cycle = _base_boundary(chain)
    rank = len(labels)
    gram = [list(r) for r in gram]
    canonical = list(canonical)
    cycle = [[name, list(v)] for name, v in cycle]
    for k, p in enumerate(pts, start=1):
        names = [c[0] for c in cycle]
        on = list(p.on)
        if len(on) == 2 and on[1] == "*" and on[0] in names:
            # infinitely near without a direction: toward the next boundary curve
            on[1] = names[(names.index(on[0]) + 1) % len(names)]
        if len(on) != 2 or on[0] == on[1]:
            raise PreconditionError(f"point {k}: name two distinct adjacent boundary curves")
        for nm in on:
            if nm not in names:
                raise PreconditionError(f"point {k}: unknown curve {nm!r}")
        i, j = names.index(on[0]), names.index(on[1])
        m = len(cycle)
        if (i + 1) % m == j:
            insert_at = i + 1
        elif (j + 1) % m == i:
            insert_at = j + 1
        else:
            raise PreconditionError(f"point {k}: curves {on[0]} and {on[1]} do not meet at a fixed point")
        rank += 1
        for row in gram:
            row.append(0)
        gram.append([0] * (rank - 1) + [-1])
        canonical.append(1)
        labels.append(f"E{k}")
        for c in cycle:
            c[1] = _pad(c[1], rank)
        e = [0] * (rank - 1) + [1]
        for idx in (i, j):
            cycle[idx][1] = [a - b for a, b in zip(cycle[idx][1], e)]
        cycle.insert(insert_at, [f"E{k}", e])
    curves = []
    seen = set()
    for name, v in cycle:
        t = tuple(v)
        if t in seen:
            continue
        seen.add(t)
        curves.append((v, 0, name))
    lat = SurfaceLattice(gram, canonical, curves, model_tag="blowup-chain", basis_labels=labels)
    lat.boundary = tuple(name for name, _ in cycle)
    return lat


def del_pezzo(r: int) -> SurfaceLattice:
    """The plane blown up in ``r <= 8`` generic points, basis (H, E1..Er)."""
    if not 0 <= r <= 8:
        raise PreconditionError("generic blowups of the plane are supported for r <= 8")
    if r == 0:
        return projective_plane()
    labels = ["H"] + [f"E{i}" for i in range(1, r + 1)]
    gram = [[(1 if i == 0 else -1) if i == j else 0 for j in range(r + 1)] for i in range(r + 1)]
    canonical = [-3] + [1] * r
    if r == 1:
        curves = [([0, 1], 0, "E1"), ([1, -1], 0, "H-E1")]
        return SurfaceLattice(gram, canonical, curves, model_tag="blowup-chain", basis_labels=labels)
    bare = SurfaceLattice(gram, canonical, model_tag="blowup-chain", basis_labels=labels)
    found = enumerate_minus_one_classes(bare)
    curves = [(c.cls.coords, 0, class_label(c.cls.coords, labels)) for c in found]
    return SurfaceLattice(gram, canonical, curves, model_tag="blowup-chain", basis_labels=labels)


# --- (-1)-class search --------------------------------------------------------


def _integer_window(center: Fraction, radius_sq: Fraction) -> tuple[int, int]:
    """Smallest and largest integers x with (x - center)^2 <= radius_sq."""
    lo = math.floor(center)
    while (lo - center) ** 2 <= radius_sq:
        lo -= 1
    hi = math.ceil(center)
    while (hi - center) ** 2 <= radius_sq:
        hi += 1
    lo, hi = lo + 1, hi - 1
    if lo > hi:
        return 0, -1
    return lo, hi


def minus_one_search_box(lattice: SurfaceLattice) -> list[tuple[int, int]]:
    """Per-coordinate bounds that contain every class with e^2 = K.e = -1.

    Requires K^2 > 0, so K-perp is negative definite (Hodge index). Writing
    e and the dual basis vector w along K and K-perp, Cauchy-Schwarz on the
    negative definite part bounds w.e, which is the coordinate of e.
    """
    K = lattice.canonical
    k2 = lattice.square(K)
    if k2 <= 0:
        raise PreconditionError("complete (-1)-class bound needs K^2 > 0")
    ginv = linalg.inverse([list(r) for r in lattice.gram])
    box = []
    e_perp_norm = 1 + 1 / k2  # -(e_perp)^2
    for k in range(lattice.rank):
        w = lattice.cls([ginv[i][k] for i in range(lattice.rank)])
        wk = lattice.pair(w, K)
        center = -wk / k2
        w_perp_norm = wk * wk / k2 - lattice.square(w)
        box.append(_integer_window(center, w_perp_norm * e_perp_norm))
    return box


def enumerate_minus_one_classes(
    lattice: SurfaceLattice, coeff_bound: int | None = None, max_points: int = 50_000_000
) -> list[CurveClass]:
    """All integral classes with e^2 = -1 and K.e = -1 inside the search box.

    With K^2 > 0 the box comes from :func:`minus_one_search_box` and the list
    is complete; ``coeff_bound`` further clips it. Otherwise ``coeff_bound``
    is required and the result is complete only within that box.
    """
    if lattice.square(lattice.canonical) > 0:
        box = minus_one_search_box(lattice)
        if coeff_bound is not None:
            box = [(max(lo, -coeff_bound), min(hi, coeff_bound)) for lo, hi in box]
    elif coeff_bound is None:
        raise PreconditionError("coeff_bound is required when K^2 <= 0")
    else:
        box = [(-coeff_bound, coeff_bound)] * lattice.rank
    sizes = [max(0, hi - lo + 1) for lo, hi in box]
    total = math.prod(sizes)
    if total > max_points:
        raise ResourceError(f"search box has {total} points, cap is {max_points}")
    if total == 0:
        return []
    m = 1
    for row in lattice.gram:
        for x in row:
            m = math.lcm(m, x.denominator)
    gi = np.array([[int(x * m) for x in row] for row in lattice.gram], dtype=np.int64)
    kvec = gi @ np.array([int(x) for x in lattice.canonical.coords], dtype=np.int64)
    # inner block: trailing coordinates enumerated as a numpy grid
    split = lattice.rank
    inner = 1
    while split > 0 and inner * sizes[split - 1] <= 200_000:
        split -= 1
        inner *= sizes[split]
    inner_axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box[split:]]
    if inner_axes:
        grids = np.meshgrid(*inner_axes, indexing="ij")
        inner_pts = np.stack([g.ravel() for g in grids], axis=1)
    else:
        inner_pts = np.zeros((1, 0), dtype=np.int64)
    outer_ranges = [range(lo, hi + 1) for lo, hi in box[:split]]
    found = []
    for head in itertools.product(*outer_ranges):
        pts = np.concatenate(
            [np.broadcast_to(np.array(head, dtype=np.int64), (len(inner_pts), split)), inner_pts], axis=1
        )
        q = np.einsum("ij,ij->i", pts @ gi, pts)
        kd = pts @ kvec
        hits = pts[(q == -m) & (kd == -m)]
        for row in hits:
            v = [int(x) for x in row]
            if linalg.primitive(v) == v:
                found.append(v)
    found.sort(key=lambda v: (v[0], tuple(-x for x in v[1:])))
    return [CurveClass(lattice.cls(v), 0, class_label(v, lattice.basis_labels)) for v in found]


# --- the abelian surface E x E ------------------------------------------------


@dataclass(frozen=True)
class AbelianProductModel:
    """E x E with basis (F1, F2, diagonal); all squares 0, mixed products 1.

    This is one concrete instantiation used to exhibit the real-coefficient
    counterexample: the curves are graphs of maps between the factors.
    """

    lattice: SurfaceLattice

    @property
    def polarization(self) -> DivisorClass:
        return self.lattice.cls([1, 1, 1])


def abelian_product() -> AbelianProductModel:
    gram = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    curves = [([1, 0, 0], 1, "F1"), ([0, 1, 0], 1, "F2"), ([0, 0, 1], 1, "D")]
    lat = SurfaceLattice(gram, [0, 0, 0], curves, model_tag="abelian-product", basis_labels=["F1", "F2", "D"])
    return AbelianProductModel(lat)


def abelian_graph_class(model: AbelianProductModel, p: int, q: int) -> DivisorClass:
    """Class G with G.F1 = p^2, G.F2 = q^2, G.D = (q-p)^2."""
    if p <= 0 or q <= 0 or math.gcd(p, q) != 1:
        raise PreconditionError(f"need coprime positive (p, q), got ({p}, {q})")
    lat = model.lattice
    rhs = [Fraction(p * p), Fraction(q * q), Fraction((q - p) ** 2)]
    g = lat.cls(linalg.solve([list(r) for r in lat.gram], rhs))
    if lat.square(g) != 0:
        raise AssertionError("graph class must have square 0")
    return g


def remark_nef_class(model: AbelianProductModel) -> DivisorClass:
    """M = (2-r)F1 + (1-r)F2 + r D with r = sqrt(2): nef, M^2 = 0, irrational ray."""
    r = QuadScalar.sqrt(2)
    return model.lattice.cls([2 - r, 1 - r, r])


def pell_pairs(n_max: int):
    """Pairs (p, q) with q/p the continued-fraction convergents of sqrt(2), p <= n_max."""
    for conv in sqrt_convergents(2):
        p, q = conv.denominator, conv.numerator
        if p > n_max:
            return
        yield p, q


@dataclass(frozen=True)
class RemarkRow:
    p: int
    q: int
    value: QuadScalar
    positive: bool
    below_bound: bool

    @property
    def bound(self) -> Fraction:
        return Fraction(1, self.p)


@dataclass(frozen=True)
class RemarkReport:
    M: DivisorClass
    M_square: QuadScalar
    M_dot_F1: QuadScalar
    rows: tuple
    instantiation: str = "E x E with M on the sqrt(2) boundary ray and graph curves G(p,q)"

    @property
    def holds(self) -> bool:
        return self.M_square == 0 and self.M_dot_F1 > 0 and all(r.positive and r.below_bound for r in self.rows)


def remark_counterexample(model: AbelianProductModel, n_max: int) -> RemarkReport:
    """Exact table of M.G(p,q) for the Pell convergents of sqrt(2)."""
    lat = model.lattice
    M = remark_nef_class(model)
    m2 = lat.square(M)
    mf1 = lat.pair(M, lat.curves[0].cls)
    if m2 != 0 or not mf1 > 0:
        raise AssertionError("M must satisfy M^2 = 0 and M.F1 > 0")
    rows = []
    r2 = QuadScalar.sqrt(2)
    for p, q in pell_pairs(n_max):
        g = abelian_graph_class(model, p, q)
        value = lat.pair(M, g)
        closed = (q - p * r2) * (q - p * r2)
        if value != closed:
            raise AssertionError(f"pairing mismatch at ({p},{q})")
        rows.append(RemarkRow(p, q, value, value > 0, value < Fraction(1, p)))
    return RemarkReport(M, m2, mf1, tuple(rows))


def graph_generators(model: AbelianProductModel, p_max: int = 100) -> list[CurveClass]:
    """F1, F2, D and the graph classes G(p, q) for coprime 1 <= p <= p_max, 1 <= q <= 2p."""
    lat = model.lattice
    out = list(lat.curves)
    for p in range(1, p_max + 1):
        for q in range(1, 2 * p + 1):
            if math.gcd(p, q) == 1 and q != p:
                out.append(CurveClass(abelian_graph_class(model, p, q), 1, f"G({p},{q})"))
    return out

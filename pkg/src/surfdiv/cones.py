"""Effective and nef cones, Zariski decomposition, extremal rays.

On generator models the effective cone is the cone spanned by the lattice's
curve list (the Mori-dream input contract), and every membership question is
an exact LP. The abelian model E x E has a round cone and is handled by its
quadratic criterion instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import ConsistencyError, ModelIncompleteError, PreconditionError
from .lattice import CurveClass, DivisorClass, SurfaceLattice
from .scalars import QuadScalar, fmt, irrational_part, radicand_of, rational_part, sqrt_convergents
from .simplex import feasibility


@dataclass(frozen=True)
class EffectivityCertificate:
    """Nonnegative coefficients exhibiting ``target = sum a_i * generators[i]``."""

    generators: tuple
    coefficients: tuple
    target: DivisorClass
    labels: tuple = ()
    indices: tuple | None = None

    def total(self) -> DivisorClass:
        acc = self.target * 0
        for g, a in zip(self.generators, self.coefficients):
            acc = acc + a * g
        return acc

    def is_valid(self) -> bool:
        return all(a >= 0 for a in self.coefficients) and self.total() == self.target

    def as_dict(self) -> dict:
        """Coefficients keyed by curve index (requires ``indices``)."""
        return dict(zip(self.indices, self.coefficients))

    def describe(self) -> str:
        terms = [f"{fmt(a)}*{lab}" for a, lab in zip(self.coefficients, self.labels) if a != 0]
        return " + ".join(terms) if terms else "0"


def certificate_from_coeffs(lattice: SurfaceLattice, coeffs: dict, target: DivisorClass) -> EffectivityCertificate:
    items = sorted((i, a) for i, a in coeffs.items() if a != 0)
    return EffectivityCertificate(
        generators=tuple(lattice.curves[i].cls for i in (i for i, _ in items)),
        coefficients=tuple(a for _, a in items),
        target=target,
        labels=tuple(lattice.curves[i].name for i, _ in items),
        indices=tuple(i for i, _ in items),
    )


@dataclass(frozen=True)
class PseffResult:
    pseudo_effective: bool
    certificate: EffectivityCertificate | None = None
    separator: DivisorClass | None = None
    reason: str = ""

    def __bool__(self):
        return self.pseudo_effective


@dataclass(frozen=True)
class NefResult:
    nef: bool
    witness: CurveClass | None = None
    value: object = None
    reason: str = ""

    def __bool__(self):
        return self.nef


@dataclass(frozen=True)
class ZariskiDecomposition:
    P: DivisorClass
    support: tuple  # curve indices
    N_support: tuple  # CurveClass
    N_coeffs: tuple
    gram_witness: tuple

    @property
    def N(self) -> DivisorClass:
        acc = self.P * 0
        for c, a in zip(self.N_support, self.N_coeffs):
            acc = acc + a * c.cls
        return acc

    def n_dict(self) -> dict:
        return dict(zip(self.support, self.N_coeffs))


@dataclass(frozen=True)
class ExtremalRay:
    generator: CurveClass
    index: int
    adjacent_facets: tuple | None = None


def _is_abelian(lattice: SurfaceLattice) -> bool:
    return lattice.model_tag == "abelian-product"


def _require_generators(lattice: SurfaceLattice):
    if _is_abelian(lattice):
        raise PreconditionError("operation needs a generator model, not the abelian quadratic cone")
    if not lattice.curves and lattice.rank > 1:
        raise ModelIncompleteError("lattice has no curve generators (Mori-dream contract violated)")


def _abelian_test(lattice: SurfaceLattice, d: DivisorClass):
    amp = lattice.cls([1] * lattice.rank)
    sq = lattice.square(d)
    deg = lattice.pair(d, amp)
    return sq >= 0 and deg >= 0, sq, deg


def is_pseudo_effective(lattice: SurfaceLattice, d: DivisorClass) -> PseffResult:
    """Exact cone membership with a certificate or a separating class."""
    if _is_abelian(lattice):
        ok, sq, deg = _abelian_test(lattice, d)
        return PseffResult(ok, reason=f"quadratic criterion: d^2 = {sq}, d.(F1+F2+D) = {deg}")
    _require_generators(lattice)
    gens = [c.cls for c in lattice.curves]
    res = feasibility([g.coords for g in gens], d.coords)
    if res.feasible:
        coeffs = {i: x for i, x in enumerate(res.x) if x != 0}
        cert = certificate_from_coeffs(lattice, coeffs, d)
        if not cert.is_valid():
            raise ConsistencyError("LP certificate failed re-verification")
        return PseffResult(True, certificate=cert, reason="nonnegative combination of curves")
    ginv = linalg.inverse([list(r) for r in lattice.gram])
    h = lattice.cls(linalg.matvec(ginv, res.farkas))
    if any(lattice.pair(h, g) < 0 for g in gens) or not lattice.pair(h, d) < 0:
        raise ConsistencyError("LP separator failed re-verification")
    return PseffResult(False, separator=h, reason=f"separator h with h.d = {fmt(lattice.pair(h, d))}")


def is_nef(lattice: SurfaceLattice, d: DivisorClass) -> NefResult:
    if _is_abelian(lattice):
        ok, sq, deg = _abelian_test(lattice, d)
        return NefResult(ok, reason=f"quadratic criterion: d^2 = {sq}, d.(F1+F2+D) = {deg}")
    _require_generators(lattice)
    for c, v in zip(lattice.curves, lattice.pair_with_curves(d)):
        if v < 0:
            return NefResult(False, witness=c, value=v, reason=f"{c.name}: d.C = {fmt(v)}")
    return NefResult(True, reason="d.C >= 0 for every listed curve")


# --- Zariski decomposition ----------------------------------------------------


def _bauer(lattice: SurfaceLattice, d: DivisorClass, order: Sequence[int]) -> tuple[DivisorClass, dict]:
    curves = lattice.curves
    support: list[int] = []
    while True:
        if support:
            gram = [[lattice.pair(curves[i].cls, curves[j].cls) for j in support] for i in support]
            if not linalg.is_negative_definite(gram):
                raise ConsistencyError(
                    "Zariski support Gram is not negative definite; "
                    "the curve list probably does not generate the effective cone"
                )
            rhs = [lattice.pair(d, curves[i].cls) for i in support]
            coeffs = dict(zip(support, linalg.solve(gram, rhs)))
        else:
            coeffs = {}
        P = d
        for i, a in coeffs.items():
            P = P - a * curves[i].cls
        values = lattice.pair_with_curves(P)
        violator = next((i for i in order if values[i] < 0), None)
        if violator is None:
            break
        if violator in support:
            raise ConsistencyError("support curve still pairs negatively with P")
        support.append(violator)
    if any(a < 0 for a in coeffs.values()):
        raise ConsistencyError("negative Zariski coefficient; curve list does not generate the effective cone")
    return P, {i: a for i, a in coeffs.items() if a != 0}


def zariski_decompose(lattice: SurfaceLattice, d: DivisorClass, check_unique: bool = True) -> ZariskiDecomposition:
    """Zariski decomposition d = P + N by Bauer-style support growth.

    One violating curve enters the support per round (the first in curve
    order). With ``check_unique`` the computation is repeated in reversed
    curve order and both answers must agree.
    """
    _require_generators(lattice)
    if not is_pseudo_effective(lattice, d):
        raise PreconditionError(f"class {d} is not pseudo-effective")
    n = len(lattice.curves)
    P, nd = _bauer(lattice, d, range(n))
    if check_unique:
        P2, nd2 = _bauer(lattice, d, range(n - 1, -1, -1))
        if P2 != P or nd2 != nd:
            raise ConsistencyError("Zariski decomposition depends on curve order")
    support = tuple(sorted(nd))
    curves = tuple(lattice.curves[i] for i in support)
    gram = tuple(tuple(lattice.pair(a.cls, b.cls) for b in curves) for a in curves)
    return ZariskiDecomposition(P, support, curves, tuple(nd[i] for i in support), gram)


def check_zariski(lattice: SurfaceLattice, d: DivisorClass, z: ZariskiDecomposition) -> list[str]:
    """Re-verify every Zariski invariant; returns a list of violations."""
    problems = []
    if z.P + z.N != d:
        problems.append("P + N differs from the input class")
    for c in lattice.curves:
        if lattice.pair(z.P, c.cls) < 0:
            problems.append(f"P is not nef: P.{c.name} < 0")
    for c in z.N_support:
        if lattice.pair(z.P, c.cls) != 0:
            problems.append(f"P.{c.name} != 0")
    if z.N_support and not linalg.is_negative_definite([list(r) for r in z.gram_witness]):
        problems.append("support Gram is not negative definite")
    if any(a <= 0 for a in z.N_coeffs):
        problems.append("nonpositive N coefficient")
    return problems


# --- extremal rays ------------------------------------------------------------


def _primitive_key(c: CurveClass) -> tuple:
    return tuple(linalg.primitive(c.cls.coords))


def extremal_rays(lattice: SurfaceLattice, facets: bool = False) -> list[ExtremalRay]:
    """Curves spanning 1-faces of the cone generated by the curve list.

    An irreducible curve of negative square always spans an extremal ray.
    Any other curve is extremal iff it is not a nonnegative combination of
    the remaining (distinct) rays, which is one exact LP. Output is sorted by
    the generator's coordinates.
    """
    _require_generators(lattice)
    cache = lattice.__dict__.setdefault("_ray_cache", {})
    if "rays" not in cache:
        reps: dict[tuple, int] = {}
        for i, c in enumerate(lattice.curves):
            reps.setdefault(_primitive_key(c), i)
        idx = list(reps.values())
        rays = []
        for i in idx:
            if lattice.square(lattice.curves[i].cls) < 0:
                rays.append(i)
                continue
            others = [lattice.curves[j].cls.coords for j in idx if j != i]
            if not feasibility(others, lattice.curves[i].cls.coords).feasible:
                rays.append(i)
        rays.sort(key=lambda i: lattice.curves[i].cls.key())
        cache["rays"] = rays
    rays = cache["rays"]
    if not facets:
        return [ExtremalRay(lattice.curves[i], i) for i in rays]
    normals = cone_facets(lattice)
    out = []
    for i in rays:
        g = lattice.curves[i].cls.coords
        adj = tuple(k for k, h in enumerate(normals) if linalg.dot(h, g) == 0)
        out.append(ExtremalRay(lattice.curves[i], i, adj))
    return out


def cone_facets(lattice: SurfaceLattice) -> list[list[int]]:
    """Inward facet normals (coordinate functionals) of the curve cone.

    Double description: extremal rays of the dual cone ``{h : h.r >= 0}`` are
    built by adding one generator constraint at a time, combining adjacent
    ray pairs across each new hyperplane.
    """
    cache = lattice.__dict__.setdefault("_ray_cache", {})
    if "facets" in cache:
        return cache["facets"]
    gens = [list(lattice.curves[r.index].cls.coords) for r in extremal_rays(lattice)]
    n = lattice.rank
    # pick n independent constraints to start
    chosen: list[int] = []
    for i, g in enumerate(gens):
        if linalg.rank([gens[j] for j in chosen] + [g]) > len(chosen):
            chosen.append(i)
        if len(chosen) == n:
            break
    if len(chosen) < n:
        raise ConsistencyError("curve cone is not full-dimensional")
    inv = linalg.inverse([gens[j] for j in chosen])
    rays = [[inv[i][k] for i in range(n)] for k in range(n)]
    done = list(chosen)
    for i, g in enumerate(gens):
        if i in chosen:
            continue
        vals = [linalg.dot(g, r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zer = [k for k, v in enumerate(vals) if v == 0]
        tight = [frozenset(j for j in done if linalg.dot(gens[j], r) == 0) for r in rays]
        new = []
        for a in pos:
            for b in neg:
                common = tight[a] & tight[b]
                if len(common) < n - 2:
                    continue
                if any(k not in (a, b) and common <= tight[k] for k in range(len(rays))):
                    continue
                va, vb = vals[a], -vals[b]
                new.append([vb * x + va * y for x, y in zip(rays[a], rays[b])])
        rays = [rays[k] for k in pos + zer] + new
        done.append(i)
    normals = sorted({tuple(linalg.primitive(r)) for r in rays})
    cache["facets"] = [list(h) for h in normals]
    return cache["facets"]


def negative_extremal_rays(lattice: SurfaceLattice, theta: DivisorClass) -> list[ExtremalRay]:
    values = lattice.pair_with_curves(theta)
    return [r for r in extremal_rays(lattice) if values[r.index] < 0]


# --- rationalization ----------------------------------------------------------


@dataclass(frozen=True)
class RationalizeResult:
    status: str  # "rational", "irrational-obstruction" or "infeasible"
    certificate: EffectivityCertificate | None = None
    field_coefficients: tuple | None = None
    separator: DivisorClass | None = None
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def rationalize_coefficients(field_coeffs: Sequence, d: int) -> tuple:
    """Move sqrt(d) to a nearby rational v so every coefficient stays >= 0.

    Coefficients are ``alpha_i + beta_i*sqrt(d)``. Those with ``beta_i != 0``
    are strictly positive at sqrt(d) (a rational cannot cancel an irrational),
    so some convergent v of sqrt(d) keeps all of them nonnegative.
    """
    alphas = [rational_part(a) for a in field_coeffs]
    betas = [irrational_part(a) for a in field_coeffs]
    if any(a < 0 for a in field_coeffs):
        raise PreconditionError("coefficients must be nonnegative")
    for v in sqrt_convergents(d):
        vals = tuple(a + b * v for a, b in zip(alphas, betas))
        if all(x >= 0 for x in vals):
            return vals
    raise AssertionError("unreachable")  # pragma: no cover


def rationalize_effective(
    lattice: SurfaceLattice, target: DivisorClass, generators: Sequence
) -> RationalizeResult:
    """Effectivity over Q(sqrt d), then a rational certificate when possible.

    If the target's irrational part is the zero class, a field solution is
    perturbed to rational coefficients. A nonzero irrational part obstructs
    any rational certificate. Infeasible systems return a separating class
    with quadratic-field coordinates.
    """
    gens = [g.cls if isinstance(g, CurveClass) else g for g in generators]
    labels = tuple(g.name if isinstance(g, CurveClass) else str(g) for g in generators)
    d = radicand_of(target.coords)
    if d is None:
        d = radicand_of(x for g in gens for x in g.coords)
    for g in gens:
        if radicand_of(g.coords) is not None:
            raise PreconditionError("generators must be rational classes")
    res = feasibility([g.coords for g in gens], target.coords)
    if not res.feasible:
        ginv = linalg.inverse([list(r) for r in lattice.gram])
        h = lattice.cls(linalg.matvec(ginv, res.farkas))
        if any(lattice.pair(h, g) < 0 for g in gens) or not lattice.pair(h, target) < 0:
            raise ConsistencyError("separator failed re-verification")
        return RationalizeResult("infeasible", separator=h, message="no nonnegative combination over the field")
    x = tuple(res.x)
    irr = [irrational_part(t) for t in target.coords]
    if any(v != 0 for v in irr):
        return RationalizeResult(
            "irrational-obstruction", field_coefficients=x,
            message="irrational part obstructs: the irrational component of the target is not numerically trivial",
        )
    coeffs = rationalize_coefficients(x, d) if d is not None else tuple(Fraction(v) for v in x)
    rat_target = lattice.cls([rational_part(t) for t in target.coords])
    cert = EffectivityCertificate(tuple(gens), coeffs, rat_target, labels)
    if not cert.is_valid():
        raise ConsistencyError("rationalized certificate failed re-verification")
    return RationalizeResult("rational", certificate=cert, field_coefficients=x, message="rational certificate")

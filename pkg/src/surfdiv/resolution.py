"""Q-factorial surfaces with isolated singularities, via minimal resolutions.

A singular surface X is represented only through its minimal resolution Y
and the curves contracted by h: Y -> X. Classes on X are coordinates in an
integral basis of the orthogonal complement of the exceptional span, and the
pairing on X is the pullback pairing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .cones import EffectivityCertificate, is_pseudo_effective
from .errors import ConsistencyError, PreconditionError
from .lattice import CurveClass, DivisorClass, SurfaceLattice, check_signature
from .models import BlowupChain, Point, blow_up, class_label, hirzebruch
from .nonvanishing import AlgorithmTrace, nonvanish


@dataclass
class SingularSurface:
    resolution: SurfaceLattice
    exceptional: tuple  # CurveClass
    exceptional_indices: tuple
    b_coeffs: tuple
    quotient_basis: tuple  # DivisorClass on the resolution
    quotient: SurfaceLattice  # classes on X, curves are images of non-exceptional curves
    curve_sources: tuple  # quotient curve i is the image of resolution curve curve_sources[i]

    @property
    def B(self) -> DivisorClass:
        acc = self.resolution.zero()
        for c, b in zip(self.exceptional, self.b_coeffs):
            acc = acc + b * c.cls
        return acc

    @property
    def canonical(self) -> DivisorClass:
        """K_X in quotient coordinates."""
        return self.quotient.canonical

    def cls(self, coords) -> DivisorClass:
        return self.quotient.cls(coords)

    def is_smooth(self) -> bool:
        return not self.exceptional


@dataclass(frozen=True)
class NumCheck:
    image: DivisorClass
    input_trivial: bool
    image_trivial: bool

    @property
    def consistent(self) -> bool:
        return self.image_trivial or not self.input_trivial


def _resolve_exceptional(resolution: SurfaceLattice, exceptional) -> list[tuple[int, CurveClass]]:
    out = []
    for item in exceptional:
        if isinstance(item, str):
            c = resolution.curve_by_name(item)
        elif isinstance(item, CurveClass):
            c = item
        else:
            c = resolution.curves[int(item)]
        idx = resolution.curve_index(c.cls)
        if idx is None:
            raise PreconditionError(f"exceptional curve {c.name} is not a listed curve")
        out.append((idx, resolution.curves[idx]))
    return out


def build_singular(resolution: SurfaceLattice, exceptional: Sequence) -> SingularSurface:
    """Solve the discrepancy system K_Y + B = h^*K_X and set up quotient coordinates.

    ``exceptional`` entries may be curve names, curve indices or CurveClass
    objects from the resolution's curve list.
    """
    found = _resolve_exceptional(resolution, exceptional)
    if len({i for i, _ in found}) != len(found):
        raise PreconditionError("exceptional curve listed twice")
    classes = [c.cls for _, c in found]
    K = resolution.canonical
    for _, c in found:
        if resolution.pair(K, c.cls) < 0:
            raise PreconditionError(f"resolution not minimal: {c.name} has K.E < 0")
    if classes:
        gram = resolution.gram_of(classes)
        if not linalg.is_negative_definite(gram):
            raise PreconditionError("exceptional Gram matrix is not negative definite")
        b = linalg.solve(gram, [-resolution.pair(K, e) for e in classes])
    else:
        b = []
    if any(x < 0 for x in b):
        raise ConsistencyError("negative discrepancy coefficient on a minimal resolution")
    if classes:
        functionals = [[resolution.pair(resolution.unit(i), e) for i in range(resolution.rank)] for e in classes]
        basis = [resolution.cls(v) for v in linalg.integer_kernel(functionals, resolution.rank)]
    else:
        basis = [resolution.unit(i) for i in range(resolution.rank)]
    rows = [list(v.coords) for v in basis]
    left = linalg.left_inverse(rows)
    gram_x = [[resolution.pair(u, v) for v in basis] for u in basis]
    KB = K + sum((x * e for x, e in zip(b, classes)), resolution.zero())
    K_x = linalg.matvec(left, KB.coords)
    if linalg.matvec(linalg.transpose(rows), K_x) != list(KB.coords):
        raise ConsistencyError("K + B is not orthogonal to the exceptional curves")
    exc_idx = {i for i, _ in found}
    sources, curves_x, seen = [], [], set()
    labels = [class_label(v.coords, resolution.basis_labels) for v in basis]
    quotient = SurfaceLattice(gram_x, K_x, (), model_tag="custom", basis_labels=labels, check=False)
    check_signature(quotient)
    s = SingularSurface(resolution, tuple(c for _, c in found), tuple(i for i, _ in found), tuple(b),
                        tuple(basis), quotient, ())
    for i, c in enumerate(resolution.curves):
        if i in exc_idx:
            continue
        img = tuple(_project(s, c.cls))
        if all(x == 0 for x in img) or img in seen:
            continue
        seen.add(img)
        sources.append(i)
        curves_x.append(CurveClass(quotient.cls(img), 0, c.name))
    quotient.curves = tuple(curves_x)
    s.curve_sources = tuple(sources)
    return s


def _project(s: SingularSurface, v: DivisorClass) -> list:
    lat = s.resolution
    classes = [e.cls for e in s.exceptional]
    w = v
    if classes:
        z = linalg.solve(lat.gram_of(classes), [lat.pair(v, e) for e in classes])
        for zi, e in zip(z, classes):
            w = w - zi * e
    rows = [list(b.coords) for b in s.quotient_basis]
    return linalg.matvec(linalg.left_inverse(rows), w.coords)


def pullback(s: SingularSurface, x) -> DivisorClass:
    """h^* of a class on X given in quotient coordinates."""
    coords = x.coords if isinstance(x, DivisorClass) else x
    if len(coords) != len(s.quotient_basis):
        raise PreconditionError("class length does not match the quotient rank")
    acc = s.resolution.zero()
    for a, b in zip(coords, s.quotient_basis):
        acc = acc + Fraction(a) * b
    return acc


def pushforward(s: SingularSurface, v: DivisorClass) -> DivisorClass:
    """h_* on numerical classes: drop exceptional components, read quotient coordinates."""
    return s.quotient.cls(_project(s, v))


def pushforward_numcheck(s: SingularSurface, v: DivisorClass) -> NumCheck:
    """Push forward and report whether a numerically trivial input stays trivial."""
    img = pushforward(s, v)
    report = NumCheck(img, v.is_zero(), img.is_zero())
    if not report.consistent:
        raise ConsistencyError("pushforward of a numerically trivial class is nonzero")
    return report


@dataclass
class SingularResult:
    certificate: EffectivityCertificate  # on X
    resolution_certificate: EffectivityCertificate  # on the resolution, for K_Y + L~
    trace: AlgorithmTrace
    L_tilde: DivisorClass


def nonvanish_singular(s: SingularSurface, L) -> SingularResult:
    """K_X + L numerically effective, via the pipeline on the resolution with L~ = B + h^*L."""
    L = L if isinstance(L, DivisorClass) else s.quotient.cls(L)
    lat = s.resolution
    hL = pullback(s, L)
    if not is_pseudo_effective(lat, hL):
        raise PreconditionError("h^*L is not pseudo-effective")
    L_tilde = s.B + hL
    cert_y, trace = nonvanish(lat, L_tilde)
    target_x = s.quotient.canonical + L
    if pushforward(s, lat.canonical + L_tilde) != target_x:
        raise ConsistencyError("pushforward of K_Y + L~ differs from K_X + L")
    coeffs: dict[int, Fraction] = {}
    where = {src: i for i, src in enumerate(s.curve_sources)}
    for idx, a in zip(cert_y.indices, cert_y.coefficients):
        if idx in s.exceptional_indices:
            continue
        img = pushforward(s, lat.curves[idx].cls)
        if img.is_zero():
            continue
        j = where.get(idx)
        if j is None:  # image coincides with an earlier curve's image
            j = next(k for k, c in enumerate(s.quotient.curves) if c.cls == img)
        coeffs[j] = coeffs.get(j, Fraction(0)) + a
    items = sorted((j, a) for j, a in coeffs.items() if a)
    curves = s.quotient.curves
    cert = EffectivityCertificate(
        generators=tuple(curves[j].cls for j, _ in items),
        coefficients=tuple(a for _, a in items),
        target=target_x,
        labels=tuple(curves[j].name for j, _ in items),
        indices=tuple(j for j, _ in items),
    )
    if not cert.is_valid():
        raise ConsistencyError("pushed-forward certificate does not sum to K_X + L")
    return SingularResult(cert, cert_y, trace, L_tilde)


def anti_canonical(s: SingularSurface) -> SingularResult:
    """-K_X numerically effective when it is pseudo-effective (run with L = -2K_X)."""
    minus_k = -s.quotient.canonical
    if not is_pseudo_effective(s.resolution, pullback(s, minus_k)):
        raise PreconditionError("-K_X is not pseudo-effective")
    result = nonvanish_singular(s, 2 * minus_k)
    if result.certificate.target != minus_k:
        raise ConsistencyError("anti-canonical certificate has the wrong class")
    return result


def _corner_chains(n: int, depth: int):
    """All corner-blowup sequences of a given length on F_n, in a fixed order."""
    def grow(cycle, pts):
        if len(pts) == depth:
            yield tuple(pts)
            return
        for i in range(len(cycle)):
            a, b = cycle[i], cycle[(i + 1) % len(cycle)]
            k = len(pts) + 1
            yield from grow(cycle[: i + 1] + [f"E{k}"] + cycle[i + 1:], pts + [Point.at(a, b)])

    yield from grow(["f0", "s", "f1", "t"], [])


def toric_singular_models(count: int = 20, max_points: int = 3) -> list[SingularSurface]:
    """Singular surfaces from toric blowups of F_n, n = 0..3.

    The exceptional set is every boundary curve of square -2 or -3; models
    whose set is empty, not negative definite, or already seen (same
    boundary self-intersection cycle) are skipped.
    """
    out: list[SingularSurface] = []
    seen = set()
    for depth in range(0, max_points + 1):
        for n in range(0, 4):
            for pts in _corner_chains(n, depth):
                lat = blow_up(BlowupChain("hirzebruch", n, pts)) if pts else hirzebruch(n)
                names = lat.boundary if pts else ("f0", "s", "f1", "t")
                cyc = []
                for nm in names:
                    try:
                        cyc.append((nm, lat.square(lat.curve_by_name(nm).cls)))
                    except KeyError:  # f0/f1 collapse to one class on F_n
                        cyc.append((nm, lat.square(lat.curve_by_name("f").cls)))
                squares = tuple(sq for _, sq in cyc)
                key = min(squares[i:] + squares[:i] for i in range(len(squares)))
                rev = tuple(reversed(squares))
                key = min(key, min(rev[i:] + rev[:i] for i in range(len(rev))))
                if key in seen:
                    continue
                exc = []
                for nm, sq in cyc:
                    if sq in (-2, -3):
                        c = lat.curve_by_name(nm) if any(c.name == nm for c in lat.curves) else None
                        if c is not None and c not in exc:
                            exc.append(c)
                if not exc or len(exc) == len(cyc):
                    continue
                if not linalg.is_negative_definite(lat.gram_of([c.cls for c in exc])):
                    continue
                seen.add(key)
                out.append(build_singular(lat, exc))
                if len(out) == count:
                    return out
    return out

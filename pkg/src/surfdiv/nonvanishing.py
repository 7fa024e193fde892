"""Effective representatives of K + L on smooth surfaces.

Given a pseudo-effective L with K + L pseudo-effective, :func:`nonvanish`
builds nonnegative curve coefficients for K + L by a double descent: the
Picard rank drops with every contraction, and inside one surface the number
of components of the negative part of L drops with every shrink of L.

Each level of the descent goes through three phases:

1. split off Q, the common part of the negative parts of L and K + L;
2. while some extremal ray is (K + L)-negative, contract it (always a
   (-1)-curve) and continue on the blown-down surface;
3. with K + L nef, shrink L along N' (the class on Supp N with N'.C = -1)
   until either N vanishes (the cone LP finishes) or a ray becomes
   critical; that ray is contracted, either to a smaller surface or as a
   P^1-fibration whose fiber then carries the whole class.

Descending is iterative; on the way back up the certificate is pulled back
through every blowdown and the split-off classes are added back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .cones import (
    EffectivityCertificate,
    ExtremalRay,
    certificate_from_coeffs,
    is_nef,
    is_pseudo_effective,
    negative_extremal_rays,
    zariski_decompose,
)
from .errors import ConsistencyError, PreconditionError
from .lattice import CurveClass, DivisorClass, SurfaceLattice, lattice_to_data, orthogonal_complement_basis
from .models import class_label
from .scalars import fmt, lcm_denominator


# --- data types ---------------------------------------------------------------


@dataclass
class ContractionMap:
    kind: str  # "blowdown" or "fibration"
    source: SurfaceLattice
    contracted: CurveClass
    contracted_index: int
    target: SurfaceLattice | None = None
    pushforward: list | None = None  # (rank-1) x rank
    pullback: list | None = None  # rank x (rank-1), columns are the basis of e-perp
    curve_map: tuple = ()  # target curve i = (1/mult) * push(source curve src)
    aux_index: int | None = None
    section_pairing: Fraction | None = None

    def push(self, v: DivisorClass) -> DivisorClass:
        if self.kind != "blowdown":
            raise PreconditionError("pushforward to a curve is the degree functional; use degree()")
        return self.target.cls(linalg.matvec(self.pushforward, v.coords))

    def pull(self, w: DivisorClass) -> DivisorClass:
        return self.source.cls(linalg.matvec(self.pullback, w.coords))

    def degree(self, v: DivisorClass, aux: int | None = None) -> Fraction:
        a = self.source.curves[self.aux_index if aux is None else aux].cls
        return self.source.pair(v, a) / self.source.pair(self.contracted.cls, a)

    def pull_coefficients(self, coeffs: dict) -> dict:
        """Pull a certificate on the target back to curves of the source."""
        e = self.contracted.cls
        out: dict[int, Fraction] = {}
        for i, a in coeffs.items():
            src, mult = self.curve_map[i]
            w = a / mult
            out[src] = out.get(src, Fraction(0)) + w
            k = self.source.pair(self.source.curves[src].cls, e)
            if k:
                out[self.contracted_index] = out.get(self.contracted_index, Fraction(0)) + w * k
        return {i: a for i, a in out.items() if a != 0}


@dataclass
class TraceStep:
    kind: str
    level: int
    data: dict


@dataclass
class AlgorithmTrace:
    steps: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    def of_kind(self, kind: str) -> list[TraceStep]:
        return [s for s in self.steps if s.kind == kind]


def pairs(coeffs: dict) -> tuple:
    return tuple(sorted((int(i), Fraction(a)) for i, a in coeffs.items() if a != 0))


# --- elementary operations ----------------------------------------------------


def nprime_coefficients(lattice: SurfaceLattice, support: Sequence[CurveClass]) -> tuple:
    if not support:
        raise PreconditionError("N' needs a nonempty support")
    gram = lattice.gram_of([c.cls for c in support])
    if not linalg.is_negative_definite(gram):
        raise PreconditionError("support Gram matrix is not negative definite")
    a = linalg.solve(gram, [Fraction(-1)] * len(support))
    if any(x <= 0 for x in a):
        raise ConsistencyError("support mismatch: N' has a nonpositive coefficient")
    return tuple(a)


def solve_nprime(lattice: SurfaceLattice, n_support: Sequence[CurveClass]) -> DivisorClass:
    """The class N' on the given support with N'.C = -1 for each support curve."""
    a = nprime_coefficients(lattice, n_support)
    total = lattice.zero()
    for c, x in zip(n_support, a):
        total = total + x * c.cls
    return total


def compute_c(n_coeffs: Sequence, nprime_coeffs: Sequence) -> Fraction:
    """Largest c with N - cN' >= 0; at least one coefficient becomes zero."""
    if not n_coeffs or len(n_coeffs) != len(nprime_coeffs):
        raise PreconditionError("need equal-length nonempty coefficient vectors")
    if any(x <= 0 for x in n_coeffs) or any(x <= 0 for x in nprime_coeffs):
        raise PreconditionError("coefficients must be positive")
    return min(Fraction(n) / Fraction(p) for n, p in zip(n_coeffs, nprime_coeffs))


def clearing_denominator(KL: DivisorClass, cnprime: DivisorClass) -> int:
    """Smallest m with m(K+L) and m*c*N' integral."""
    return lcm_denominator(list(KL.coords) + list(cnprime.coords))


def in_dcc_set(lam: Fraction, a: Fraction, b: Fraction, m: int) -> bool:
    """lam = a/(a+b) with a, b integers, a >= 0, 0 < b <= 4m."""
    return (
        a.denominator == 1 and b.denominator == 1 and a >= 0 and 0 < b <= 4 * m and lam == a / (a + b)
    )


def lambda_for_ray(
    lattice: SurfaceLattice, KL: DivisorClass, theta: DivisorClass, ray, m: int | None = None
) -> Fraction:
    """The lambda in [0, 1) with (K + L - lambda*(KL - theta)).D = 0.

    ``KL`` is K + L and ``theta`` is K + L - cN'. When ``m`` is given (or
    derivable) the value is also checked to lie in {a/(a+b) : 0 < b <= 4m}.
    """
    gen = ray.generator if isinstance(ray, ExtremalRay) else ray
    d = gen.cls if isinstance(gen, CurveClass) else gen
    kd = lattice.pair(KL, d)
    td = lattice.pair(theta, d)
    if kd < 0:
        raise PreconditionError(f"(K+L).D = {fmt(kd)} is negative")
    if not td < 0:
        raise PreconditionError(f"theta.D = {fmt(td)} is not negative")
    lam = kd / (kd - td)
    if not 0 <= lam < 1:
        raise ConsistencyError(f"lambda {fmt(lam)} outside [0, 1)")
    if m is None:
        m = clearing_denominator(KL, KL - theta)
    if not in_dcc_set(lam, m * kd, -m * td, m):
        raise ConsistencyError(f"lambda {fmt(lam)} is not of the form a/(a+b) with 0 < b <= {4 * m}")
    return lam


def contract(lattice: SurfaceLattice, ray) -> ContractionMap:
    """Contract a K-negative extremal ray: blowdown of a (-1)-curve or a P^1-fibration."""
    gen = ray.generator if isinstance(ray, ExtremalRay) else ray
    index = ray.index if isinstance(ray, ExtremalRay) else lattice.curve_index(gen.cls)
    e = gen.cls
    K = lattice.canonical
    ke = lattice.pair(K, e)
    e2 = lattice.square(e)
    if not ke < 0:
        raise PreconditionError(f"ray {gen.name} is not K-negative (K.e = {fmt(ke)})")
    if e2 > 0:
        raise PreconditionError("Mori-fiber-to-point: ray has positive square (Picard rank one target)")
    if e2 < -1 or (e2 == -1 and ke != -1):
        raise PreconditionError(
            f"non-contractible negative ray on smooth model: e^2 = {fmt(e2)}, K.e = {fmt(ke)}"
        )
    if e2 == 0:
        if ke != -2:
            raise PreconditionError(f"fiber class must have K.f = -2, got {fmt(ke)}")
        ordered = sorted(range(len(lattice.curves)), key=lambda i: lattice.curves[i].cls.key())
        aux = next((i for i in ordered if lattice.pair(lattice.curves[i].cls, e) > 0), None)
        if aux is None:
            raise ConsistencyError("no curve meets the fiber positively")
        return ContractionMap(
            "fibration", lattice, gen, index, aux_index=aux,
            section_pairing=lattice.pair(lattice.curves[aux].cls, e),
        )
    basis = orthogonal_complement_basis(lattice, e)
    r = lattice.rank
    rows = [list(b.coords) for b in basis]
    pull = linalg.transpose(rows)
    gram_t = [[lattice.pair(a, b) for b in basis] for a in basis]
    # v -> v + (v.e) e lands in e-perp; then take coordinates in the basis
    ge = [lattice.pair(lattice.unit(i), e) for i in range(r)]
    proj = [[Fraction(int(i == j)) + e.coords[i] * ge[j] for j in range(r)] for i in range(r)]
    push = linalg.matmul(linalg.left_inverse(rows), proj)
    K_t = linalg.matvec(push, K.coords)
    curves_t = []
    cmap = []
    seen = set()
    for i, c in enumerate(lattice.curves):
        if i == index or c.cls == e:
            continue
        img = linalg.matvec(push, c.cls.coords)
        if all(x == 0 for x in img):
            continue
        prim = linalg.primitive(img)
        mult = Fraction(img[next(k for k, x in enumerate(img) if x != 0)]) / prim[
            next(k for k, x in enumerate(prim) if x != 0)
        ]
        cand = None
        for vec, m in ((prim, mult), ([int(x) for x in img], Fraction(1))):
            sq = linalg.dot(vec, linalg.matvec(gram_t, vec))
            kc = linalg.dot(K_t, linalg.matvec(gram_t, vec))
            g = (sq + kc) / 2 + 1
            if g.denominator == 1 and g >= 0 and (m == 1 or list(vec) == prim):
                if list(vec) == linalg.primitive(vec):
                    cand = (vec, int(g), m)
                    break
        if cand is None:
            raise ConsistencyError(f"image of curve {c.name} has no consistent primitive class")
        vec, g, m = cand
        key = tuple(vec)
        if key in seen:
            continue
        seen.add(key)
        curves_t.append((vec, g, c.name))
        cmap.append((i, m))
    labels = [class_label(b.coords, lattice.basis_labels) for b in basis]
    tag = lattice.model_tag if len(basis) > 1 else "custom"
    target = SurfaceLattice(gram_t, K_t, curves_t, model_tag=tag, basis_labels=labels)
    return ContractionMap(
        "blowdown", lattice, gen, index, target=target, pushforward=push, pullback=pull, curve_map=tuple(cmap)
    )


# --- the pipeline ---------------------------------------------------------------


@dataclass
class _Frame:
    level: int
    lattice: SurfaceLattice
    addbacks: list = field(default_factory=list)
    contraction: ContractionMap | None = None


class _Engine:
    def __init__(self, lattice: SurfaceLattice):
        self.trace = AlgorithmTrace()
        self.root = lattice
        self.measures: list[tuple[int, int]] = []

    def emit(self, kind: str, level: int, **data):
        data["seq"] = len(self.trace.steps)
        self.trace.steps.append(TraceStep(kind, level, data))

    def fail(self, message: str):
        raise ConsistencyError(message, trace=self.trace)

    def run(self, L: DivisorClass) -> dict:
        frames: list[_Frame] = []
        lat = self.root
        level = 0
        while True:
            frame = _Frame(level, lat)
            frames.append(frame)
            outcome = self._level(frame, L)
            if outcome[0] == "base":
                coeffs = outcome[1]
                break
            cm, L = outcome[1], outcome[2]
            frame.contraction = cm
            lat = cm.target
            level += 1
        for frame in reversed(frames):
            if frame is not frames[-1]:
                before = coeffs
                coeffs = frame.contraction.pull_coefficients(coeffs)
                self.emit("pullback", frame.level, before=pairs(before), after=pairs(coeffs))
            for source, added in reversed(frame.addbacks):
                result = dict(coeffs)
                for i, a in added.items():
                    result[i] = result.get(i, Fraction(0)) + a
                result = {i: a for i, a in result.items() if a != 0}
                if any(a < 0 for a in result.values()):
                    self.fail(f"negative coefficient after adding back {source}")
                self.emit("recombine", frame.level, source=source, added=pairs(added), result=pairs(result))
                coeffs = result
        return coeffs

    def _contract_step(self, frame, cm: ContractionMap, phase: int, push_class, extra: dict):
        data = dict(phase=phase, branch=cm.kind, ray=cm.contracted_index)
        data.update(extra)
        if cm.kind == "blowdown":
            data.update(
                push=tuple(push_class.coords),
                target=lattice_to_data(cm.target),
                pushforward=[list(r) for r in cm.pushforward],
                pullback=[list(r) for r in cm.pullback],
                curve_map=tuple(cm.curve_map),
            )
        else:
            data.update(aux=cm.aux_index)
        self.emit("contract", frame.level, **data)

    def _level(self, frame: _Frame, L: DivisorClass):
        lat = frame.lattice
        lv = frame.level
        K = lat.canonical
        self.emit("enter", lv, L=tuple(L.coords), rank=lat.rank)
        if lat.rank == 1:
            KL = K + L
            gen = lat.curves[0].cls
            t = KL.coords[0] / gen.coords[0]
            if t < 0:
                self.fail("rank one: K + L is not a nonnegative multiple of the generator")
            coeffs = {0: t} if t else {}
            self.emit("base-case", lv, case="rank-one", cls=tuple(KL.coords), coeffs=pairs(coeffs))
            return ("base", coeffs)

        # phase 1: split off Q = N(L) ^ N(K+L)
        zL = zariski_decompose(lat, L)
        self.emit("zariski", lv, role="L", target=tuple(L.coords), P=tuple(zL.P.coords), N=pairs(zL.n_dict()))
        zK = zariski_decompose(lat, K + L)
        self.emit("zariski", lv, role="KL", target=tuple((K + L).coords), P=tuple(zK.P.coords), N=pairs(zK.n_dict()))
        nL, nK = zL.n_dict(), zK.n_dict()
        Q = {i: min(nL[i], nK[i]) for i in nL if i in nK}
        Lbar = L - lat.combination(Q)
        rest_L = {i for i in nL if nL[i] - Q.get(i, 0) != 0}
        rest_K = {i for i in nK if nK[i] - Q.get(i, 0) != 0}
        if rest_L & rest_K:
            self.fail("supports of N - Q and N' - Q intersect")
        KLbar = K + Lbar
        for i in rest_L:
            if lat.pair(KLbar, lat.curves[i].cls) < 0:
                self.fail(f"(K+L).C < 0 on negative-part component {lat.curves[i].name}")
        frame.addbacks.append(("Q", Q))
        self.emit("split-Q", lv, Q=pairs(Q), Lbar=tuple(Lbar.coords))

        # phase 2: contract (K+L)-negative rays
        neg = negative_extremal_rays(lat, KLbar)
        if neg:
            ray = neg[0]
            e = ray.generator.cls
            if lat.square(e) != -1 or lat.pair(K, e) != -1:
                self.fail(f"(K+L)-negative ray {ray.generator.name} is not a (-1)-curve")
            cm = contract(lat, ray)
            ke = lat.pair(KLbar, e)
            excess = {ray.index: -ke}
            frame.addbacks.append(("E", excess))
            self._contract_step(frame, cm, 2, Lbar, {"KL_dot": ke, "excess": pairs(excess)})
            return ("down", cm, cm.push(Lbar))

        # phase 3: K + L nef
        L = Lbar
        while True:
            KL = K + L
            self.emit("phase3", lv, L=tuple(L.coords))
            z = zariski_decompose(lat, L)
            measure = (lat.rank, len(z.support))
            if self.measures and not measure < self.measures[-1]:
                self.fail(f"termination measure {measure} did not decrease from {self.measures[-1]}")
            self.measures.append(measure)
            self.emit("zariski", lv, role="phase3", target=tuple(L.coords), P=tuple(z.P.coords),
                      N=pairs(z.n_dict()), measure=measure)
            if not z.support:
                res = is_pseudo_effective(lat, KL)
                if not res:
                    self.fail("K + P is not in the cone of curves")
                coeffs = res.certificate.as_dict()
                self.emit("base-case", lv, case="lp", cls=tuple(KL.coords), coeffs=pairs(coeffs))
                return ("base", coeffs)
            a = nprime_coefficients(lat, z.N_support)
            c = compute_c(z.N_coeffs, a)
            cn = {i: c * x for i, x in zip(z.support, a)}
            cN = lat.combination(cn)
            m = clearing_denominator(KL, cN)
            self.emit("nprime", lv, support=tuple(z.support), nprime=tuple(a), c=c, m=m)
            theta = KL - cN
            negs = negative_extremal_rays(lat, theta)
            if not negs:
                L = L - cN
                frame.addbacks.append(("shrink", cn))
                self.emit("shrink", lv, added=pairs(cn), L=tuple(L.coords))
                continue
            rows = []
            delta = z.N - cN
            for r in negs:
                d = r.generator.cls
                lam = lambda_for_ray(lat, KL, theta, r, m)
                bound = lat.pair(K + delta, d)
                if not -4 <= bound < 0:
                    self.fail(f"ray {r.generator.name}: (K + N - cN').D = {fmt(bound)} outside [-4, 0)")
                rows.append((r.index, lat.pair(KL, d), lat.pair(theta, d), lam))
            lam0 = min(row[3] for row in rows)
            chosen = next(r for r, row in zip(negs, rows) if row[3] == lam0)
            added = {i: lam0 * x for i, x in cn.items()}
            L_new = L - lat.combination(added)
            if not is_nef(lat, K + L_new):
                self.fail("K + L' is not nef after the lambda shrink")
            if lat.pair(K + L_new, chosen.generator.cls) != 0:
                self.fail("(K + L').D is not zero on the critical ray")
            frame.addbacks.append(("lambda", added))
            self.emit("lambda", lv, rays=tuple(rows), chosen=chosen.index, lam0=lam0, c=c, m=m,
                      added=pairs(added), L=tuple(L_new.coords))
            L = L_new
            cm = contract(lat, chosen)
            if cm.kind == "fibration":
                if lat.rank != 2:
                    self.fail("fibration ray on a surface of Picard rank > 2")
                KLn = K + L
                t = cm.degree(KLn)
                others = [i for i, cc in enumerate(lat.curves)
                          if i != cm.aux_index and lat.pair(cc.cls, chosen.generator.cls) > 0]
                if others and cm.degree(KLn, others[0]) != t:
                    self.fail("fiber degree depends on the auxiliary class")
                if t < 0 or KLn != t * chosen.generator.cls:
                    self.fail("K + L' is not a nonnegative multiple of the fiber")
                self._contract_step(frame, cm, 3, L, {})
                coeffs = {chosen.index: t} if t else {}
                self.emit("fibration-degree", lv, fiber=chosen.index, aux=cm.aux_index, t=t,
                          cls=tuple(KLn.coords), coeffs=pairs(coeffs))
                return ("base", coeffs)
            self._contract_step(frame, cm, 3, L, {})
            return ("down", cm, cm.push(L))


def nonvanish(lattice: SurfaceLattice, L: DivisorClass) -> tuple[EffectivityCertificate, AlgorithmTrace]:
    """Certificate that K + L is numerically effective, with its trace."""
    if lattice.model_tag == "abelian-product":
        raise PreconditionError("non-vanishing pipeline needs a generator model")
    if not is_pseudo_effective(lattice, L):
        raise PreconditionError("L is not pseudo-effective")
    KL = lattice.canonical + L
    if not is_pseudo_effective(lattice, KL):
        raise PreconditionError("K + L is not pseudo-effective")
    engine = _Engine(lattice)
    coeffs = engine.run(L)
    cert = certificate_from_coeffs(lattice, coeffs, KL)
    if not cert.is_valid():
        raise ConsistencyError("assembled certificate does not sum to K + L", trace=engine.trace)
    return cert, engine.trace

"""Independent replay of a non-vanishing trace.

The checker trusts only the lattice layer (Gram pairing, signature and
adjunction checks) and exact linear algebra. Every number recorded in the
trace is recomputed or re-verified, and the level structure is replayed on an
explicit stack. No cone LP, Zariski routine or contraction code is reused.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .lattice import DivisorClass, SurfaceLattice, lattice_from_data
from .scalars import lcm_denominator


@dataclass
class VerifyResult:
    ok: bool
    failed_step: int | None = None
    step_kind: str = ""
    reason: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "verified"
        where = f"step {self.failed_step} ({self.step_kind})" if self.failed_step is not None else "certificate"
        return f"rejected at {where}: {self.reason}"


class _Reject(Exception):
    pass


def _vec(x) -> tuple:
    return tuple(Fraction(v) for v in x)


def _coeffs(x) -> dict:
    out = {}
    for i, a in x:
        i, a = int(i), Fraction(a)
        if i in out:
            raise _Reject(f"duplicate generator index {i}")
        if a != 0:
            out[i] = a
    return out


def _require(cond: bool, reason: str):
    if not cond:
        raise _Reject(reason)


@dataclass
class _Level:
    lattice: SurfaceLattice
    L: DivisorClass
    addbacks: list = field(default_factory=list)
    contraction: dict | None = None
    stage: str = "enter"
    zariski: dict = field(default_factory=dict)
    nprime: dict | None = None


class _Checker:
    def __init__(self, lattice: SurfaceLattice, target: DivisorClass):
        self.root = lattice
        self.levels: list[_Level] = []
        self.pending_L: DivisorClass = target - lattice.canonical
        self.result: dict | None = None
        self.unwinding = False
        self.measure = None

    # -- helpers -----------------------------------------------------------

    def level(self, step) -> _Level:
        _require(0 <= step.level < len(self.levels), f"level {step.level} is not active")
        return self.levels[step.level]

    def cls(self, lat: SurfaceLattice, coords) -> DivisorClass:
        coords = _vec(coords)
        _require(len(coords) == lat.rank, "class length does not match lattice rank")
        return lat.cls(coords)

    def known(self, lat: SurfaceLattice, coeffs: dict):
        for i in coeffs:
            _require(0 <= i < len(lat.curves), f"unknown generator {i}")

    def combo(self, lat: SurfaceLattice, coeffs: dict) -> DivisorClass:
        self.known(lat, coeffs)
        return lat.combination(coeffs)

    def nef(self, lat: SurfaceLattice, d: DivisorClass, what: str):
        for c, v in zip(lat.curves, lat.pair_with_curves(d)):
            _require(v >= 0, f"{what} is not nef: pairing {v} with {c.name}")

    def check_zariski(self, lat: SurfaceLattice, d: DivisorClass, P, N: dict):
        P = self.cls(lat, P)
        self.known(lat, N)
        _require(all(a > 0 for a in N.values()), "nonpositive Zariski coefficient")
        _require(P + lat.combination(N) == d, "P + N differs from the decomposed class")
        self.nef(lat, P, "P")
        for i in N:
            _require(lat.pair(P, lat.curves[i].cls) == 0, f"P.{lat.curves[i].name} != 0")
        support = sorted(N)
        if support:
            gram = lat.gram_of([lat.curves[i].cls for i in support])
            _require(linalg.is_negative_definite(gram), "negative part support is not negative definite")
        return P

    # -- step handlers -------------------------------------------------------

    def step_enter(self, step):
        _require(not self.unwinding, "enter after unwinding started")
        _require(step.level == len(self.levels), f"enter at level {step.level}, expected {len(self.levels)}")
        if step.level == 0:
            lat = self.root
        else:
            parent = self.levels[-1]
            _require(parent.contraction is not None and parent.contraction["branch"] == "blowdown",
                     "descent without a blowdown")
            lat = parent.contraction["target"]
        L = self.cls(lat, step.data["L"])
        _require(L.coords == self.pending_L.coords, "level input differs from the pushed-forward class")
        _require(int(step.data["rank"]) == lat.rank, "rank mismatch")
        self.levels.append(_Level(lat, L))

    def step_base_case(self, step):
        lv = self.level(step)
        lat = lv.lattice
        KL = lat.canonical + lv.L
        _require(self.cls(lat, step.data["cls"]) == KL, "base case class is not K + L")
        coeffs = _coeffs(step.data["coeffs"])
        self.known(lat, coeffs)
        _require(all(a >= 0 for a in coeffs.values()), "negative coefficient in base case")
        _require(lat.combination(coeffs) == KL, "base case coefficients do not sum to K + L")
        case = step.data["case"]
        if case == "rank-one":
            _require(lv.stage == "enter" and lat.rank == 1, "rank-one base case on a larger lattice")
        elif case == "lp":
            _require(lv.stage == "zariski-phase3" and not lv.zariski.get("phase3"), "LP base case with N != 0")
        else:
            raise _Reject(f"unknown base case {case}")
        self.result = coeffs
        self.unwinding = True
        lv.stage = "done"

    def step_zariski(self, step):
        lv = self.level(step)
        lat = lv.lattice
        role = step.data["role"]
        d = self.cls(lat, step.data["target"])
        N = _coeffs(step.data["N"])
        if role == "L":
            _require(lv.stage == "enter", "misplaced zariski step")
            _require(d == lv.L, "decomposed class is not L")
        elif role == "KL":
            _require(lv.stage == "zariski-L", "misplaced zariski step")
            _require(d == lat.canonical + lv.L, "decomposed class is not K + L")
        elif role == "phase3":
            _require(lv.stage == "phase3", "misplaced zariski step")
            _require(d == lv.L, "decomposed class is not L")
            measure = (lat.rank, len(N))
            _require(tuple(step.data.get("measure", measure)) == measure, "termination measure misreported")
            _require(self.measure is None or measure < self.measure, "termination measure did not decrease")
            self.measure = measure
        else:
            raise _Reject(f"unknown zariski role {role}")
        self.check_zariski(lat, d, step.data["P"], N)
        lv.zariski[role] = N
        lv.stage = "zariski-" + role

    def step_split_q(self, step):
        lv = self.level(step)
        lat = lv.lattice
        _require(lv.stage == "zariski-KL", "misplaced split-Q step")
        nL, nK = lv.zariski["L"], lv.zariski["KL"]
        Q = {i: min(nL[i], nK[i]) for i in nL if i in nK}
        _require(_coeffs(step.data["Q"]) == Q, "Q is not the common part of the negative parts")
        rest_L = {i for i in nL if nL[i] != Q.get(i, 0)}
        rest_K = {i for i in nK if nK[i] != Q.get(i, 0)}
        _require(not rest_L & rest_K, "remaining negative parts share a component")
        Lbar = lv.L - lat.combination(Q)
        _require(self.cls(lat, step.data["Lbar"]) == Lbar, "L - Q misreported")
        lv.L = Lbar
        lv.addbacks.append(("Q", Q))
        lv.stage = "split"

    def _check_blowdown(self, lat: SurfaceLattice, e: DivisorClass, data) -> dict:
        target = lattice_from_data(data["target"])
        r = lat.rank
        push = [[Fraction(x) for x in row] for row in data["pushforward"]]
        pull = [[Fraction(x) for x in row] for row in data["pullback"]]
        _require(len(push) == r - 1 and all(len(row) == r for row in push), "pushforward has the wrong shape")
        _require(len(pull) == r and all(len(row) == r - 1 for row in pull), "pullback has the wrong shape")
        cols = linalg.transpose(pull)
        for col in cols:
            _require(all(x.denominator == 1 for x in col), "pullback basis is not integral")
            _require(lat.pair(lat.cls(col), e) == 0, "pullback basis is not orthogonal to e")
        gram_t = [[lat.pair(lat.cls(a), lat.cls(b)) for b in cols] for a in cols]
        _require([list(row) for row in target.gram] == gram_t, "target Gram is not the restricted form")
        ident = linalg.matmul(push, pull)
        _require(ident == linalg.identity(r - 1), "pushforward after pullback is not the identity")
        ge = [lat.pair(lat.unit(i), e) for i in range(r)]
        proj = [[Fraction(int(i == j)) + e.coords[i] * ge[j] for j in range(r)] for i in range(r)]
        _require(linalg.matmul(pull, push) == proj, "pullback after pushforward is not v + (v.e)e")
        K_t = linalg.matvec(push, lat.canonical.coords)
        _require(list(target.canonical.coords) == K_t, "target canonical class is not the pushforward of K")
        pulled_K = linalg.matvec(pull, K_t)
        _require(list(lat.canonical.coords) == [a + b for a, b in zip(pulled_K, e.coords)],
                 "pullback of K_target is not K - e")
        cmap = [(int(s), Fraction(m)) for s, m in data["curve_map"]]
        _require(len(cmap) == len(target.curves), "curve map does not cover the target curves")
        for (src, mult), c in zip(cmap, target.curves):
            _require(0 <= src < len(lat.curves), f"unknown generator {src}")
            _require(mult > 0, "nonpositive multiplicity in curve map")
            img = linalg.matvec(push, lat.curves[src].cls.coords)
            _require(img == [mult * x for x in c.cls.coords], f"curve {c.name} is not the image of its source")
        return {"branch": "blowdown", "target": target, "push": push, "pull": pull, "curve_map": cmap,
                "e": e, "index": None}

    def step_contract(self, step):
        lv = self.level(step)
        lat = lv.lattice
        d = step.data
        idx = int(d["ray"])
        _require(0 <= idx < len(lat.curves), f"unknown generator {idx}")
        e = lat.curves[idx].cls
        K = lat.canonical
        phase = int(d["phase"])
        if phase == 2:
            _require(lv.stage == "split", "phase 2 contraction out of order")
            KL = K + lv.L
            ke = lat.pair(KL, e)
            _require(ke < 0, "phase 2 ray is not (K+L)-negative")
            _require(Fraction(d["KL_dot"]) == ke, "(K+L).e misreported")
            excess = _coeffs(d["excess"])
            _require(excess == {idx: -ke}, "excess is not -((K+L).e) e")
            _require(all(a >= 0 for a in excess.values()), "negative excess")
        elif phase == 3:
            _require(lv.stage == "lambda" and lv.nprime and lv.nprime.get("chosen") == idx,
                     "phase 3 contraction of a ray that was not chosen")
        else:
            raise _Reject(f"unknown phase {phase}")
        branch = d["branch"]
        if branch == "blowdown":
            _require(lat.square(e) == -1 and lat.pair(K, e) == -1, "contracted ray is not a (-1)-curve")
            _require(self.cls(lat, d["push"]) == lv.L, "pushed class is not the current L")
            info = self._check_blowdown(lat, e, d)
            info["index"] = idx
            lv.contraction = info
            self.pending_L = info["target"].cls(linalg.matvec(info["push"], lv.L.coords))
            if phase == 2:
                lv.addbacks.append(("E", excess))
            lv.stage = "contracted"
        elif branch == "fibration":
            _require(phase == 3, "fibration outside phase 3")
            _require(lat.square(e) == 0 and lat.pair(K, e) == -2, "fiber class must have f^2 = 0, K.f = -2")
            _require(lat.rank == 2, "fibration on a surface of Picard rank > 2")
            aux = int(d["aux"])
            _require(0 <= aux < len(lat.curves), f"unknown generator {aux}")
            _require(lat.pair(lat.curves[aux].cls, e) > 0, "auxiliary curve does not meet the fiber")
            lv.contraction = {"branch": "fibration", "index": idx, "aux": aux}
            lv.stage = "fibration"
        else:
            raise _Reject(f"unknown branch {branch}")

    def step_phase3(self, step):
        lv = self.level(step)
        lat = lv.lattice
        _require(lv.stage in ("split", "shrink"), "phase 3 out of order")
        _require(self.cls(lat, step.data["L"]) == lv.L, "phase 3 class is not the current L")
        self.nef(lat, lat.canonical + lv.L, "K + L")
        lv.stage = "phase3"

    def step_nprime(self, step):
        lv = self.level(step)
        lat = lv.lattice
        N = lv.zariski.get("phase3")
        _require(lv.stage == "zariski-phase3" and N, "N' step without a negative part")
        support = [int(i) for i in step.data["support"]]
        _require(support == sorted(N), "N' support differs from Supp N")
        a = _vec(step.data["nprime"])
        _require(len(a) == len(support) and all(x > 0 for x in a), "N' coefficients must be positive")
        nprime = dict(zip(support, a))
        Np = lat.combination(nprime)
        for i in support:
            _require(lat.pair(Np, lat.curves[i].cls) == -1, f"N'.{lat.curves[i].name} != -1")
        c = Fraction(step.data["c"])
        _require(c == min(N[i] / nprime[i] for i in support), "c is not the largest shrink keeping N - cN' >= 0")
        cn = {i: c * x for i, x in nprime.items()}
        m = int(step.data["m"])
        KL = lat.canonical + lv.L
        expect_m = lcm_denominator(list(KL.coords) + list(lat.combination(cn).coords))
        _require(m == expect_m, "clearing denominator m misreported")
        lv.nprime = {"cn": cn, "m": m, "c": c, "N": N}
        lv.stage = "nprime"

    def step_shrink(self, step):
        lv = self.level(step)
        lat = lv.lattice
        _require(lv.stage == "nprime", "shrink out of order")
        cn = lv.nprime["cn"]
        _require(_coeffs(step.data["added"]) == cn, "shrink amount is not cN'")
        theta = lat.canonical + lv.L - lat.combination(cn)
        self.nef(lat, theta, "K + L - cN'")
        L = lv.L - lat.combination(cn)
        _require(self.cls(lat, step.data["L"]) == L, "shrunk class misreported")
        lv.L = L
        lv.addbacks.append(("shrink", cn))
        lv.stage = "shrink"

    def step_lambda(self, step):
        lv = self.level(step)
        lat = lv.lattice
        _require(lv.stage == "nprime", "lambda step out of order")
        d = step.data
        cn, m = lv.nprime["cn"], lv.nprime["m"]
        _require(Fraction(d["c"]) == lv.nprime["c"] and int(d["m"]) == m, "c or m differs from the N' step")
        K = lat.canonical
        KL = K + lv.L
        cN = lat.combination(cn)
        theta = KL - cN
        lam0 = Fraction(d["lam0"])
        chosen = int(d["chosen"])
        _require(0 <= chosen < len(lat.curves), f"unknown generator {chosen}")
        L_new = lv.L - lam0 * cN
        self.nef(lat, K + L_new, "K + L'")
        D = lat.curves[chosen].cls
        _require(lat.pair(K + L_new, D) == 0, "(K + L').D is not zero on the chosen ray")
        rows = [(int(i), Fraction(a), Fraction(b), Fraction(lam)) for i, a, b, lam in d["rays"]]
        _require(rows, "no negative rays listed")
        for i, kd, td, lam in rows:
            _require(0 <= i < len(lat.curves), f"unknown generator {i}")
            Di = lat.curves[i].cls
            _require(lat.pair(KL, Di) == kd and lat.pair(theta, Di) == td, f"pairings for ray {i} misreported")
            _require(kd >= 0 and td < 0, f"ray {i} is not a theta-negative ray")
            _require(lam == kd / (kd - td), f"lambda for ray {i} does not solve (K+L-lambda cN').D = 0")
            _require(0 <= lam < 1, f"lambda for ray {i} outside [0, 1)")
            a, b = m * kd, -m * td
            _require(a.denominator == 1 and b.denominator == 1 and 0 < b <= 4 * m,
                     f"lambda for ray {i} is not a/(a+b) with 0 < b <= 4m")
        _require(lam0 == min(row[3] for row in rows), "lambda_0 is not the minimum over the rays")
        _require(any(i == chosen and lam == lam0 for i, _, _, lam in rows), "chosen ray does not attain lambda_0")
        added = {i: lam0 * x for i, x in cn.items()}
        _require(_coeffs(d["added"]) == {i: a for i, a in added.items() if a}, "shrink amount is not lambda_0 cN'")
        _require(self.cls(lat, d["L"]) == L_new, "L' misreported")
        lv.L = L_new
        lv.addbacks.append(("lambda", {i: a for i, a in added.items() if a}))
        lv.nprime["chosen"] = chosen
        lv.stage = "lambda"

    def step_fibration_degree(self, step):
        lv = self.level(step)
        lat = lv.lattice
        _require(lv.stage == "fibration", "fiber degree without a fibration")
        info = lv.contraction
        f = lat.curves[info["index"]].cls
        _require(int(step.data["fiber"]) == info["index"], "fiber differs from the contracted ray")
        A = lat.curves[info["aux"]].cls
        KL = lat.canonical + lv.L
        t = lat.pair(KL, A) / lat.pair(f, A)
        _require(Fraction(step.data["t"]) == t, "fiber degree misreported")
        _require(t >= 0, "negative fiber degree")
        _require(KL == t * f, "K + L' is not a multiple of the fiber")
        _require(self.cls(lat, step.data["cls"]) == KL, "fibration class is not K + L'")
        coeffs = _coeffs(step.data["coeffs"])
        _require(coeffs == ({info["index"]: t} if t else {}), "fibration certificate is not t * fiber")
        self.result = coeffs
        self.unwinding = True
        lv.stage = "done"

    def step_pullback(self, step):
        _require(self.unwinding, "pullback before a base case")
        _require(step.level == len(self.levels) - 2, "pullback at the wrong level")
        child = self.levels.pop()
        _require(child.stage == "done" and not child.addbacks, "child level was not fully recombined")
        lv = self.levels[-1]
        info = lv.contraction
        _require(info and info["branch"] == "blowdown", "pullback without a blowdown")
        lat, tgt = lv.lattice, info["target"]
        before = _coeffs(step.data["before"])
        _require(before == self.result, "pullback input is not the current certificate")
        self.known(tgt, before)
        e = info["e"]
        after: dict = {}
        for i, a in before.items():
            src, mult = info["curve_map"][i]
            after[src] = after.get(src, Fraction(0)) + a / mult
            k = lat.pair(lat.curves[src].cls, e)
            if k:
                after[info["index"]] = after.get(info["index"], Fraction(0)) + a / mult * k
        after = {i: a for i, a in after.items() if a}
        _require(_coeffs(step.data["after"]) == after, "pulled-back coefficients misreported")
        upstairs = lat.combination(after)
        _require(list(upstairs.coords) == linalg.matvec(info["pull"], tgt.combination(before).coords),
                 "pulled-back certificate is not the pullback class")
        self.result = after
        lv.stage = "done"

    def step_recombine(self, step):
        _require(self.unwinding, "recombine before a base case")
        _require(step.level == len(self.levels) - 1, "recombine at the wrong level")
        lv = self.levels[-1]
        _require(lv.stage == "done", "recombine before the level finished")
        _require(lv.addbacks, "nothing left to add back")
        source, expected = lv.addbacks.pop()
        _require(step.data["source"] == source, f"expected to add back {source}")
        added = _coeffs(step.data["added"])
        _require(added == expected, f"added {source} differs from the recorded amount")
        result = dict(self.result)
        for i, a in added.items():
            result[i] = result.get(i, Fraction(0)) + a
        result = {i: a for i, a in result.items() if a}
        claimed = _coeffs(step.data["result"])
        _require(all(a >= 0 for a in claimed.values()), "negative coefficient after recombination")
        _require(claimed == result, "recombined coefficients do not add up")
        self.result = result

    def finish(self, cert_coeffs: dict, target: DivisorClass):
        _require(self.unwinding, "trace never reached a base case")
        _require(len(self.levels) == 1, "trace did not return to the top level")
        _require(not self.levels[0].addbacks, "some split-off classes were never added back")
        _require(all(a >= 0 for a in cert_coeffs.values()), "negative certificate coefficient")
        _require(self.root.combination(cert_coeffs) == target, "certificate does not sum to K + L")
        _require(self.result == cert_coeffs, "certificate coefficients differ from the replayed result")


_HANDLERS = {
    "enter": _Checker.step_enter,
    "base-case": _Checker.step_base_case,
    "zariski": _Checker.step_zariski,
    "split-Q": _Checker.step_split_q,
    "contract": _Checker.step_contract,
    "phase3": _Checker.step_phase3,
    "nprime": _Checker.step_nprime,
    "shrink": _Checker.step_shrink,
    "lambda": _Checker.step_lambda,
    "fibration-degree": _Checker.step_fibration_degree,
    "pullback": _Checker.step_pullback,
    "recombine": _Checker.step_recombine,
}


def verify_trace(lattice: SurfaceLattice, cert, trace) -> VerifyResult:
    """Replay ``trace`` against ``lattice`` and confirm the certificate.

    ``cert`` is an :class:`EffectivityCertificate` whose target is K + L.
    Returns a falsy result naming the first failing step on any mismatch.
    """
    steps = list(trace)
    try:
        idx = cert.indices if cert.indices is not None else [lattice.curve_index(g) for g in cert.generators]
        for i, g in zip(idx, cert.generators):
            _require(i is not None and 0 <= i < len(lattice.curves), "unknown generator in certificate")
            _require(lattice.curves[i].cls.coords == tuple(g.coords), f"generator {i} differs from the lattice curve")
        coeffs: dict = {}
        for i, a in zip(idx, cert.coefficients):
            coeffs[i] = coeffs.get(i, Fraction(0)) + Fraction(a)
        coeffs = {i: a for i, a in coeffs.items() if a}
        target = lattice.cls(cert.target.coords)
    except _Reject as exc:
        return VerifyResult(False, None, "certificate", str(exc))
    except Exception as exc:
        return VerifyResult(False, None, "certificate", f"malformed certificate: {exc}")
    checker = _Checker(lattice, target)
    for pos, step in enumerate(steps):
        try:
            _require(int(step.data.get("seq", pos)) == pos, f"step recorded as #{step.data.get('seq')} found at #{pos}")
            handler = _HANDLERS.get(step.kind)
            _require(handler is not None, f"unknown step kind {step.kind!r}")
            handler(checker, step)
        except _Reject as exc:
            return VerifyResult(False, pos, step.kind, str(exc))
        except Exception as exc:
            return VerifyResult(False, pos, step.kind, f"malformed step: {type(exc).__name__}: {exc}")
    try:
        checker.finish(coeffs, target)
    except _Reject as exc:
        # the certificate is compared against what the last step produced
        last = len(steps) - 1 if steps else None
        return VerifyResult(False, last, steps[-1].kind if steps else "certificate", str(exc))
    return VerifyResult(True)

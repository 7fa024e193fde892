"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the live output)
or ``python tests/test_acceptance.py`` for just the summary lines.
"""

import copy
import json
import random
import sys
from fractions import Fraction
from functools import lru_cache

import pytest

from surfdiv import linalg
from surfdiv.certificate import certificate_document, dumps, singular_block, verify_document, verify_text
from surfdiv.cones import check_zariski, is_pseudo_effective, rationalize_effective, zariski_decompose
from surfdiv.lattice import SurfaceLattice, lattice_from_data
from surfdiv.models import (
    abelian_product,
    del_pezzo,
    enumerate_minus_one_classes,
    graph_generators,
    hirzebruch,
    remark_counterexample,
    remark_nef_class,
)
from surfdiv.nonvanishing import in_dcc_set, nonvanish
from surfdiv.resolution import anti_canonical, toric_singular_models
from surfdiv.suite import run_suite, sample_instance
from surfdiv.verify import verify_trace

_capture = None


def report(n: int, ok: bool, detail: str):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    if _capture is not None:
        with _capture.disabled():
            print("\n" + line)
    else:
        print(line)


@pytest.fixture(autouse=True)
def _live_output(capsys):
    global _capture
    _capture = capsys
    yield
    _capture = None


@lru_cache(maxsize=None)
def criterion_one_runs():
    return run_suite(100, seed=0, workers=4)


@lru_cache(maxsize=None)
def phase_three_batch():
    """Extra seeded runs on Hirzebruch and toric surfaces, where lambda steps occur."""
    rng = random.Random(2024)
    surfaces = [hirzebruch(n) for n in range(0, 5)] + [s.resolution for s in toric_singular_models(20)]
    runs = []
    for lat in surfaces:
        for _ in range(15):
            L = sample_instance(lat, rng)
            cert, trace = nonvanish(lat, L)
            runs.append((lat, L, cert, trace))
    return runs


def all_runs():
    runs = [(r.lattice, r.L, r.certificate, r.trace) for r in criterion_one_runs().results if r.trace]
    return runs + list(phase_three_batch())


def walk_levels(lattice, trace):
    """Yield (step, lattice at that step's level), rebuilding blown-down lattices from the trace."""
    levels = {0: lattice}
    for step in trace:
        yield step, levels[step.level]
        if step.kind == "contract" and step.data["branch"] == "blowdown":
            levels[step.level + 1] = lattice_from_data(step.data["target"])


# 1 -------------------------------------------------------------------------


def test_criterion_1_pipeline_against_oracle():
    results = criterion_one_runs().results
    good = 0
    for r in results:
        if not (r.ok and r.trace):
            continue
        target = r.lattice.canonical + r.L
        oracle = is_pseudo_effective(r.lattice, target)
        if r.certificate.total() == target and r.certificate.is_valid() and oracle and verify_trace(r.lattice, r.certificate, r.trace):
            good += 1
    ok = good == 100 and len(results) == 100
    report(1, ok, f"{good}/100 del Pezzo instances (r = 1..6): certificate = K+L, LP oracle agrees, verifier accepts")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_2_anticanonical_on_singular_models():
    models = toric_singular_models(20)
    good = 0
    kinds = set()
    for s in models:
        kinds.update(int(s.resolution.square(e.cls)) for e in s.exceptional)
        result = anti_canonical(s)
        doc = certificate_document(s.resolution, result.resolution_certificate, result.trace, "antik",
                                   singular_block(s, result))
        if result.certificate.target == -s.canonical and result.certificate.is_valid() and verify_text(dumps(doc)):
            good += 1
    ok = good == 20 and len(models) == 20
    report(2, ok, f"{good}/20 singular models (exceptional squares {sorted(kinds)}) with a verified -K_X certificate")
    assert ok


# 3 -------------------------------------------------------------------------


def _shuffled(lat, rng):
    curves = [(list(c.cls.coords), c.genus, c.name) for c in lat.curves]
    rng.shuffle(curves)
    return SurfaceLattice([list(r) for r in lat.gram], list(lat.canonical.coords), curves,
                          basis_labels=lat.basis_labels)


def test_criterion_3_zariski_properties():
    rng = random.Random(303)
    done, failures = 0, []
    while done < 200:
        r = rng.randint(1, 6)
        lat = del_pezzo(r)
        d = lat.cls([Fraction(rng.randint(-4, 12), rng.randint(1, 6))] +
                    [Fraction(rng.randint(-8, 8), rng.randint(1, 6)) for _ in range(r)])
        if not is_pseudo_effective(lat, d):
            continue
        z = zariski_decompose(lat, d, check_unique=False)
        problems = check_zariski(lat, d, z)
        if z.N_support and not linalg.is_negative_definite([list(row) for row in z.gram_witness]):
            problems.append("gram")
        other = _shuffled(lat, rng)
        z2 = zariski_decompose(other, other.cls(d.coords), check_unique=False)
        n1 = sorted((c.cls.coords, a) for c, a in zip(z.N_support, z.N_coeffs))
        n2 = sorted((c.cls.coords, a) for c, a in zip(z2.N_support, z2.N_coeffs))
        if z2.P.coords != z.P.coords or n1 != n2:
            problems.append("order dependence")
        if problems:
            failures.append((d.coords, problems))
        done += 1
    ok = not failures
    report(3, ok, f"200 pseudo-effective classes: P nef, P.C = 0 on Supp N, Gram negative definite, "
                  f"shuffle-invariant; {len(failures)} violations")
    assert ok


# 4 -------------------------------------------------------------------------


def test_criterion_4_lambda_and_contraction_discipline():
    lambdas = rays = excesses = 0
    bad = []
    lambdas_suite = 0
    for n, (lat, L, cert, trace) in enumerate(all_runs()):
        for step, level_lat in walk_levels(lat, trace):
            if step.kind == "lambda":
                m = step.data["m"]
                for _, kd, td, lam in step.data["rays"]:
                    lambdas += 1
                    lambdas_suite += n < 100
                    if not (0 <= lam < 1 and in_dcc_set(lam, m * kd, -m * td, m)):
                        bad.append(("lambda", lam))
            if step.kind == "contract" and step.data["branch"] == "blowdown":
                rays += 1
                e = level_lat.curves[step.data["ray"]].cls
                if level_lat.square(e) != -1 or level_lat.pair(level_lat.canonical, e) != -1:
                    bad.append(("ray", e.coords))
                if step.data["phase"] == 2:
                    excesses += 1
                    if any(a < 0 for _, a in step.data["excess"]):
                        bad.append(("excess", step.data["excess"]))
    ok = not bad and lambdas > 0 and rays > 0 and excesses > 0
    report(4, ok, f"{lambdas} lambda values ({lambdas_suite} from the del Pezzo runs, rest from the "
                  f"Hirzebruch/toric batch) in [0,1) and the a/(a+b) set; {rays} blowdown rays with "
                  f"e^2 = K.e = -1; {excesses} phase-2 excesses >= 0; {len(bad)} violations")
    assert ok


# 5 -------------------------------------------------------------------------


def test_criterion_5_ray_degree_bound():
    checked = 0
    bad = []
    for lat, L, cert, trace in all_runs():
        N = support = nprime = c = None
        for step, level_lat in walk_levels(lat, trace):
            if step.kind == "zariski" and step.data["role"] == "phase3":
                N = dict(step.data["N"])
            elif step.kind == "nprime":
                support, nprime, c = step.data["support"], step.data["nprime"], step.data["c"]
            elif step.kind == "lambda":
                delta = dict(N)
                for i, a in zip(support, nprime):
                    delta[i] = delta.get(i, 0) - c * a
                if any(not 0 <= a < 1 for i, a in delta.items() if a):
                    bad.append(("delta coefficient", delta))
                K_delta = level_lat.canonical + level_lat.combination(delta)
                for idx, _, _, _ in step.data["rays"]:
                    value = level_lat.pair(K_delta, level_lat.curves[idx].cls)
                    checked += 1
                    if not -4 <= value < 0:
                        bad.append((idx, value))
    ok = not bad and checked > 0
    report(5, ok, f"{checked} rays entering the lambda minimum satisfy -4 <= (K + N - cN').D < 0; {len(bad)} violations")
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion_6_minus_one_counts():
    expected = {1: 1, 2: 3, 3: 6, 4: 10, 5: 16, 6: 27, 7: 56, 8: 240}
    found = {r: len(enumerate_minus_one_classes(del_pezzo(r))) for r in expected}
    ok = found == expected
    report(6, ok, "(-1)-class counts for r = 1..8: " + ", ".join(str(found[r]) for r in sorted(found)))
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_7_remark_chain():
    model = abelian_product()
    rep = remark_counterexample(model, 10**6)
    gens = graph_generators(model, 100)
    res = rationalize_effective(model.lattice, remark_nef_class(model), gens)
    sep_ok = res.separator is not None and all(model.lattice.pair(res.separator, g.cls) >= 0 for g in gens) \
        and model.lattice.pair(res.separator, remark_nef_class(model)) < 0
    ok = rep.holds and len(rep.rows) > 0 and res.status == "infeasible" and sep_ok
    last = rep.rows[-1]
    report(7, ok, f"{len(rep.rows)} Pell convergents with p <= 10^6 satisfy 0 < (q - p*sqrt(2))^2 < 1/p "
                  f"(last p = {last.p}); M infeasible against {len(gens)} generators (graphs with p <= 100), "
                  f"separator verified")
    assert ok


# 8 -------------------------------------------------------------------------


def _documents():
    docs = []
    for lat, L, cert, trace in phase_three_batch():
        if trace.of_kind("lambda") and len(docs) < 6:
            docs.append(json.loads(dumps(certificate_document(lat, cert, trace))))
    for r in criterion_one_runs().results[:12]:
        if r.trace.of_kind("recombine"):
            docs.append(json.loads(dumps(certificate_document(r.lattice, r.certificate, r.trace))))
    return docs


def _corruptions(docs, rng):
    out = []
    # coefficient sign flips: in the certificate and in recorded step coefficients
    for doc in docs:
        nz = [e for e in doc["coefficients"] if e["value"] != "0"]
        if nz:
            d = copy.deepcopy(doc)
            pick = rng.choice(nz)["generator"]
            e = next(x for x in d["coefficients"] if x["generator"] == pick)
            e["value"] = e["value"][1:] if e["value"].startswith("-") else "-" + e["value"]
            out.append(("sign flip (certificate)", d))
        steps = [i for i, s in enumerate(doc["trace"]) if s["kind"] == "recombine" and s["data"]["added"]]
        if steps:
            d = copy.deepcopy(doc)
            step = d["trace"][rng.choice(steps)]
            pair = step["data"]["added"][0]
            pair[1] = pair[1][1:] if pair[1].startswith("-") else "-" + pair[1]
            out.append(("sign flip (recombine)", d))
    # lambda perturbations
    for doc in docs:
        lam_steps = [i for i, s in enumerate(doc["trace"]) if s["kind"] == "lambda"]
        for i in lam_steps:
            for delta in (Fraction(1, 7), Fraction(-1, 11)):
                d = copy.deepcopy(doc)
                data = d["trace"][i]["data"]
                lam = Fraction(data["lam0"]) + delta
                data["lam0"] = f"{lam.numerator}/{lam.denominator}"
                out.append(("lambda perturbation", d))
            d = copy.deepcopy(doc)
            row = d["trace"][i]["data"]["rays"][0]
            lam = Fraction(row[3]) + Fraction(1, 5)
            row[3] = f"{lam.numerator}/{lam.denominator}"
            out.append(("ray lambda perturbation", d))
    # reorders: swap two adjacent steps, renumbering seq so only the order is wrong
    for doc in docs:
        n = len(doc["trace"])
        for _ in range(2):
            d = copy.deepcopy(doc)
            i = rng.randrange(n - 1)
            if d["trace"][i] == d["trace"][i + 1]:
                continue
            d["trace"][i], d["trace"][i + 1] = d["trace"][i + 1], d["trace"][i]
            for k, s in enumerate(d["trace"]):
                s["data"]["seq"] = str(k)
            out.append(("reorder", d))
    return out


def test_criterion_8_fault_injection():
    rng = random.Random(88)
    docs = _documents()
    assert all(verify_document(d) for d in docs)
    corrupted = _corruptions(docs, rng)
    rng.shuffle(corrupted)
    by_kind = {}
    for kind, d in corrupted:
        by_kind.setdefault(kind, []).append(d)
    # take a balanced 50 across the corruption kinds
    chosen = []
    while len(chosen) < 50 and any(by_kind.values()):
        for kind in sorted(by_kind):
            if by_kind[kind] and len(chosen) < 50:
                chosen.append((kind, by_kind[kind].pop()))
    rejected = 0
    misses = []
    for kind, d in chosen:
        res = verify_document(d)
        if not res and res.step_kind:
            rejected += 1
        else:
            misses.append(kind)
    ok = rejected == 50 and len(chosen) == 50
    counts = {}
    for kind, _ in chosen:
        counts[kind] = counts.get(kind, 0) + 1
    report(8, ok, f"{rejected}/{len(chosen)} corruptions rejected with the failing step named ("
                  + ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())) + ")")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

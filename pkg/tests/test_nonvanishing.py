import copy
import random
from fractions import Fraction

import pytest

from surfdiv.cones import EffectivityCertificate, extremal_rays, is_pseudo_effective
from surfdiv.errors import ConsistencyError, PreconditionError
from surfdiv.lattice import SurfaceLattice
from surfdiv.models import del_pezzo, hirzebruch, projective_plane
from surfdiv.nonvanishing import (
    compute_c,
    contract,
    in_dcc_set,
    lambda_for_ray,
    nonvanish,
    nprime_coefficients,
    solve_nprime,
)
from surfdiv.suite import sample_instance
from surfdiv.verify import verify_trace


def test_nprime_examples():
    lat = del_pezzo(1)
    e = lat.curve_by_name("E1")
    assert solve_nprime(lat, [e]) == e.cls
    f2 = hirzebruch(2)
    s = f2.curve_by_name("s")
    assert solve_nprime(f2, [s]) == Fraction(1, 2) * s.cls
    gram = [[-2, 1, 0], [1, -2, 0], [0, 0, 1]]
    cartan = SurfaceLattice(gram, [0, 0, -3], [([1, 0, 0], 0, "C1"), ([0, 1, 0], 0, "C2")], check=False)
    assert nprime_coefficients(cartan, cartan.curves) == (1, 1)


def test_nprime_needs_negative_definite():
    f0 = hirzebruch(0)
    with pytest.raises(PreconditionError):
        solve_nprime(f0, [f0.curve_by_name("f")])
    with pytest.raises(PreconditionError):
        solve_nprime(f0, [])


def test_compute_c_examples():
    assert compute_c([2], [1]) == 2
    assert compute_c([3, 1], [1, 1]) == 1
    n, p = [Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 4), Fraction(1, 6)]
    c = compute_c(n, p)
    assert c == 2 and [a - c * b for a, b in zip(n, p)] == [0, 0]
    with pytest.raises(PreconditionError):
        compute_c([], [])


def test_lambda_examples():
    lat = del_pezzo(1)
    e = lat.curve_by_name("E1")
    H = lat.unit(0)
    # (K+L).E = 0, theta.E = -1
    assert lambda_for_ray(lat, H, H + e.cls, e) == 0
    # (K+L).E = 1, theta.E = -1
    assert lambda_for_ray(lat, -e.cls, e.cls, e) == Fraction(1, 2)
    # (K+L).E = 3, theta.E = -4
    assert lambda_for_ray(lat, -3 * e.cls, 4 * e.cls, e, m=1) == Fraction(3, 7)
    assert in_dcc_set(Fraction(3, 7), Fraction(3), Fraction(4), 1)
    assert not in_dcc_set(Fraction(3, 8), Fraction(3), Fraction(5), 1)
    with pytest.raises(PreconditionError):
        lambda_for_ray(lat, e.cls, e.cls, e)
    with pytest.raises(PreconditionError):
        lambda_for_ray(lat, -e.cls, -e.cls, e)
    with pytest.raises(ConsistencyError):
        lambda_for_ray(lat, -3 * e.cls, 5 * e.cls, e, m=1)


def test_contract_blowdown_to_plane():
    lat = del_pezzo(1)
    rays = {r.generator.name: r for r in extremal_rays(lat)}
    cm = contract(lat, rays["E1"])
    assert cm.kind == "blowdown" and cm.target.rank == 1
    H = cm.push(lat.unit(0))
    assert abs(H.coords[0]) == 1
    assert cm.push(lat.canonical) == -3 * H
    # pushforward after pullback is the identity; pullback of K_target = K - E
    w = cm.target.unit(0)
    assert cm.push(cm.pull(w)) == w
    assert cm.pull(cm.target.canonical) == lat.canonical - rays["E1"].generator.cls


def test_contract_fibration():
    for n in range(4):
        lat = hirzebruch(n)
        f = next(r for r in extremal_rays(lat) if r.generator.name == "f")
        cm = contract(lat, f)
        assert cm.kind == "fibration"
        assert lat.curves[cm.aux_index].name == "s" and cm.section_pairing == 1


def test_contract_rejections():
    f2 = hirzebruch(2)
    s = next(r for r in extremal_rays(f2) if r.generator.name == "s")
    with pytest.raises(PreconditionError):
        contract(f2, s)
    p2 = projective_plane()
    with pytest.raises(PreconditionError, match="Mori-fiber-to-point"):
        contract(p2, extremal_rays(p2)[0])
    f3 = hirzebruch(3)
    s = next(r for r in extremal_rays(f3) if r.generator.name == "s")
    with pytest.raises(PreconditionError, match="not K-negative"):
        contract(f3, s)
    # a K-negative (-2)-class cannot occur on a smooth surface; build one without checks
    bad = SurfaceLattice([[1, 0], [0, -2]], [-3, 1], [([1, 0], 0, "H"), ([0, 1], 0, "C")], check=False)
    with pytest.raises(PreconditionError, match="non-contractible negative ray on smooth model"):
        contract(bad, bad.curves[1])


@pytest.mark.parametrize("r", range(2, 7))
def test_blowdown_invariants(r):
    lat = del_pezzo(r)
    for ray in extremal_rays(lat):
        e = ray.generator.cls
        if lat.square(e) != -1:
            continue
        cm = contract(lat, ray)
        assert lat.pair(lat.canonical, e) == -1
        for i in range(cm.target.rank):
            w = cm.target.unit(i)
            assert cm.push(cm.pull(w)) == w
        assert cm.pull(cm.target.canonical) == lat.canonical - e
        break


def test_plane_with_four_lines():
    p2 = projective_plane()
    cert, trace = nonvanish(p2, p2.cls([4]))
    assert cert.coefficients == (1,) and cert.labels == ("H",)
    assert verify_trace(p2, cert, trace)


def test_anticanonical_twice_on_one_point_blowup():
    lat = del_pezzo(1)
    L = lat.cls([6, -2])
    cert, trace = nonvanish(lat, L)
    assert cert.total() == lat.cls([3, -1])
    assert all(a >= 0 for a in cert.coefficients)
    assert is_pseudo_effective(lat, cert.target)
    assert verify_trace(lat, cert, trace)


def test_nef_adjoint_goes_straight_to_lp():
    lat = del_pezzo(3)
    L = -2 * lat.canonical  # L and K + L = -K are both nef
    cert, trace = nonvanish(lat, L)
    kinds = [s.kind for s in trace]
    assert "base-case" in kinds and "lambda" not in kinds and "contract" not in kinds
    lp = is_pseudo_effective(lat, lat.canonical + L)
    assert cert.is_valid() and lp


def test_preconditions():
    lat = del_pezzo(1)
    with pytest.raises(PreconditionError):
        nonvanish(lat, lat.cls([0, -1]))
    with pytest.raises(PreconditionError):
        nonvanish(lat, lat.cls([1, 0]))


def _lambda_instance():
    lat = hirzebruch(3)
    L = lat.cls([Fraction(5, 2), Fraction(11, 2)])
    cert, trace = nonvanish(lat, L)
    assert trace.of_kind("lambda")
    return lat, cert, trace


def test_lambda_instance_round_trip():
    lat, cert, trace = _lambda_instance()
    assert verify_trace(lat, cert, trace)
    step = trace.of_kind("lambda")[0]
    assert step.data["lam0"] == Fraction(1, 2)
    for idx, kd, td, lam in step.data["rays"]:
        assert 0 <= lam < 1
        m = step.data["m"]
        assert in_dcc_set(lam, m * kd, -m * td, m)


def test_negated_coefficient_rejected_at_recombine():
    lat, cert, trace = _lambda_instance()
    coeffs = list(cert.coefficients)
    coeffs[0] = -coeffs[0]
    bad = EffectivityCertificate(cert.generators, tuple(coeffs), cert.target, cert.labels, cert.indices)
    res = verify_trace(lat, bad, trace)
    assert not res and res.step_kind == "recombine"


def test_tampered_lambda_rejected():
    lat, cert, trace = _lambda_instance()
    # a smaller lambda keeps K + L' nef but leaves (K + L').D > 0 on the chosen ray
    tampered = copy.deepcopy(trace)
    tampered.of_kind("lambda")[0].data["lam0"] = Fraction(1, 4)
    res = verify_trace(lat, cert, tampered)
    assert not res and res.step_kind == "lambda" and "not zero" in res.reason
    # a larger one overshoots and K + L' stops being nef
    tampered = copy.deepcopy(trace)
    tampered.of_kind("lambda")[0].data["lam0"] = Fraction(3, 4)
    res = verify_trace(lat, cert, tampered)
    assert not res and res.step_kind == "lambda" and "not nef" in res.reason


def test_random_instances_round_trip():
    rng = random.Random(5)
    for _ in range(30):
        r = rng.randint(1, 6)
        lat = del_pezzo(r)
        L = sample_instance(lat, rng)
        cert, trace = nonvanish(lat, L)
        assert cert.is_valid() and cert.target == lat.canonical + L
        assert verify_trace(lat, cert, trace)
        for step in trace.of_kind("contract"):
            if step.data["branch"] == "blowdown":
                assert all(a >= 0 for _, a in step.data.get("excess", ()))


def test_termination_measure_decreases():
    rng = random.Random(9)
    for n in (1, 2, 3, 4):
        lat = hirzebruch(n)
        for _ in range(10):
            L = sample_instance(lat, rng)
            _, trace = nonvanish(lat, L)
            measures = [s.data["measure"] for s in trace.of_kind("zariski") if s.data["role"] == "phase3"]
            assert all(b < a for a, b in zip(measures, measures[1:]))

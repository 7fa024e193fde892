import random
from fractions import Fraction

import pytest

from surfdiv.cones import is_pseudo_effective
from surfdiv.errors import PreconditionError
from surfdiv.lattice import check_signature
from surfdiv.models import BlowupChain, Point, blow_up, del_pezzo, hirzebruch
from surfdiv.resolution import (
    anti_canonical,
    build_singular,
    nonvanish_singular,
    pullback,
    pushforward,
    pushforward_numcheck,
    toric_singular_models,
)
from surfdiv.verify import verify_trace


def chain_surface():
    # s, f0 form an A2 chain and E1 extends it to A3
    return blow_up(BlowupChain("hirzebruch", 2, [Point.at("f0", "t"), Point.at("f0", "E1")]))


def test_a1_has_no_boundary():
    s = build_singular(hirzebruch(2), ["s"])
    assert s.b_coeffs == (0,)
    assert s.B.is_zero()


def test_minus_three_curve():
    s = build_singular(hirzebruch(3), ["s"])
    assert s.b_coeffs == (Fraction(1, 3),)
    lat = s.resolution
    e = s.exceptional[0].cls
    assert lat.pair(lat.canonical + s.B, e) == 0


def test_a2_and_a3_chains():
    lat = chain_surface()
    assert build_singular(lat, ["s", "f0"]).b_coeffs == (0, 0)
    assert build_singular(lat, ["s", "f0", "E1"]).b_coeffs == (0, 0, 0)


def test_build_errors():
    lat = chain_surface()
    with pytest.raises(PreconditionError, match="resolution not minimal"):
        build_singular(lat, ["E2"])
    with pytest.raises(PreconditionError):
        build_singular(hirzebruch(0), ["f"])
    with pytest.raises(PreconditionError):
        build_singular(hirzebruch(2), ["s", "s"])


def test_quotient_lattice():
    s = build_singular(chain_surface(), ["s", "f0"])
    assert len(s.quotient_basis) == 2
    assert check_signature(s.quotient).signature == (1, 1)
    for b in s.quotient_basis:
        assert b.is_integral()
        assert all(s.resolution.pair(b, e.cls) == 0 for e in s.exceptional)


def test_pullback_examples():
    s = build_singular(hirzebruch(2), ["s"])
    lat = s.resolution
    assert pullback(s, s.canonical) == lat.canonical + s.B
    assert pullback(s, s.quotient.zero()).is_zero()
    f = lat.curve_by_name("f").cls
    e = lat.curve_by_name("s").cls
    assert pullback(s, pushforward(s, f)) == f + Fraction(1, 2) * e


def test_pushforward_examples():
    s = build_singular(chain_surface(), ["s", "f0"])
    lat = s.resolution
    assert pushforward_numcheck(s, lat.zero()).image_trivial
    for e in s.exceptional:
        assert pushforward(s, e.cls).is_zero()
    rng = random.Random(1)
    for _ in range(20):
        w = s.quotient.cls([rng.randint(-5, 5) for _ in s.quotient_basis])
        assert pushforward(s, pullback(s, w)) == w
        v = pullback(s, w)
        assert all(lat.pair(v, e.cls) == 0 for e in s.exceptional)


def test_zero_class_perturbed_along_exceptionals():
    s = build_singular(chain_surface(), ["s", "f0", "E1"])
    lat = s.resolution
    rng = random.Random(27)
    for _ in range(100):
        v = lat.zero()
        for e in s.exceptional:
            v = v + Fraction(rng.randint(-20, 20), rng.randint(1, 9)) * e.cls
        report = pushforward_numcheck(s, v)
        assert report.image_trivial
        base = lat.cls([rng.randint(-4, 4) for _ in range(lat.rank)])
        assert pushforward(s, base + v) == pushforward(s, base)


def test_canonical_singularities_reduce_to_the_smooth_run():
    s = build_singular(hirzebruch(2), ["s"])
    L = -2 * s.canonical
    result = nonvanish_singular(s, L)
    assert result.L_tilde == pullback(s, L)
    assert result.certificate.is_valid()
    assert pushforward(s, s.resolution.canonical + result.L_tilde) == result.certificate.target


def test_quadric_cone_anticanonical():
    s = build_singular(hirzebruch(2), ["s"])
    result = anti_canonical(s)
    cert = result.certificate
    assert cert.target == -s.canonical
    assert cert.describe() == "4*f"
    assert is_pseudo_effective(s.quotient, cert.target)
    assert verify_trace(s.resolution, result.resolution_certificate, result.trace)


def test_smooth_degree_six_anticanonical():
    lat = del_pezzo(3)
    s = build_singular(lat, [])
    assert s.is_smooth()
    result = anti_canonical(s)
    assert result.certificate.target == -s.canonical
    assert result.certificate.is_valid()
    assert is_pseudo_effective(s.quotient, -s.canonical)


def test_toric_models():
    models = toric_singular_models(20)
    assert len(models) == 20
    for s in models:
        assert all(b >= 0 for b in s.b_coeffs)
        if all(s.resolution.square(e.cls) == -2 for e in s.exceptional):
            assert all(b == 0 for b in s.b_coeffs)
        result = anti_canonical(s)
        assert result.certificate.target == -s.canonical
        assert verify_trace(s.resolution, result.resolution_certificate, result.trace)

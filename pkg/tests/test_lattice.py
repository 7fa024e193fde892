from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfdiv.errors import LatticeMismatchError, PreconditionError, SignatureError
from surfdiv.lattice import (
    SurfaceLattice,
    check_signature,
    diagonalize,
    lattice_from_data,
    lattice_to_data,
    orthogonal_complement_basis,
    pair,
)
from surfdiv import linalg
from surfdiv.models import abelian_product, del_pezzo, projective_plane


def test_pairing_examples():
    blp = del_pezzo(1)
    H, E = blp.unit(0), blp.unit(1)
    assert pair(blp, H, E) == 0
    assert pair(blp, E, E) == -1
    p2 = projective_plane()
    assert p2.square(p2.canonical) == 9
    ab = abelian_product().lattice
    amp = ab.cls([1, 1, 1])
    assert ab.square(amp) == 6


def test_signature_examples():
    assert check_signature([[1, 0, 0], [0, -1, 0], [0, 0, -1]]).signature == (1, 2)
    assert check_signature(abelian_product().lattice).signature == (1, 2)
    with pytest.raises(SignatureError) as err:
        check_signature([[1, 0], [0, 1]])
    assert err.value.report.positive == 2


def test_degenerate_form_rejected():
    assert diagonalize([[0, 0], [0, 1]]).zero == 1
    with pytest.raises(SignatureError):
        SurfaceLattice([[1, 1], [1, 1]], [0, 0])


def test_cross_lattice_arithmetic_rejected():
    a, b = del_pezzo(1), del_pezzo(1)
    with pytest.raises(LatticeMismatchError):
        a.unit(0) + b.unit(0)
    with pytest.raises(LatticeMismatchError):
        a.pair(a.unit(0), b.unit(0))


def test_adjunction_and_primitivity_checked():
    with pytest.raises(PreconditionError):
        SurfaceLattice([[1, 0], [0, -1]], [-3, 1], [([0, 1], 1, "bad")])
    with pytest.raises(PreconditionError):
        SurfaceLattice([[1, 0], [0, -1]], [-3, 1], [([0, 2], 0, "double")])


def test_orthogonal_complement_examples():
    blp = del_pezzo(1)
    basis = orthogonal_complement_basis(blp, blp.unit(1))
    assert [b.coords for b in basis] in ([(1, 0)], [(-1, 0)])
    dp2 = del_pezzo(2)
    e = dp2.cls([1, -1, -1])
    basis = orthogonal_complement_basis(dp2, e)
    assert len(basis) == 2
    assert all(dp2.pair(b, e) == 0 for b in basis)
    # same lattice as the one spanned by H-E1, H-E2 (unimodular change of basis)
    expected = [[1, -1, 0], [1, 0, -1]]
    change = [linalg.solve_in_span([list(b.coords) for b in basis], v) for v in expected]
    assert all(Fraction(x).denominator == 1 for row in change for x in row)
    assert abs(linalg.det(change)) == 1
    with pytest.raises(PreconditionError):
        orthogonal_complement_basis(dp2, dp2.cls([0, 1, -1]))


def test_lattice_data_round_trip():
    lat = del_pezzo(3)
    again = lattice_from_data(lattice_to_data(lat))
    assert again.gram == lat.gram and again.canonical.coords == lat.canonical.coords
    assert [c.name for c in again.curves] == [c.name for c in lat.curves]


vec = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12), min_size=4, max_size=4)


@settings(max_examples=100, deadline=None)
@given(vec, vec, vec, st.fractions(max_denominator=9, min_value=-5, max_value=5), st.fractions(max_denominator=9, min_value=-5, max_value=5))
def test_pairing_is_bilinear_and_symmetric(u, v, w, s, t):
    lat = del_pezzo(3)
    U, V, W = lat.cls(u), lat.cls(v), lat.cls(w)
    assert lat.pair(s * U + t * V, W) == s * lat.pair(U, W) + t * lat.pair(V, W)
    assert lat.pair(U, V) == lat.pair(V, U)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=100))
def test_complement_of_minus_one_class(r, k):
    lat = del_pezzo(r)
    e = lat.curves[k % len(lat.curves)].cls
    basis = orthogonal_complement_basis(lat, e)
    assert len(basis) == lat.rank - 1
    assert check_signature(lat.gram_of(basis)).signature == (1, lat.rank - 2)

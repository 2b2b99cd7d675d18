from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import rationals
from linvariant.errors import OutOfDomain, TargetH2Vanishes, UnsupportedCharacter, WrongParent
from linvariant.filtered_phin import CharacterParam, shift_model, unit
from linvariant.padic_linalg import padic_log
from linvariant.rank1_coords import (
    CRYS_UNIT,
    PAIR_TABLE,
    SHIFT,
    H1Coord,
    Rank1Space,
    alphabeta_to_stclass,
    gram_matrix,
    h_dims,
    kummer_coords,
    pair,
    stclass_to_alphabeta,
)
from linvariant.st_cohomology import StClass

P = 3


@pytest.mark.parametrize("m", range(1, 7))
def test_h_dims(m):
    assert h_dims(CharacterParam(-m, Fraction(P) ** (m - 1)), P) == (0, 2, 1, 2)
    h0, h1, h1f, _ = h_dims(CharacterParam(m, Fraction(P) ** (-m)), P)
    assert (h0, h1, h1f) == (1, 2, 1)


def test_h_dims_trivial_character():
    assert h_dims(CharacterParam(0, Fraction(1)), P)[:3] == (1, 2, 1)


def test_unsupported_character():
    with pytest.raises(UnsupportedCharacter):
        h_dims(CharacterParam(0, Fraction(1, P)), P)
    with pytest.raises(UnsupportedCharacter):
        Rank1Space(SHIFT, 0)


def test_stclass_examples():
    lam = Fraction(7, 2)
    A = shift_model(P, 3)
    space = Rank1Space(SHIFT, 3)
    assert stclass_to_alphabeta(StClass(A, (1,), (0,), (0,))) == H1Coord.of(space, P, -1, 0)
    assert stclass_to_alphabeta(StClass(A, (-lam,), (0,), (1,))) == H1Coord.of(space, P, lam, -1)
    assert stclass_to_alphabeta(StClass(A, (0,), (0,), (0,))) == H1Coord.of(space, P, 0, 0)


def test_stclass_wrong_parent():
    with pytest.raises(WrongParent):
        stclass_to_alphabeta(StClass(unit(P), (0,), (1,), (0,)))


@given(rationals, rationals, st.integers(1, 5))
def test_alphabeta_round_trip(a, b, m):
    c = H1Coord.of(Rank1Space(SHIFT, m), P, a, b)
    assert stclass_to_alphabeta(alphabeta_to_stclass(c)) == c


def test_pair_normalizations():
    for m in (1, 2, 3):
        alpha = H1Coord.of(Rank1Space(SHIFT, m), P, 1, 0)
        y = H1Coord.of(Rank1Space(CRYS_UNIT, m - 1), P, 0, 1)
        x = H1Coord.of(Rank1Space(CRYS_UNIT, m - 1), P, 1, 0)
        assert pair(alpha, y).value == 1
        assert pair(alpha, x).value == 0
    for m in (1, 2, 3):
        for k in (0, 1, 2):
            a = H1Coord.of(Rank1Space(SHIFT, m + k), P, 1, 0)
            assert pair(a, H1Coord.of(Rank1Space(CRYS_UNIT, k), P, 0, 1)).value == 1


def test_gram_matrix_is_the_table():
    g = gram_matrix(3, 1, P)
    assert tuple(tuple(x.value for x in row) for row in g) == PAIR_TABLE
    # perfect: the Gram determinant is a unit
    assert g[0][0].value * g[1][1].value - g[0][1].value * g[1][0].value != 0


def test_pair_errors():
    a = H1Coord.of(Rank1Space(SHIFT, 1), P, 1, 0)
    with pytest.raises(TargetH2Vanishes):
        pair(a, H1Coord.of(Rank1Space(CRYS_UNIT, 1), P, 1, 0))
    with pytest.raises(WrongParent):
        pair(H1Coord.of(Rank1Space(CRYS_UNIT, 0), P, 1, 0), a)


def test_modular_class_is_orthogonal_to_its_line():
    # e = -lam alpha* - beta* kills lam x* + y*
    lam = Fraction(5)
    e = H1Coord.of(Rank1Space(SHIFT, 1), P, -lam, -1)
    v = H1Coord.of(Rank1Space(CRYS_UNIT, 0), P, lam, 1)
    assert pair(e, v).value == 0


def test_kummer_coords():
    assert kummer_coords(P, P) == H1Coord.of(Rank1Space(SHIFT, 1), P, 0, -1)
    assert kummer_coords(1, P) == H1Coord.of(Rank1Space(SHIFT, 1), P, 0, 0)
    k4 = kummer_coords(4, P)
    assert k4.a.agrees_with(-padic_log(4, P), 25) and k4.b.value == 0
    with pytest.raises(OutOfDomain):
        kummer_coords(2, P)

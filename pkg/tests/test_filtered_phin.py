import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from linvariant.errors import FlagNotStable, NotPhiNStable, PhiNotScalar, PrimeMismatch
from linvariant.filtered_phin import (
    CharacterParam,
    FilteredPhiNModule,
    Filtration,
    admissible_check,
    canonical_filtration,
    check_semisimple_at,
    decompose_scalar_phi,
    dual,
    dual_filtration_check,
    hodge_newton,
    rank1_classify,
    rank_one,
    refinement_to_parameters,
    tensor,
    twist,
    twisted_dual,
    unit,
    validate,
    verify_filtration_properties,
)
from linvariant.linv_engine import fontaine_mazur_module, modular_form_module
from linvariant.padic_linalg import QpMatrix, Subspace
from linvariant.random_modules import random_admissible, random_module

P = 3


def vk(k=2, lam=Fraction(5)):
    inp = modular_form_module(P, k, lam)
    return inp.M, inp.D


def test_validate_modular_module():
    M, _ = vk()
    assert validate(M).ok


def test_validate_n_zero():
    M = FilteredPhiNModule(P, QpMatrix([[2, 1], [0, 7]]), None, Filtration.trivial(2))
    assert validate(M).ok


def test_validate_names_violated_relation():
    M = FilteredPhiNModule(P, QpMatrix.identity(2), QpMatrix([[0, 0], [1, 0]]), Filtration.trivial(2))
    rep = validate(M)
    assert rep.failures() == ["N_phi_relation"]


def test_semisimple():
    M = FilteredPhiNModule(P, QpMatrix.diag([1, Fraction(1, P)]), None, Filtration.trivial(2))
    assert check_semisimple_at(M, 1) and check_semisimple_at(M, Fraction(1, P))
    J = FilteredPhiNModule(P, QpMatrix([[1, 1], [0, 1]]), None, Filtration.trivial(2))
    assert not check_semisimple_at(J, 1)
    V, _ = vk()
    assert check_semisimple_at(V, 1) and check_semisimple_at(V, Fraction(1, P))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rank1_classify(k):
    assert rank1_classify(rank_one(P, Fraction(1, P), -k)) == CharacterParam(-k, Fraction(P) ** (k - 1))
    assert rank1_classify(rank_one(P, 1, k - 1)) == CharacterParam(k - 1, Fraction(P) ** (1 - k))
    assert rank1_classify(unit(P)) == CharacterParam(0, Fraction(1))


def test_decompose_scalar_phi():
    M = FilteredPhiNModule(P, QpMatrix.identity(2), None,
                           Filtration(2, [(-1, Subspace.full(2)), (0, Subspace.span([(1, 1)], 2))]))
    chars, basis = decompose_scalar_phi(M)
    assert chars == [CharacterParam(0, Fraction(1)), CharacterParam(-1, Fraction(P))]
    assert Subspace.span(basis, 2).dim == 2
    m = 3
    chars, _ = decompose_scalar_phi(rank_one(P, Fraction(1, P), -m))
    assert chars == [rank1_classify(rank_one(P, Fraction(1, P), -m))]
    with pytest.raises(PhiNotScalar):
        decompose_scalar_phi(vk()[0])


def test_refinement_to_parameters():
    M = FilteredPhiNModule(P, QpMatrix.diag([2, 5]), None,
                           Filtration(2, [(0, Subspace.full(2)), (1, Subspace.span([(0, 1)], 2))]))
    flag = [Subspace.span([(1, 0)], 2), Subspace.full(2)]
    assert refinement_to_parameters(M, flag) == [CharacterParam(0, Fraction(2)),
                                                 CharacterParam(1, Fraction(5, P))]
    V, _ = vk()
    with pytest.raises(FlagNotStable):
        refinement_to_parameters(V, [Subspace.span([(0, 1)], 2), Subspace.full(2)])


def test_admissible_check():
    M, D = vk()
    assert admissible_check(M, D)
    line = M.Fil(0)
    assert line.dim == 1
    with pytest.raises(NotPhiNStable):
        admissible_check(M, line)
    assert not admissible_check(M, Subspace.zero(2))
    # a stable line inside Fil^0
    M2 = FilteredPhiNModule(P, QpMatrix.diag([1, 2]), None,
                            Filtration(2, [(-1, Subspace.full(2)), (0, Subspace.span([(1, 0)], 2))]))
    assert not admissible_check(M2, Subspace.span([(1, 0)], 2))


def test_canonical_filtration_modular():
    M, D = vk()
    f = canonical_filtration(M, D)
    assert f.as_tuple() == (Subspace.zero(2), D, Subspace.full(2))
    assert verify_filtration_properties(M, D, f).ok
    assert dual_filtration_check(M, D)


def test_canonical_filtration_whole_module():
    M = FilteredPhiNModule(P, QpMatrix.diag([Fraction(1, P), 2]), None, Filtration.trivial(2, -1))
    D = Subspace.full(2)
    f = canonical_filtration(M, D)
    assert f.d0 == D and f.d1 == D


def test_perturbed_filtrations_fail():
    M, D = vk()
    f = canonical_filtration(M, D)
    rep = verify_filtration_properties(M, D, (f.d_minus1, f.d0, f.d0))
    assert "D2_quotient" in rep.failures()
    rep = verify_filtration_properties(M, D, (f.d_minus1, Subspace.zero(2), f.d1))
    assert "D1" in rep.failures()


def test_hodge_newton():
    h = hodge_newton(unit(P))
    assert h["t_H"] == h["t_N"] == 0 and h["weakly_admissible"]
    M, _ = vk(k=3)
    h = hodge_newton(M)
    assert h["t_H"] == h["t_N"] == -1 and h["weakly_admissible"]
    shifted = twist(M, 1, 1)
    assert not hodge_newton(shifted)["weakly_admissible"]


def test_fontaine_mazur_twist_is_modular_module():
    for k in (1, 2, 3):
        M = fontaine_mazur_module(P, k, 7)
        assert twist(M, Fraction(P) ** (-k), -k) == modular_form_module(P, k, 7).M


def test_prime_mismatch():
    with pytest.raises(PrimeMismatch):
        tensor(unit(3), unit(5))


@given(st.integers(0, 10 ** 6))
def test_dual_is_involution(seed):
    M = random_module(random.Random(seed), P)
    assert validate(dual(M)).ok
    assert dual(dual(M)) == M
    assert twisted_dual(twisted_dual(M)) == M


@given(st.integers(0, 10 ** 6))
def test_random_admissible_filtration(seed):
    M, D = random_admissible(random.Random(seed), P)
    assert admissible_check(M, D)
    assert verify_filtration_properties(M, D, canonical_filtration(M, D)).ok
    assert dual_filtration_check(M, D)

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from linvariant.errors import (
    C4Violation,
    DualizeFirst,
    GlobalLocalMismatch,
    LineIsD1,
    RhoCNotInvertible,
    ShapeMismatch,
)
from linvariant.filtered_phin import (
    FilteredPhiNModule,
    Filtration,
    admissible_check,
    canonical_filtration,
    rank_one,
    unit,
    validate,
)
from linvariant.linv_engine import (
    LInvariantInput,
    WDecomposition,
    build_W,
    check_conditions,
    dual_submodule,
    fontaine_mazur_extract,
    fontaine_mazur_module,
    interpolation_factor,
    l_global,
    l_local,
    local_image,
    modular_form_module,
    run_pipeline,
)
from linvariant.padic_linalg import QpMatrix, Subspace
from linvariant.random_modules import direct_sum_input, random_admissible
from linvariant.rank1_coords import CRYS_UNIT, SHIFT, H1Coord, Rank1Space

P = 3


def n_zero_input(k=1, lam=0):
    """The modular module with N = 0: a crystalline (lam != 0) or split (lam = 0) extension."""
    phi = QpMatrix.diag([Fraction(1, P), 1])
    fil = Filtration(2, [(-k, Subspace.full(2)), (k - 1, Subspace.span([(-lam, 1)], 2))])
    return LInvariantInput(FilteredPhiNModule(P, phi, None, fil), Subspace.span([(1, 0)], 2))


def test_modular_conditions():
    rep = check_conditions(modular_form_module(P, 2, 5))
    assert rep.ok
    assert rep.checks["C5"][1] == "rank W_0 = 0, rank W_1 = 0"


@pytest.mark.parametrize("k", [1, 2])
def test_crystalline_extension_violates_c4(k):
    inp = n_zero_input(k, lam=Fraction(3))
    rep = check_conditions(inp)
    assert rep.passed("C4") is False
    with pytest.raises(C4Violation):
        run_pipeline(inp)


def test_split_module_violates_c5():
    rep = check_conditions(n_zero_input())
    assert rep.passed("C5") is False


def test_jordan_block_violates_c3():
    M = FilteredPhiNModule(P, QpMatrix([[1, 1], [0, 1]]), None, Filtration.trivial(2, -1))
    rep = check_conditions(LInvariantInput(M, Subspace.full(2)))
    assert rep.passed("C3") is False


@pytest.mark.parametrize("k", [1, 2, 3])
def test_modular_block(k):
    lam = Fraction(5, 4)
    inp = modular_form_module(P, k, lam)
    assert validate(inp.M).ok and admissible_check(inp.M, inp.D)
    assert canonical_filtration(inp.M, inp.D).as_tuple() == (Subspace.zero(2), inp.D, Subspace.full(2))
    Wd = build_W(inp.M, inp.D)
    assert (Wd.r, Wd.s) == (1, 0)
    assert Wd.blocks[0][0] == H1Coord.of(Rank1Space(SHIFT, 2 * k - 1), P, -lam, -1)
    assert local_image(Wd) == Subspace.span([(lam, 1)], 2)
    assert l_local(Wd).value == lam


def test_direct_sum_of_two_blocks():
    a, b = modular_form_module(P, 1, 2), modular_form_module(P, 1, 5)
    M, D = direct_sum_input((a.M, a.D), (b.M, b.D))
    Wd = build_W(M, D)
    assert Wd.r == 2
    assert Wd.blocks[0][1].a.value == 0 and Wd.blocks[0][1].b.value == 0
    assert local_image(Wd).dim == 2
    assert l_local(Wd).value == 10


def test_extra_unit_line_needs_global_data():
    a = modular_form_module(P, 1, 2)
    u = unit(P)
    M, D = direct_sum_input((a.M, a.D), (u, Subspace.zero(1)))
    rep = run_pipeline(LInvariantInput(M, D))
    assert (rep.r, rep.s) == (1, 1)
    assert rep.to_json()["L"] == "requires global data"
    assert rep.l_local.value == 2
    Wd = rep.decomposition
    L, Lgl = l_global(Wd, [[2, 0, 1, 0], [0, 7, 0, 1]])
    assert (L.value, Lgl.value) == (14, 7)
    with pytest.raises(GlobalLocalMismatch):
        l_global(Wd, [[3, 0, 1, 0], [0, 7, 0, 1]])
    full = run_pipeline(LInvariantInput(M, D, global_subspace=[[2, 0, 1, 0], [0, 7, 0, 1]]))
    assert full.l_value.value == 14
    assert run_pipeline(LInvariantInput(M, D, global_subspace=[[2, 0, 1, 0], [0, 7, 0, 1]]),
                        local_only=True).l_value is None


def test_dual_of_extra_unit_line_asks_to_dualize():
    a = modular_form_module(P, 1, 2)
    M, D = direct_sum_input((a.M, a.D), (unit(P), Subspace.zero(1)))
    Md, Dd = dual_submodule(M, D)
    with pytest.raises(DualizeFirst) as info:
        run_pipeline(LInvariantInput(Md, Dd))
    back = run_pipeline(info.value.dual_input)
    assert back.s == 1 and back.l_local.value == 2


def test_s_zero_global_factor_is_one():
    rep = run_pipeline(modular_form_module(P, 1, 3))
    assert rep.l_global.value == 1 and rep.l_value.value == 3


def test_crystalline_block_has_degenerate_image():
    Wd = WDecomposition.from_blocks(P, [1], [0], [[(1, 0)]])
    S = local_image(Wd)
    assert S == Subspace.span([(1, 0)], 2)
    with pytest.raises(RhoCNotInvertible):
        l_local(Wd)


def test_diagonal_blocks_in_coordinates():
    Wd = WDecomposition.from_blocks(P, [1, 2], [0, 1], [[(-2, -1), (0, 0)], [(0, 0), (-3, -1)]])
    assert local_image(Wd).dim == 2
    assert l_local(Wd).value == 6


def test_interpolation_examples():
    assert run_pipeline(modular_form_module(P, 1, 2)).interpolation.value == 1
    alpha = Fraction(2)
    M = rank_one(P, alpha, -1)
    assert interpolation_factor(M, Subspace.full(1)).value == 1 - 1 / (P * alpha)


@given(st.integers(0, 10 ** 6))
def test_interpolation_is_self_dual(seed):
    M, D = random_admissible(random.Random(seed), P)
    E = interpolation_factor(M, D)
    assert interpolation_factor(*dual_submodule(M, D)) == E


def test_fontaine_mazur_extract():
    for lam in (Fraction(3), Fraction(0), Fraction(-2, 7)):
        assert fontaine_mazur_extract(fontaine_mazur_module(P, 2, lam)).value == lam
    M = fontaine_mazur_module(P, 2, 0)
    bad = FilteredPhiNModule(P, M.phi, M.N, Filtration(2, [(0, Subspace.full(2)),
                                                         (3, Subspace.span([(1, 0)], 2))]))
    with pytest.raises(LineIsD1):
        fontaine_mazur_extract(bad)
    with pytest.raises(ShapeMismatch):
        fontaine_mazur_extract(modular_form_module(P, 2, 1).M)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_fontaine_mazur_agrees_with_pipeline(p):
    for k in (1, 2, 3):
        lam = Fraction(1, 1 + p)
        assert fontaine_mazur_extract(fontaine_mazur_module(p, k, lam)).value == \
            run_pipeline(modular_form_module(p, k, lam)).l_local.value


def test_report_json_keys():
    js = run_pipeline(modular_form_module(P, 1, 2)).to_json()
    assert js["L_loc"] == "2/1" and js["L"] == "2/1" and js["E"] == "1/1"
    assert js["conditions"]["C1_C2"]["detail"] == "not asserted"

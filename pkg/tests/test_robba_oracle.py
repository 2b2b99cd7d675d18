import json
import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from linvariant.errors import InputError
from linvariant.padic_linalg import valuation
from linvariant.rank1_coords import PAIR_TABLE
from linvariant.robba_oracle import (
    LaurentSeries,
    LogExtSeries,
    chi,
    cocycle_alpha,
    cocycle_beta,
    cocycle_residual,
    cup_table,
    cup_table_generate,
    gamma_act,
    inverse,
    log_ext_actions,
    partial,
    phi_act,
    psi_act,
    random_laurent,
    residue,
    solve_a,
    solve_one_minus_phi,
    t_power,
    t_series,
    verify_identities,
)

P = 3


def test_phi_of_pi():
    img = phi_act(LaurentSeries.monomial(P, 1))
    assert [img.coeff(j) for j in range(P + 2)] == [comb(P, j) if j else 0 for j in range(P + 2)]


def test_partial_of_t_is_one():
    d = partial(t_series(P, 30))
    lo, hi = d.window
    assert all(d.coeff(j) == (1 if j == 0 else 0) for j in range(max(lo, 0), hi + 1))


@given(st.integers(0, 10 ** 6))
def test_psi_phi_is_identity(seed):
    f = random_laurent(random.Random(seed), P, -4, 8)
    assert psi_act(phi_act(f)).digits_of_agreement(f) >= 20


@given(st.integers(0, 10 ** 6))
def test_residue_of_derivative_vanishes(seed):
    f = random_laurent(random.Random(seed), P, -6, 6)
    assert residue(partial(f)).value == 0


@given(st.integers(0, 10 ** 6))
def test_residue_gamma_invariance(seed):
    f = random_laurent(random.Random(seed), P, -5, 5)
    assert residue(gamma_act(f, hi=10).scale(chi(P))).value == residue(f).value


def test_residues():
    assert residue(LaurentSeries.monomial(P, -1)).value == 1
    assert residue(inverse(t_series(P, 10))).value == 1


def test_ell_monodromy():
    ell = LogExtSeries.ell(P)
    n = ell.N()
    assert n.degree == 0 and n.coefficient(0).coeff(0) == Fraction(-P, P - 1)
    phi_ell = log_ext_actions("phi", P)
    lhs = phi_ell.N().coefficient(0).coeff(0)
    assert lhs == P * Fraction(-P, P - 1)
    assert log_ext_actions("gamma", P, hi=10).degree == 1
    with pytest.raises(InputError):
        log_ext_actions("psi", P)


def test_solve_one_minus_phi():
    zero = solve_one_minus_phi(LaurentSeries(P, 0, [0] * 10))
    assert zero.is_zero()
    a = solve_a(P, 30)
    assert a.lo >= 0
    h = LaurentSeries(P, -1, [1, Fraction(1, 2)])
    rhs = h - gamma_act(h, hi=30).scale(chi(P))
    back = a - phi_act(a)
    assert all(back.coeff(j) == rhs.coeff(j) for j in range(0, 20))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cocycle_residue_coordinates(m):
    f, g = cocycle_alpha(m, P, 40)
    tw = t_power(P, m - 1, 40)
    assert (residue(f * tw).value, residue(g * tw).value) == (1, 0)
    _, gb = cocycle_beta(m, P)
    assert residue(gb * tw).value == 1


def test_alpha_one_is_a_cocycle():
    res = cocycle_residual(1, cocycle_alpha(1, P, 40))
    assert res.nonnegative_part().is_zero()
    assert all(valuation(res.coeff(k), P) >= 20 for k in range(res.lo, 0) if res.coeff(k))


def test_verify_identities_default():
    rep = verify_identities()
    assert rep.ok, [c.name for c in rep.checks if not c.passed]


@pytest.mark.parametrize("m,k", [(1, 0), (2, 1)])
def test_cup_table_matches_package_table(m, k):
    t = cup_table_generate(m, k, p=P)
    expected = [x for row in PAIR_TABLE for x in row]
    for v, e in zip(t.values(), expected):
        assert v.agrees_with(type(v)(P, e), min(t.digits, 20))


def test_cup_table_cache(tmp_path):
    path = tmp_path / "tables.json"
    t1 = cup_table(P, 1, 0, cache_path=path, prec=20)
    data = json.loads(path.read_text())
    assert "3,1,0" in data["entries"] and data["meta"]["window"] == [-8, 80]
    t2 = cup_table(P, 1, 0, cache_path=path, prec=20)
    assert t2.as_tuple() == t1.as_tuple()
    # a higher precision request regenerates instead of reusing
    t3 = cup_table(P, 1, 0, cache_path=path, prec=30)
    assert t3.meta["log_chi_precision"] == 30

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import matrices, rationals
from linvariant.errors import (
    DimensionMismatch,
    InconsistentSystem,
    NotSemisimpleAtZero,
    OutOfDomain,
    PrecisionExhausted,
)
from linvariant.padic_linalg import (
    PadicScalar,
    QpMatrix,
    Subspace,
    det_star,
    kernel,
    padic_log,
    solve_linear,
    subspace_ops,
    valuation,
)


def test_solve_identity():
    sol = solve_linear(QpMatrix.identity(2), [1, 3], p=3)
    assert sol.particular == (1, 3)
    assert sol.kernel.dim == 0


def test_solve_rank_one_system():
    sol = solve_linear(QpMatrix([[1, 1], [1, 1]]), [2, 2])
    assert sol.particular == (2, 0)
    assert sol.kernel == Subspace.span([(1, -1)], 2)


def test_solve_inconsistent():
    with pytest.raises(InconsistentSystem):
        solve_linear(QpMatrix([[1, 1], [1, 1]]), [1, 2])


def test_solve_capped_tracks_precision():
    p = 3
    A = [[PadicScalar(p, 1, 10), PadicScalar(p, 0, 10)], [PadicScalar(p, 0, 10), PadicScalar(p, 3, 10)]]
    sol = solve_linear(A, [PadicScalar(p, 2, 10), PadicScalar(p, 9, 10)])
    assert sol.precision is not None and sol.precision <= 10
    assert sol.particular[0].agrees_with(PadicScalar(p, 2), 9)
    assert sol.particular[1].agrees_with(PadicScalar(p, 3), 8)


def test_solve_capped_pivot_without_digits():
    p = 3
    A = [[PadicScalar(p, 27, 2)]]
    with pytest.raises((PrecisionExhausted, InconsistentSystem)):
        solve_linear(A, [PadicScalar(p, 1, 2)])


@given(matrices(4), st.lists(rationals, min_size=4, max_size=4))
def test_solve_random_multiplies_back(rows, b):
    A = QpMatrix(rows, 4)
    try:
        sol = solve_linear(A, b)
    except InconsistentSystem:
        assert A.rank() < 4
        return
    assert list(A.apply(sol.particular)) == [Fraction(x) for x in b]
    assert sol.kernel.dim == 4 - A.rank()
    for v in sol.kernel.basis:
        assert not any(A.apply(v))


def test_subspace_coordinate_lines():
    U = Subspace.span([(1, 0)], 2)
    V = Subspace.span([(0, 1)], 2)
    ops = subspace_ops(U, V)
    assert ops["sum"] == Subspace.full(2)
    assert ops["intersection"].dim == 0


def test_subspace_idempotent():
    U = Subspace.span([(1, 2, 0)], 3)
    assert U + U == U
    assert U.intersect(U) == U


def test_subspace_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        subspace_ops(Subspace.full(2), Subspace.full(3))


@given(matrices(2, 4), matrices(3, 4))
def test_modular_law(u, v):
    U = Subspace.span(u, 4)
    V = Subspace.span(v, 4)
    assert U.dim + V.dim == (U + V).dim + U.intersect(V).dim
    comp = Subspace.span(U.complement(), 4)
    assert (U + comp).dim == 4 and U.intersect(comp).dim == 0
    q = (U + V).quotient_basis(V)
    assert len(q) == (U + V).dim - V.dim


@given(matrices(3))
def test_rank_nullity(rows):
    A = QpMatrix(rows, 3)
    assert kernel(A).dim + A.image().dim == 3


def test_det_star_examples():
    assert det_star(QpMatrix.zeros(2, 2)) == 1
    assert det_star(QpMatrix.diag([0, 3])) == 3
    assert det_star(QpMatrix.diag([2, 5])) == 10


def test_det_star_nilpotent_raises():
    with pytest.raises(NotSemisimpleAtZero):
        det_star(QpMatrix([[0, 1], [0, 0]]))


def test_padic_log_of_four():
    p = 3
    got = padic_log(4, p, prec=20)
    partial = sum(Fraction((-1) ** (n + 1) * 3 ** n, n) for n in range(1, 40))
    assert valuation(got.value - partial, p) >= 20


def test_padic_log_special_points():
    assert padic_log(3, 3).value == 0
    assert padic_log(1, 3).value == 0
    with pytest.raises(OutOfDomain):
        padic_log(2, 3)


@given(st.integers(1, 30), st.integers(1, 30))
def test_padic_log_is_additive(a, b):
    p = 5
    u, v = 1 + p * a, 1 + p * b
    lhs = padic_log(u * v, p, prec=25)
    rhs = padic_log(u, p, prec=25) + padic_log(v, p, prec=25)
    assert lhs.agrees_with(rhs, 24)

import pytest
from hypothesis import given, strategies as st

from linvariant import _pykernels, kernels

compiled = pytest.importorskip("linvariant._ckernels")

MODULI = st.sampled_from([3 ** 39, 5 ** 27, 7 ** 20, 3 ** 5])


def residues(M, n):
    return st.lists(st.integers(0, M - 1), min_size=1, max_size=n)


@given(MODULI.flatmap(lambda M: st.tuples(st.just(M), residues(M, 40), residues(M, 40))), st.integers(1, 60))
def test_conv_agrees(args, n):
    M, a, b = args
    assert compiled.conv_mod(a, b, n, M) == _pykernels.conv_mod(a, b, n, M)


@given(MODULI.flatmap(lambda M: st.tuples(st.just(M), residues(M, 30))), st.integers(1, 50))
def test_inverse_agrees(args, n):
    M, a = args
    prime = next(q for q in (3, 5, 7) if M % q == 0)
    a = [(a[0] * prime + 1) % M] + a[1:]  # unit constant term
    got = compiled.series_inverse_mod(a, n, M)
    assert got == _pykernels.series_inverse_mod(a, n, M)
    assert _pykernels.conv_mod(a, got, n, M) == [1 % M] + [0] * (n - 1)


@given(MODULI.flatmap(lambda M: st.tuples(st.just(M), residues(M, 12), residues(M, 12), residues(M, 80))))
def test_lower_solve_agrees(args):
    M, dinv, rhs, flat = args
    n = min(len(dinv), len(rhs))
    dinv, rhs = dinv[:n], rhs[:n]
    rows = [[flat[(j * n + k) % len(flat)] for k in range(j)] for j in range(n)]
    assert compiled.lower_solve_mod(rows, dinv, rhs, M) == _pykernels.lower_solve_mod(rows, dinv, rhs, M)


def test_large_modulus_falls_back():
    M = 3 ** 60
    a = [1, 2, 3]
    assert kernels.conv_mod(a, a, 5, M) == _pykernels.conv_mod(a, a, 5, M)


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_oracle_same_on_both_backends():
    import os
    import subprocess
    import sys
    code = ("from linvariant import kernels; from linvariant.robba_oracle import cup_table_generate; "
            "t = cup_table_generate(2, 1, p=3); print(kernels.BACKEND, [str(v.value) for v in t.values()])")
    env = dict(os.environ, LINVARIANT_PURE_PYTHON="1")
    pure = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    env.pop("LINVARIANT_PURE_PYTHON")
    fast = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert pure.stdout.startswith("python ") and fast.stdout.startswith("cython ")
    assert pure.stdout.split(" ", 1)[1] == fast.stdout.split(" ", 1)[1]

"""Kernel selection: the compiled extension when importable, else pure Python.

Set LINVARIANT_PURE_PYTHON=1 to force the fallback.  The compiled kernels
work in 64-bit words, so moduli of 2**63 or more always use the fallback.
"""
import os

from . import _pykernels

_LIMIT = 1 << 63

try:
    if os.environ.get("LINVARIANT_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels as _compiled
    BACKEND = "cython"
except ImportError:
    _compiled = None
    BACKEND = "python"


def _pick(name, M):
    if _compiled is not None and M < _LIMIT:
        return getattr(_compiled, name)
    return getattr(_pykernels, name)


def conv_mod(a, b, n, M):
    return _pick("conv_mod", M)(list(a), list(b), n, M)


def lower_solve_mod(rows, dinv, rhs, M):
    return _pick("lower_solve_mod", M)(rows, list(dinv), list(rhs), M)


def series_inverse_mod(a, n, M):
    return _pick("series_inverse_mod", M)(list(a), n, M)

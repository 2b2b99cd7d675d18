# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integer kernels; moduli must be below 2**63."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t lv_mulmod(uint64_t a, uint64_t b, uint64_t m) {
        return (uint64_t)(((unsigned __int128)a * b) % m);
    }
    static inline uint64_t lv_addmod(uint64_t a, uint64_t b, uint64_t m) {
        uint64_t s = a + b;
        return s >= m ? s - m : s;
    }
    """
    uint64_t lv_mulmod(uint64_t a, uint64_t b, uint64_t m) nogil
    uint64_t lv_addmod(uint64_t a, uint64_t b, uint64_t m) nogil


cdef uint64_t* _load(list xs, Py_ssize_t n, uint64_t m) except NULL:
    cdef uint64_t* buf = <uint64_t*>malloc((n if n > 0 else 1) * sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(n):
        buf[i] = <uint64_t>(xs[i] % m)
    return buf


def conv_mod(list a, list b, Py_ssize_t n, object M):
    cdef uint64_t m = M
    cdef Py_ssize_t la = len(a), lb = len(b), i, j, top
    cdef uint64_t* pa = _load(a, la, m)
    cdef uint64_t* pb = _load(b, lb, m)
    cdef uint64_t* out = <uint64_t*>malloc((n if n > 0 else 1) * sizeof(uint64_t))
    cdef uint64_t ai
    try:
        for i in range(n):
            out[i] = 0
        with nogil:
            for i in range(la if la < n else n):
                ai = pa[i]
                if ai == 0:
                    continue
                top = lb if lb < n - i else n - i
                for j in range(top):
                    out[i + j] = lv_addmod(out[i + j], lv_mulmod(ai, pb[j], m), m)
        return [out[i] for i in range(n)]
    finally:
        free(pa)
        free(pb)
        free(out)


def lower_solve_mod(list rows, list dinv, list rhs, object M):
    cdef uint64_t m = M
    cdef Py_ssize_t n = len(rhs), j, k, lr
    cdef uint64_t* x = <uint64_t*>malloc((n if n > 0 else 1) * sizeof(uint64_t))
    cdef uint64_t acc, neg
    cdef list r
    try:
        for j in range(n):
            r = rows[j]
            lr = len(r)
            acc = <uint64_t>(rhs[j] % M)
            neg = 0
            for k in range(lr):
                neg = lv_addmod(neg, lv_mulmod(<uint64_t>(r[k] % M), x[k], m), m)
            acc = lv_addmod(acc, m - neg if neg else 0, m)
            x[j] = lv_mulmod(acc, <uint64_t>(dinv[j] % M), m)
        return [x[j] for j in range(n)]
    finally:
        free(x)


def series_inverse_mod(list a, Py_ssize_t n, object M):
    cdef uint64_t m = M
    cdef Py_ssize_t la = len(a), k, i, top
    cdef uint64_t* pa = _load(a, la, m)
    cdef uint64_t* out = <uint64_t*>malloc((n if n > 0 else 1) * sizeof(uint64_t))
    cdef uint64_t inv0 = pow(a[0], -1, M)
    cdef uint64_t acc
    try:
        if n > 0:
            out[0] = inv0
        with nogil:
            for k in range(1, n):
                acc = 0
                top = k if k < la - 1 else la - 1
                for i in range(1, top + 1):
                    acc = lv_addmod(acc, lv_mulmod(pa[i], out[k - i], m), m)
                out[k] = lv_mulmod(m - acc if acc else 0, inv0, m)
        return [out[k] for k in range(n)]
    finally:
        free(pa)
        free(out)

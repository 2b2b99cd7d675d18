"""Pure-Python integer kernels (reference implementation of _ckernels)."""


def conv_mod(a, b, n, M):
    """First ``n`` coefficients of the product of two series, reduced mod M."""
    out = [0] * n
    la, lb = len(a), len(b)
    for i in range(min(la, n)):
        ai = a[i]
        if not ai:
            continue
        top = min(lb, n - i)
        for j in range(top):
            out[i + j] += ai * b[j]
    return [x % M for x in out]


def lower_solve_mod(rows, dinv, rhs, M):
    """Forward substitution x_j = (rhs_j - sum_{k<j} rows[j][k] x_k) * dinv_j mod M."""
    n = len(rhs)
    x = [0] * n
    for j in range(n):
        r = rows[j]
        acc = rhs[j]
        for k in range(len(r)):
            if r[k]:
                acc -= r[k] * x[k]
        x[j] = (acc * dinv[j]) % M
    return x


def series_inverse_mod(a, n, M):
    """Inverse of a power series with unit constant term, n coefficients mod M."""
    inv0 = pow(a[0], -1, M)
    out = [0] * n
    out[0] = inv0 % M
    for k in range(1, n):
        acc = 0
        for i in range(1, min(k, len(a) - 1) + 1):
            acc += a[i] * out[k - i]
        out[k] = (-acc * inv0) % M
    return out

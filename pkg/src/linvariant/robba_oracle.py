"""Truncated Robba-ring series and the Herr-complex computations built on them.

A ``LaurentSeries`` holds rational coefficients of pi^lo .. pi^hi and says
what it knows outside that window:

* below ``lo``: ``"zero"``, ``"small"`` (every coefficient is 0 mod p**prec)
  or ``"open"`` (unknown);
* above ``hi``: ``"zero"`` or ``"open"``.

``prec`` is None for exact coefficients, otherwise an absolute p-adic
precision shared by the whole series.  Every operation returns the window on
which its output is determined and raises WindowExhausted when none is left.

The character conventions: for delta = |x| x^m the module R(delta) has
phi(e) = p^(m-1) e and gamma(e) = chi^m e; for delta = x^(-m) it has
phi(e) = p^(-m) e and gamma(e) = chi^(-m) e.  gamma is fixed by
chi(gamma) = 1 + p.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from . import kernels
from .errors import InputError, SingularDiagonal, WindowExhausted
from .padic_linalg import (
    PadicScalar,
    check_prime,
    padic_log,
    q_str,
    reduce_mod,
    to_q,
    valuation,
)

DEFAULT_P = 3
DEFAULT_WINDOW = (-8, 80)

_LOWER = ("zero", "small", "open")
_UPPER = ("zero", "open")


def word_precision(p: int) -> int:
    """Largest N with p**N below 2**63, the range of the compiled kernels."""
    n = 0
    while p ** (n + 1) < (1 << 63):
        n += 1
    return n


def default_precision(p: int) -> int:
    return min(word_precision(p), 40)


def chi(p: int) -> int:
    return 1 + p


# --------------------------------------------------------------------------
# integer encodings of p-adic coefficient lists


def _vmin(values, p):
    v = math.inf
    for x in values:
        if x:
            v = min(v, valuation(x, p))
    return v


def _encode(values, p, sigma, M):
    out = []
    ps = Fraction(p) ** sigma
    for x in values:
        if not x:
            out.append(0)
            continue
        y = x * ps
        out.append((y.numerator * pow(y.denominator, -1, M)) % M)
    return out


def _decode(ints, p, sigma, prec):
    ps = Fraction(p) ** sigma
    return [reduce_mod(Fraction(n) / ps, p, prec) if n else Fraction(0) for n in ints]


def _frac_conv(a, b, n=None):
    """Truncated product of two Fraction lists, via a common denominator."""
    if not a or not b:
        return [Fraction(0)] * (n or 0)
    n = n if n is not None else len(a) + len(b) - 1
    da = math.lcm(*(x.denominator for x in a))
    db = math.lcm(*(x.denominator for x in b))
    ia = [int(x * da) for x in a]
    ib = [int(x * db) for x in b]
    out = [0] * n
    for i, x in enumerate(ia):
        if x == 0 or i >= n:
            continue
        lim = min(len(ib), n - i)
        for j in range(lim):
            y = ib[j]
            if y:
                out[i + j] += x * y
    d = da * db
    return [Fraction(x, d) for x in out]


# --------------------------------------------------------------------------


class LaurentSeries:
    """Truncated Laurent series in pi over Q_p with explicit window semantics."""

    __slots__ = ("p", "lo", "coeffs", "prec", "lower", "upper")

    def __init__(self, p, lo, coeffs, prec=None, lower="zero", upper="zero"):
        check_prime(p)
        if lower not in _LOWER or upper not in _UPPER:
            raise InputError(f"bad boundary tags {lower!r}, {upper!r}")
        if lower == "small" and prec is None:
            raise InputError("a small tail needs a precision")
        cs = [to_q(c) for c in coeffs]
        if not cs:
            cs = [Fraction(0)]
        if prec is not None:
            cs = [reduce_mod(c, p, prec) for c in cs]
        self.p = p
        self.lo = int(lo)
        self.coeffs = tuple(cs)
        self.prec = prec
        self.lower = lower
        self.upper = upper

    # constructors
    @classmethod
    def from_dict(cls, p, terms, prec=None):
        terms = {int(k): to_q(v) for k, v in terms.items() if to_q(v) != 0}
        if not terms:
            return cls(p, 0, [0], prec)
        lo, hi = min(terms), max(terms)
        return cls(p, lo, [terms.get(k, 0) for k in range(lo, hi + 1)], prec)

    @classmethod
    def monomial(cls, p, k, c=1):
        return cls(p, k, [c])

    @classmethod
    def constant(cls, p, c, prec=None):
        if isinstance(c, PadicScalar):
            return cls(p, 0, [c.value], c.prec)
        return cls(p, 0, [c], prec)

    @property
    def hi(self):
        return self.lo + len(self.coeffs) - 1

    @property
    def window(self):
        return (self.lo, self.hi)

    @property
    def is_exact(self):
        return self.prec is None

    def coeff(self, k):
        if self.lo <= k <= self.hi:
            return self.coeffs[k - self.lo]
        if k < self.lo:
            if self.lower == "open":
                raise WindowExhausted(f"degree {k} lies below the known window {self.window}")
            return Fraction(0)
        if self.upper == "open":
            raise WindowExhausted(f"degree {k} lies above the known window {self.window}")
        return Fraction(0)

    def _known_low(self):
        return -math.inf if self.lower == "zero" else self.lo

    def _known_high(self):
        return math.inf if self.upper == "zero" else self.hi

    def min_valuation(self):
        return _vmin(self.coeffs, self.p)

    def _error_floor(self):
        v = self.min_valuation()
        if self.lower == "small":
            v = min(v, self.prec)
        return v

    def restrict(self, lo=None, hi=None):
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        if lo < self._known_low() or hi > self._known_high():
            raise WindowExhausted(f"window [{lo}, {hi}] is not inside the known window {self.window}")
        cs = [self.coeff(k) for k in range(lo, hi + 1)]
        lower = self.lower if lo <= self.lo else ("small" if self.prec is not None and all(
            valuation(self.coeff(k), self.p) >= self.prec for k in range(self.lo, lo)) and self.lower != "open" else "open")
        if lower == "zero" and lo > self.lo and any(self.coeff(k) for k in range(self.lo, lo)):
            lower = "open"
        upper = self.upper if hi >= self.hi else "open"
        if upper == "open" and self.upper == "zero" and not any(self.coeff(k) for k in range(hi + 1, self.hi + 1)):
            upper = "zero"
        if lower == "open" and self.lower == "zero" and not any(self.coeff(k) for k in range(self.lo, lo)):
            lower = "zero"
        return LaurentSeries(self.p, lo, cs, self.prec, lower, upper)

    def trimmed(self):
        """Drop zero coefficients at closed ends."""
        cs = list(self.coeffs)
        lo = self.lo
        if self.lower == "zero":
            while len(cs) > 1 and cs[0] == 0:
                cs.pop(0)
                lo += 1
        if self.upper == "zero":
            while len(cs) > 1 and cs[-1] == 0:
                cs.pop()
        return LaurentSeries(self.p, lo, cs, self.prec, self.lower, self.upper)

    def principal_part(self):
        """Coefficients of negative degree, as a dict (requires a closed or small lower end)."""
        if self.lower == "open":
            raise WindowExhausted("principal part unknown below the window")
        if self.hi < -1 and self.upper == "open":
            raise WindowExhausted("window does not reach degree -1")
        return {k: self.coeff(k) for k in range(self.lo, 0) if self.coeff(k) != 0}

    def nonnegative_part(self):
        lo = max(self.lo, 0)
        if self.hi < 0:
            if self.upper == "open":
                raise WindowExhausted("window has no nonnegative degrees")
            return LaurentSeries(self.p, 0, [0], self.prec)
        lower = "zero"
        return LaurentSeries(self.p, lo, self.coeffs[lo - self.lo:], self.prec, lower, self.upper)

    def is_zero(self):
        """All window coefficients vanish (mod p**prec when approximate)."""
        return all(c == 0 for c in self.coeffs)

    def digits_of_agreement(self, other, lo=None, hi=None):
        """min valuation of self - other on a common window (inf when equal)."""
        d = self - other
        lo = d.lo if lo is None else max(lo, d.lo)
        hi = d.hi if hi is None else min(hi, d.hi)
        v = math.inf
        for k in range(lo, hi + 1):
            c = d.coeff(k)
            if c:
                v = min(v, valuation(c, self.p))
        if d.prec is not None:
            v = min(v, d.prec)
        return v

    # arithmetic
    def _check(self, other):
        if not isinstance(other, LaurentSeries):
            raise InputError("expected a LaurentSeries")
        if other.p != self.p:
            raise InputError("series over different primes")

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(self.p, other)
        self._check(other)
        kl = max(self._known_low(), other._known_low())
        kh = min(self._known_high(), other._known_high())
        if kl == -math.inf:
            lo, lower = min(self.lo, other.lo), "zero"
        else:
            lo = int(kl)
            lower = "open" if "open" in (self.lower, other.lower) else "small"
            if self.lower == "open" and other.lower == "small" and other.lo > lo:
                pass
        if kh == math.inf:
            hi, upper = max(self.hi, other.hi), "zero"
        else:
            hi, upper = int(kh), "open"
        if hi < lo:
            raise WindowExhausted("sum has an empty reliable window")
        prec = _min_prec(self.prec, other.prec)
        cs = []
        for k in range(lo, hi + 1):
            cs.append(self._coeff_or_zero(k) + other._coeff_or_zero(k))
        return LaurentSeries(self.p, lo, cs, prec, lower, upper)

    __radd__ = __add__

    def _coeff_or_zero(self, k):
        if self.lo <= k <= self.hi:
            return self.coeffs[k - self.lo]
        return Fraction(0)

    def __neg__(self):
        return LaurentSeries(self.p, self.lo, [-c for c in self.coeffs], self.prec, self.lower, self.upper)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(self.p, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if isinstance(c, PadicScalar):
            if c.p != self.p:
                raise InputError("scalar over a different prime")
            val, cprec = c.value, c.prec
        else:
            val, cprec = to_q(c), None
        v = valuation(val, self.p)
        prec = None
        cands = []
        if self.prec is not None and v != math.inf:
            cands.append(self.prec + v)
        if cprec is not None:
            vm = self._error_floor()
            cands.append(cprec + (vm if vm != math.inf else 0))
        if cands:
            prec = int(min(cands))
        lower = self.lower
        if prec is None and lower == "small":
            prec = self.prec
        return LaurentSeries(self.p, self.lo, [val * x for x in self.coeffs], prec, lower, self.upper)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        self._check(other)
        lo, hi, lower, upper = _mul_bounds(self, other)
        prec = _mul_prec(self, other)
        n = hi - lo + 1
        base = self.lo + other.lo
        off = lo - base
        if prec is None:
            full = _frac_conv(list(self.coeffs), list(other.coeffs), off + n)
            cs = full[off:off + n]
        else:
            vf, vg = self.min_valuation(), other.min_valuation()
            sf = int(max(0, -vf)) if vf != math.inf else 0
            sg = int(max(0, -vg)) if vg != math.inf else 0
            M = self.p ** (prec + sf + sg)
            a = _encode(self.coeffs, self.p, sf, M)
            b = _encode(other.coeffs, self.p, sg, M)
            full = kernels.conv_mod(a, b, off + n, M)
            cs = _decode(full[off:off + n], self.p, sf + sg, prec)
        cs = cs + [Fraction(0)] * (n - len(cs))
        if lower == "small" and prec is None:
            prec = _min_prec(self.prec, other.prec)
        return LaurentSeries(self.p, lo, cs, prec, lower, upper)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n):
        if n < 0:
            return inverse(self) ** (-n)
        out = LaurentSeries.constant(self.p, 1)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return (f"LaurentSeries(p={self.p}, window=[{self.lo}, {self.hi}], lower={self.lower}, "
                f"upper={self.upper}, prec={self.prec})")

    def to_json(self):
        return {
            "p": self.p,
            "window": [self.lo, self.hi],
            "lower": self.lower,
            "upper": self.upper,
            "precision": self.prec,
            "coefficients": [q_str(c) for c in self.coeffs],
        }


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _mul_bounds(f, g):
    for a, b in ((f, g), (g, f)):
        if a.lower != "zero" and b.upper == "open":
            raise WindowExhausted(
                "product of a series with an infinite lower tail and one open above is not determined")
    lo = f.lo + g.lo
    if "open" in (f.lower, g.lower):
        lower = "open"
    elif "small" in (f.lower, g.lower):
        lower = "small"
    else:
        lower = "zero"
    if f.lower == "open":
        lo = max(lo, f.lo + g.hi)
    if g.lower == "open":
        lo = max(lo, g.lo + f.hi)
    if f.upper == "zero" and g.upper == "zero":
        hi, upper = f.hi + g.hi, "zero"
    else:
        hi, upper = math.inf, "open"
        if f.upper == "open":
            hi = min(hi, f.hi + g.lo)
        if g.upper == "open":
            hi = min(hi, g.hi + f.lo)
        hi = int(hi)
    if hi < lo:
        raise WindowExhausted("product has an empty reliable window")
    return lo, hi, lower, upper


def _mul_prec(f, g):
    cands = []
    for a, b in ((f, g), (g, f)):
        if a.prec is not None:
            v = b._error_floor()
            if v != math.inf:
                cands.append(a.prec + v)
    if not cands:
        if f.prec is not None or g.prec is not None:
            return max(x for x in (f.prec, g.prec) if x is not None)
        return None
    return int(min(cands))


# --------------------------------------------------------------------------
# basic series


def pi_series(p):
    return LaurentSeries.monomial(p, 1)


def t_series(p, hi):
    """t = log(1 + pi) on degrees 0..hi."""
    cs = [Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, hi + 1)]
    return LaurentSeries(p, 0, cs, None, "zero", "open")


def t_power(p, m, hi):
    """t**m known through degree ``hi`` (m >= 0)."""
    if m == 0:
        return LaurentSeries(p, 0, [1] + [0] * max(0, hi), None, "zero", "open")
    t = t_series(p, hi)
    out = t
    for _ in range(m - 1):
        out = out * t
    return out.restrict(out.lo, min(out.hi, hi)) if out.hi > hi else out


def inverse(f, hi=None):
    """1/f for an exact series with closed lower end.

    With f = pi^v U, the inverse pi^-v U^-1 is known through degree
    hi(f) - 2v, or through ``hi`` when f is a polynomial.
    """
    if f.prec is not None:
        raise InputError("inverse is implemented for exact series only")
    if f.lower != "zero":
        raise WindowExhausted("inverse needs a closed lower end")
    f = f.trimmed()
    if f.coeffs[0] == 0:
        raise ZeroDivisionError("inverse of the zero series")
    v = f.lo
    if f.upper == "open":
        top = f.hi - 2 * v
        if hi is not None:
            top = min(top, hi)
    else:
        top = hi if hi is not None else f.hi - 2 * v
    n = top + v + 1
    if n <= 0:
        raise WindowExhausted("inverse has an empty reliable window")
    u = list(f.coeffs) + [Fraction(0)] * max(0, n - len(f.coeffs))
    inv = [Fraction(0)] * n
    inv[0] = 1 / u[0]
    for k in range(1, n):
        s = Fraction(0)
        for j in range(1, k + 1):
            if u[j]:
                s += u[j] * inv[k - j]
        inv[k] = -s * inv[0]
    return LaurentSeries(f.p, -v, inv, None, "zero", "open")


def partial(f):
    """The derivation (1 + pi) d/dpi, which is d/dt."""
    p = f.p
    lo = f.lo - 1 if f.lower in ("zero", "small") else f.lo
    hi = f.hi if f.upper == "zero" else f.hi - 1
    if hi < lo:
        raise WindowExhausted("derivative has an empty reliable window")
    cs = []
    for j in range(lo, hi + 1):
        a = f._coeff_or_zero(j + 1) * (j + 1)
        b = f._coeff_or_zero(j) * j
        cs.append(a + b)
    return LaurentSeries(p, lo, cs, f.prec, f.lower, f.upper)


def partial_power(f, r):
    for _ in range(r):
        f = partial(f)
    return f


# --------------------------------------------------------------------------
# phi, gamma, psi


@lru_cache(maxsize=None)
def _phi_pi(p):
    return tuple([0] + [comb(p, j) for j in range(1, p + 1)])


@lru_cache(maxsize=None)
def _gamma_pi(p, a):
    """gamma(pi) = (1+pi)^a - 1 as an exact tuple (a a positive integer)."""
    return tuple([0] + [comb(a, j) for j in range(1, a + 1)])


def _horner_poly(coeffs_pos, poly, n, p, prec):
    """sum_k c_k poly^k truncated to n terms, poly with zero constant term."""
    if prec is None:
        out = [Fraction(0)] * n
        polyf = [Fraction(x) for x in poly]
        for c in reversed(coeffs_pos):
            out = _frac_conv(out, polyf, n)
            out[0] += c
        return out
    v = _vmin(coeffs_pos, p)
    s = int(max(0, -v)) if v != math.inf else 0
    M = p ** (prec + s)
    ints = _encode(coeffs_pos, p, s, M)
    out = [0] * n
    pl = [x % M for x in poly]
    for c in reversed(ints):
        out = kernels.conv_mod(out, pl, n, M)
        out[0] = (out[0] + c) % M
    return _decode(out, p, s, prec)


@lru_cache(maxsize=None)
def _phi_inv_pi_series(p, n, M):
    """phi(1/pi) = w^p E(w) in w = 1/pi; returns E mod M to n terms."""
    a = [0] * n
    a[0] = 1
    for j in range(1, p):
        if p - j < n:
            a[p - j] = comb(p, j) % M
    return tuple(kernels.series_inverse_mod(a, n, M))


def phi_act(f, prec=None):
    """Frobenius pi -> (1+pi)^p - 1.

    Nonnegative degrees are substituted exactly.  Negative degrees become
    infinite series in 1/pi, computed modulo p**prec (default: the series'
    own precision or the default working precision).
    """
    p = f.p
    if f.lower == "open" and f.lo < 0:
        raise WindowExhausted("phi needs the principal part")
    # nonnegative part
    if f.hi >= 0:
        pos = [f._coeff_or_zero(k) for k in range(0, f.hi + 1)]
        if f.upper == "zero":
            n_pos = p * f.hi + 1
            upper = "zero"
        else:
            n_pos = f.hi + 1
            upper = "open"
        pos_vals = _horner_poly(pos, _phi_pi(p), n_pos, p, f.prec)
    else:
        pos_vals = []
        upper = f.upper
        n_pos = 0
    neg = [f.coeff(k) for k in range(f.lo, 0)] if f.lo < 0 else []
    if not any(neg) and f.lower == "zero":
        return LaurentSeries(p, 0, pos_vals or [0], f.prec, "zero", upper)
    work = prec if prec is not None else (f.prec if f.prec is not None else default_precision(p))
    if f.prec is not None:
        work = min(work, f.prec)
    S = -f.lo
    v = _vmin(neg, p)
    sigma = int(max(0, -v)) if v != math.inf else 0
    K = work + sigma
    M = p ** K
    dmax = (p - 1) * K
    L = p * S + dmax + 1  # w-degrees 0..L-1
    E = _phi_inv_pi_series(p, L, M)
    wpE = [0] * L
    for i in range(L - p):
        wpE[i + p] = E[i]
    # neg[i] is the coefficient of pi^(lo+i) = w^(S-i)
    by_s = {S - i: c for i, c in enumerate(neg)}
    ints = _encode([by_s.get(s, 0) for s in range(1, S + 1)], p, sigma, M)
    h = [0] * L
    for s in range(S, 0, -1):
        h = kernels.conv_mod(h, wpE, L, M)
        h[0] = (h[0] + ints[s - 1]) % M
    h = kernels.conv_mod(h, wpE, L, M)
    negv = _decode(h, p, sigma, work)
    lo = -(L - 1)
    cs = [negv[-k] for k in range(lo, 0)] + (pos_vals if pos_vals else [Fraction(0)])
    if not pos_vals and upper == "open":
        raise WindowExhausted("phi of a series known only in negative degrees")
    lower = "small"
    return LaurentSeries(p, lo, cs, work, lower, upper if pos_vals else "zero")


def _gamma_unit(p, a, n):
    """U = gamma(pi)/pi to n terms, exact; a may be any p-adic integer rational."""
    a = to_q(a)
    return [Fraction(_binom_q(a, j + 1)) for j in range(n)]


def _binom_q(a, j):
    num = Fraction(1)
    for i in range(j):
        num *= (a - i)
    return num / factorial(j)


def gamma_act(f, a=None, hi=None):
    """gamma_a : pi -> (1+pi)^a - 1 with a = chi(gamma) = 1 + p by default.

    For a series with a closed upper end and negative degrees the image is
    infinite upward; ``hi`` sets how far it is computed (default: f.hi).
    """
    p = f.p
    a = chi(p) if a is None else to_q(a)
    if valuation(a, p) != 0:
        raise InputError("gamma needs a p-adic unit exponent")
    if f.lower == "open":
        raise WindowExhausted("gamma needs a known lower end")
    has_neg = f.lo < 0 and any(f._coeff_or_zero(k) for k in range(f.lo, 0))
    integral_a = a.denominator == 1 and a > 0
    if f.upper == "zero" and not has_neg and integral_a and f.lower == "zero":
        top = int(a) * max(f.hi, 0)
        upper = "zero"
    else:
        top = f.hi if hi is None or f.upper == "open" else hi
        upper = "open"
    lo = f.lo
    n = top - lo + 1
    if n <= 0:
        raise WindowExhausted("gamma has an empty reliable window")
    need = top - lo + 2
    U = _gamma_unit(p, a, need)
    prec = f.prec
    coeffs = [f._coeff_or_zero(k) for k in range(lo, f.hi + 1)]
    if prec is None:
        # sum_k f_k pi^k U^k, via U^k for each k (windows here are short or exact)
        out = [Fraction(0)] * n
        Uinv = _series_inv_frac(U, need)
        pos_pow = [Fraction(1)] + [Fraction(0)] * (need - 1)
        neg_pow = pos_pow
        powers = {0: pos_pow}
        for k in range(1, max(0, f.hi) + 1):
            pos_pow = _frac_conv(pos_pow, U, need)
            powers[k] = pos_pow
        for s in range(1, max(0, -lo) + 1):
            neg_pow = _frac_conv(neg_pow, Uinv, need)
            powers[-s] = neg_pow
        for idx, c in enumerate(coeffs):
            if not c:
                continue
            k = lo + idx
            pw = powers[k]
            for j in range(k, top + 1):
                d = j - k
                if d < len(pw) and pw[d]:
                    out[j - lo] += c * pw[d]
        return LaurentSeries(p, lo, out, None, f.lower, upper)
    v = _vmin(coeffs, p)
    sigma = int(max(0, -v)) if v != math.inf else 0
    M = p ** (prec + sigma)
    Ui = _encode(U, p, 0, M)
    Uinv = kernels.series_inverse_mod(Ui, need, M)
    ints = _encode(coeffs, p, sigma, M)
    out = [0] * n
    S = max(0, -lo)
    if S:
        out_neg = _gamma_neg(ints[:S], S, Uinv, need, M)
        for d, val in enumerate(out_neg):
            j = -S + d
            if lo <= j <= top:
                out[j - lo] = (out[j - lo] + val) % M
    pos = ints[S:] if lo < 0 else [0] * lo + ints
    if pos:
        g = [x % M for x in _gamma_pi(p, int(a))] if integral_a else [0] + Ui
        m = top + 1
        acc = [0] * m
        for c in reversed(pos):
            acc = kernels.conv_mod(acc, g, m, M)
            acc[0] = (acc[0] + c) % M
        for j in range(max(lo, 0), top + 1):
            out[j - lo] = (out[j - lo] + acc[j]) % M
    return LaurentSeries(p, lo, _decode(out, p, sigma, prec), prec, f.lower, upper)


def _gamma_neg(neg_ints, S, Uinv, need, M):
    """sum_{s=1}^S c_{-s} pi^{-s} Uinv^s as coefficients of pi^(-S) .. pi^(need-S-1).

    ``neg_ints[i]`` is the coefficient of pi^(-S+i).
    """
    # pi^{-s} Uinv^s = pi^{-S} * pi^{S-s} Uinv^s; Horner on y = pi * Uinv^{-1}... use direct powers
    acc = [0] * need
    pw = [1] + [0] * (need - 1)
    for s in range(1, S + 1):
        pw = kernels.conv_mod(pw, Uinv, need, M)
        c = neg_ints[S - s]
        if not c:
            continue
        shift = S - s
        for d in range(need - shift):
            if pw[d]:
                acc[d + shift] = (acc[d + shift] + c * pw[d]) % M
    return acc


def _series_inv_frac(u, n):
    inv = [Fraction(0)] * n
    inv[0] = 1 / Fraction(u[0])
    for k in range(1, n):
        s = Fraction(0)
        for j in range(1, min(k, len(u) - 1) + 1):
            if u[j]:
                s += u[j] * inv[k - j]
        inv[k] = -s * inv[0]
    return inv


def _taylor_shift(coeffs, c):
    """Coefficients of P(x + c) from those of P(x)."""
    a = list(coeffs)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += c * a[j + 1]
    return a


def _psi_poly(coeffs, p):
    """psi of a polynomial in pi, through the (1+pi)-basis: psi(u^j) = u^(j/p) or 0."""
    in_u = _taylor_shift(coeffs, -1)  # P(u - 1)
    kept = [in_u[j] for j in range(0, len(in_u), p)]
    return _taylor_shift(kept, 1)  # R(1 + pi)


def psi_act(f):
    """The left inverse psi of phi.

    A polynomial part is pushed through the (1+pi)-basis.  The principal part
    uses pi^-s = phi(pi)^-s (phi(pi)/pi)^s, so psi(pi^-s) = pi^-s psi((phi(pi)/pi)^s).
    """
    p = f.p
    if f.upper == "open" and any(f._coeff_or_zero(k) for k in range(max(f.lo, 0), f.hi + 1)):
        raise WindowExhausted("psi of a power series needs all of its coefficients")
    if f.upper == "open" and f.hi >= 0:
        raise WindowExhausted("psi needs a closed upper end")
    # positive part
    pos = [f._coeff_or_zero(k) for k in range(0, f.hi + 1)] if f.hi >= 0 else []
    pos_out = _psi_poly(pos, p) if pos else []
    neg = [f._coeff_or_zero(k) for k in range(f.lo, 0)] if f.lo < 0 else []
    S = len(neg)
    if S:
        # pi^S f_neg is a polynomial P0 of degree < S; psi(f_neg) = pi^-S psi(Q^S P0)
        P0 = neg  # index i <-> pi^i
        Q = [Fraction(comb(p, j + 1)) for j in range(p)]  # phi(pi)/pi
        QS = [Fraction(1)]
        for _ in range(S):
            QS = _frac_conv(QS, Q)
        P = _frac_conv(QS, P0)
        R = _psi_poly(P, p)
        neg_out = {i - S: c for i, c in enumerate(R)}
    else:
        neg_out = {}
    terms = {}
    for i, c in enumerate(pos_out):
        terms[i] = terms.get(i, 0) + c
    for k, c in neg_out.items():
        terms[k] = terms.get(k, 0) + c
    if f.lower == "zero":
        lo = f.lo if f.lo < 0 else 0
        hi = max(max(terms) if terms else 0, 0)
        cs = [terms.get(k, Fraction(0)) for k in range(lo, hi + 1)]
        return LaurentSeries(p, lo, cs, f.prec, "zero", "zero").trimmed()
    if f.lower == "small":
        lo = f.lo
        hi = max(max(terms) if terms else 0, 0)
        cs = [terms.get(k, Fraction(0)) for k in range(lo, hi + 1)]
        return LaurentSeries(p, lo, cs, f.prec, "small", "zero")
    # open below: unknown pi^-s with s > S land in degrees <= -(S+1)/p
    lo = math.floor(-(S + 1) / p) + 1
    hi = max(max(terms) if terms else 0, lo)
    cs = [terms.get(k, Fraction(0)) for k in range(lo, hi + 1)]
    return LaurentSeries(p, lo, cs, f.prec, "open", "zero")


# --------------------------------------------------------------------------
# residues


def residue(f):
    """res(f dt): the pi^-1 coefficient of f / (1 + pi)."""
    p = f.p
    if f.lower == "open":
        raise WindowExhausted("residue needs the whole principal part")
    if f.hi < -1 and f.upper == "open":
        raise WindowExhausted("window does not reach degree -1")
    total = Fraction(0)
    for k in range(f.lo, 0):
        c = f._coeff_or_zero(k)
        if c:
            n = -1 - k
            total += c if n % 2 == 0 else -c
    return PadicScalar(p, total, f.prec)


def log_chi(p, prec=None):
    return padic_log(chi(p), p, prec if prec is not None else default_precision(p))


def h2_normalize(f, prec=None):
    """The H^2(R(chi)) -> Q_p map: -(1 - 1/p)^-1 (log chi(gamma))^-1 res(f dt)."""
    p = f.p
    r = residue(f)
    lc = log_chi(p, prec)
    return r * Fraction(-p, p - 1) / lc


# --------------------------------------------------------------------------
# solvers


def solve_one_minus_phi(rhs, hi=None, scale=1):
    """Solve (1 - scale*phi) a = rhs for a power series a.

    The system is triangular: degree j has diagonal 1 - scale*p^j.  A zero
    diagonal is accepted only when the equation there is consistent; the
    coefficient is then pinned to 0.  Returns a series exact on [0, hi].
    """
    p = rhs.p
    scale = to_q(scale)
    if rhs.lower == "open":
        raise WindowExhausted("right-hand side unknown below its window")
    if any(rhs._coeff_or_zero(k) for k in range(rhs.lo, 0)):
        raise InputError("right-hand side must be a power series")
    top = rhs.hi if hi is None else min(hi, rhs._known_high())
    if top == math.inf:
        top = rhs.hi
    top = int(top)
    n = top + 1
    phi = _phi_pi(p)
    pows = [[Fraction(1)] + [Fraction(0)] * (n - 1)]
    for _ in range(1, n):
        pows.append(_frac_conv(pows[-1], [Fraction(x) for x in phi], n))
    a = [Fraction(0)] * n
    for j in range(n):
        s = rhs._coeff_or_zero(j)
        for i in range(j):
            if a[i] and pows[i][j]:
                s += scale * a[i] * pows[i][j]
        d = 1 - scale * Fraction(p) ** j
        if d == 0:
            if s != 0:
                raise SingularDiagonal(j)
            a[j] = Fraction(0)
        else:
            a[j] = s / d
    return LaurentSeries(p, 0, a, rhs.prec, "zero", "open")


def solve_gamma_shift(rhs, w=0, hi=None, a=None):
    """Solve (1 - chi^w gamma) x = rhs for x with a closed lower end.

    Degree j has diagonal 1 - chi^(j+w); a zero diagonal is pinned when the
    equation there is consistent and reported through SingularDiagonal
    otherwise.
    """
    p = rhs.p
    a = chi(p) if a is None else to_q(a)
    if rhs.lower != "zero":
        raise WindowExhausted("gamma solve needs a closed lower end")
    lo = rhs.lo
    top = rhs.hi if hi is None else hi
    if rhs.upper == "open":
        top = min(top, rhs.hi)
    n = top - lo + 1
    need = n + 1
    U = _gamma_unit(p, a, need)
    Uinv = _series_inv_frac(U, need)
    cw = a ** w
    cols = {}
    cur = [Fraction(1)] + [Fraction(0)] * (need - 1)
    cols[0] = cur
    for k in range(1, max(top, 0) + 1):
        cur = _frac_conv(cur, U, need)
        cols[k] = cur
    cur = cols[0]
    for s in range(1, max(0, -lo) + 1):
        cur = _frac_conv(cur, Uinv, need)
        cols[-s] = cur
    x = [Fraction(0)] * n
    for j in range(lo, top + 1):
        s = rhs._coeff_or_zero(j)
        for k in range(lo, j):
            c = x[k - lo]
            if c and cols[k][j - k]:
                s += cw * c * cols[k][j - k]
        d = 1 - cw * cols[j][0]
        if d == 0:
            if s != 0:
                raise SingularDiagonal(j)
            x[j - lo] = Fraction(0)
        else:
            x[j - lo] = s / d
    return LaurentSeries(p, lo, x, rhs.prec, "zero", "open")


# --------------------------------------------------------------------------
# the rank-one cocycles


def _cm(m):
    return Fraction((-1) ** (m - 1), factorial(m - 1))


def _inv_pi_plus_half(p, hi):
    cs = [Fraction(1), Fraction(1, 2)] + [Fraction(0)] * max(0, hi)
    return LaurentSeries(p, -1, cs[: hi + 2], None, "zero", "zero" if hi <= 0 else "zero")


@lru_cache(maxsize=None)
def solve_a(p, hi):
    """The power series a with (1 - phi) a = (1 - chi gamma)(1/pi + 1/2)."""
    h = LaurentSeries(p, -1, [1, Fraction(1, 2)])
    rhs = h - gamma_act(h, hi=hi).scale(chi(p))
    pp = rhs.principal_part()
    if any(pp.values()):
        raise InputError("right-hand side has a pole")
    return solve_one_minus_phi(rhs.restrict(0, rhs.hi) if rhs.lo < 0 else rhs)


def cocycle_alpha(m, p=DEFAULT_P, hi=None):
    """alpha_m = c_m d^(m-1) (1/pi + 1/2, a), the H^1_f generator of R(|x| x^m)."""
    if m < 1:
        raise InputError("m must be >= 1")
    hi = DEFAULT_WINDOW[1] if hi is None else hi
    a = solve_a(p, hi + m)
    h = LaurentSeries(p, -1, [1, Fraction(1, 2)])
    c = _cm(m)
    return partial_power(h, m - 1).scale(c), partial_power(a, m - 1).scale(c)


@dataclass
class BSolution:
    """b with (1 - chi gamma) b = (1 - phi)(1/pi) and psi(b) = 0, modulo p**prec."""

    series: LaurentSeries
    prec: int
    g_window: tuple
    agreement: float


def _solve_g(p, N, i, Lg, Hg):
    """g with g - chi (1+pi)^i gamma(g) = 1/pi mod p**N on degrees [Lg, Hg].

    Diagonal part D_k = 1 - chi^(k+1) is divisible by p; the sub-diagonal
    pivot is a unit, so the system is swept from the top with the diagonal
    moved to the right-hand side.  Each sweep gains a digit.
    """
    M = p ** N
    c = chi(p)
    W = Hg - Lg + 1
    need = Hg - Lg + 4
    U = [comb(c, j + 1) % M for j in range(need)]
    Uinv = kernels.series_inverse_mod(U, need, M)
    ui = [comb(i, e) for e in range(i + 1)]
    pows = {0: [1] + [0] * (need - 1)}
    cur = pows[0]
    for s in range(1, -Lg + 1):
        cur = kernels.conv_mod(cur, Uinv, need, M)
        pows[-s] = cur
    cur = pows[0]
    for k in range(1, Hg + 2):
        cur = kernels.conv_mod(cur, U, need, M)
        pows[k] = cur
    cols = {k: kernels.conv_mod(pows[k], ui, need, M) for k in range(Lg, Hg + 2)}
    D = {k: (1 - c * cols[k][0]) % M for k in range(Lg, Hg + 2)}
    rows, dinv = [], []
    for q in range(W):
        j = q + 1 + Lg
        rows.append([(-c * cols[k][j - k]) % M for k in range(Lg, j - 1)])
        piv = (-c * cols[j - 1][1]) % M
        dinv.append(pow(piv, -1, M))
    g = [0] * W
    for _ in range(N + 10):
        rhs = []
        for q in range(W):
            j = q + 1 + Lg
            w = 1 if j == -1 else 0
            gj = g[j - Lg] if j <= Hg else 0
            rhs.append((w - D[j] * gj) % M)
        new = kernels.lower_solve_mod(rows, dinv, rhs, M)
        if new == g:
            break
        g = new
    return {k: g[k - Lg] for k in range(Lg, Hg + 1)}


def _b_coeffs(p, N, Lg, Hg, Lb, hb):
    """Coefficients of b on [Lb, hb] mod p**N as a dict degree -> int."""
    M = p ** N
    L = -Lb + p + 2
    E = _phi_inv_pi_series(p, L, M)
    wpE = [0] * L
    for d in range(L - p):
        wpE[d + p] = E[d]
    phi = [x % M for x in _phi_pi(p)]
    npos = hb + p + 2
    total = {}
    for i in range(1, p):
        g = _solve_g(p, N, i, Lg, Hg)
        # phi(g_neg) in w = 1/pi
        h = [0] * L
        for s in range(-Lg, 0, -1):
            h = kernels.conv_mod(h, wpE, L, M)
            h[0] = (h[0] + g.get(-s, 0)) % M
        h = kernels.conv_mod(h, wpE, L, M)
        # phi(g_pos)
        acc = [0] * npos
        for k in range(Hg, -1, -1):
            acc = kernels.conv_mod(acc, phi, npos, M)
            acc[0] = (acc[0] + g.get(k, 0)) % M
        ser = {-d: h[d] for d in range(1, L) if h[d]}
        for k, v in enumerate(acc):
            if v:
                ser[k] = (ser.get(k, 0) + v) % M
        for deg, v in ser.items():
            for e in range(i + 1):
                j = deg + e
                if Lb <= j <= hb:
                    total[j] = (total.get(j, 0) + comb(i, e) * v) % M
    return total


def solve_b(p=DEFAULT_P, prec=None, depth=None):
    """The unique b in R^(psi=0) with (1 - chi gamma) b = (1 - phi)(1/pi).

    b = sum_{i=1}^{p-1} (1+pi)^i phi(g_i) where g_i solves
    g_i - chi (1+pi)^i gamma(g_i) = 1/pi; this works because
    (1 - phi)(1/pi) = phi(1/pi) sum_{i=1}^{p-1} (1+pi)^i.

    The result is computed twice with different truncations; the returned
    window is where the two agree, and the returned precision is capped by
    the size of the lowest computed coefficients.
    """
    return _solve_b_cached(p, prec if prec is not None else default_precision(p), depth)


@lru_cache(maxsize=None)
def _solve_b_cached(p, N, depth):
    Lb = -depth if depth is not None else -((p - 1) * N + 6 * p + 12)
    Lg = -((-Lb) // p + 4)
    Hg = N + 15
    hb = 10
    first = _b_coeffs(p, N, Lg, Hg, Lb, hb)
    second = _b_coeffs(p, N, Lg - 6, Hg + 12, Lb, hb)
    M = p ** N
    agree_hi = Lb - 1
    for j in range(Lb, hb + 1):
        if (first.get(j, 0) - second.get(j, 0)) % M:
            break
        agree_hi = j
    if agree_hi < -1:
        raise WindowExhausted("the two truncations of b disagree in negative degrees")
    tail = math.inf
    for j in range(Lb, Lb + 3 * p):
        v = second.get(j, 0)
        if v:
            tail = min(tail, valuation(v, p))
    prec = int(min(N, tail))
    cs = [reduce_mod(Fraction(second.get(j, 0)), p, prec) for j in range(Lb, agree_hi + 1)]
    ser = LaurentSeries(p, Lb, cs, prec, "small", "open")
    agreement = math.inf
    return BSolution(ser, prec, (Lg, Hg), agreement)


def cocycle_beta(m, p=DEFAULT_P, prec=None, hi=None):
    """beta_m = c_m d^(m-1) (b, 1/pi)."""
    if m < 1:
        raise InputError("m must be >= 1")
    b = solve_b(p, prec).series
    c = _cm(m)
    inv_pi = LaurentSeries.monomial(p, -1)
    return partial_power(b, m - 1).scale(c), partial_power(inv_pi, m - 1).scale(c)


def cocycle_residual(m, pair, prec=None, hi=None):
    """(chi^m gamma - 1) first - (p^(m-1) phi - 1) second, the Herr d^1 of a cochain of R(|x| x^m)."""
    first, second = pair
    p = first.p
    c = chi(p)
    if hi is None:
        hi = max(first.hi, second.hi)
    g1 = gamma_act(first, hi=hi).scale(Fraction(c) ** m) - first
    f2 = phi_act(second, prec=prec).scale(Fraction(p) ** (m - 1)) - second
    return g1 - f2


# --------------------------------------------------------------------------
# cup products and the pairing table


def herr_cup(c1, c2, delta2):
    """Cup of two 1-cochains: y1 * gamma_d2(x2) - x1 * phi_d2(y2), an H^2 cochain.

    ``delta2`` = (delta(p), w) describes the character of the second factor,
    whose gamma acts on the basis vector by chi^w.
    """
    (x1, y1), (x2, y2) = c1, c2
    dp, w = delta2
    p = (x1 or y1).p
    terms = []
    if y1 is not None and x2 is not None:
        terms.append(y1 * gamma_act(x2).scale(Fraction(chi(p)) ** w))
    if x1 is not None and y2 is not None:
        terms.append(-(x1 * phi_act(y2).scale(dp)))
    if not terms:
        return LaurentSeries(p, 0, [0])
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


@dataclass
class CupTable:
    p: int
    m: int
    k: int
    alpha_x: PadicScalar
    alpha_y: PadicScalar
    beta_x: PadicScalar
    beta_y: PadicScalar
    window: tuple
    digits: int
    meta: dict = field(default_factory=dict)

    def values(self):
        return (self.alpha_x, self.alpha_y, self.beta_x, self.beta_y)

    def as_tuple(self):
        return tuple(v.value for v in self.values())

    def to_json(self):
        return {
            "p": self.p,
            "m": self.m,
            "k": self.k,
            "alpha_x": self.alpha_x.to_json(),
            "alpha_y": self.alpha_y.to_json(),
            "beta_x": self.beta_x.to_json(),
            "beta_y": self.beta_y.to_json(),
            "window": list(self.window),
            "precision_floor": self.digits,
            "requested_precision": self.meta.get("log_chi_precision"),
        }

    @classmethod
    def from_json(cls, obj):
        p = obj["p"]
        return cls(
            p, obj["m"], obj["k"],
            PadicScalar.from_json(p, obj["alpha_x"]),
            PadicScalar.from_json(p, obj["alpha_y"]),
            PadicScalar.from_json(p, obj["beta_x"]),
            PadicScalar.from_json(p, obj["beta_y"]),
            tuple(obj["window"]), obj["precision_floor"],
            {"log_chi_precision": obj.get("requested_precision") or 0},
        )


def cup_table_generate(m, k, window=DEFAULT_WINDOW, p=DEFAULT_P, prec=None):
    """Pairings of alpha*_{m+k}, beta*_{m+k} against x*_k, y*_k from explicit cocycles.

    The product lands in H^2(R(|x| x^m)); multiplying by t^(m-1) moves it to
    H^2(R(|x| x)) = H^2(R(chi)), where h2_normalize applies.  Normalizations:
    alpha* = (1-1/p) cl(alpha), beta* = (1-1/p) log chi cl(beta),
    x*_k = cl(t^k, 0), y*_k = log chi cl(0, t^k).
    """
    if m < 1 or k < 0:
        raise InputError("need m >= 1 and k >= 0")
    check_prime(p)
    if p == 2:
        raise InputError("the oracle uses chi(gamma) = 1 + p and needs p odd")
    prec = default_precision(p) if prec is None else prec
    lo, hi = window
    n = m + k
    lc = log_chi(p, prec)
    one_minus = Fraction(p - 1, p)
    norm_alpha = PadicScalar(p, one_minus)
    norm_beta = lc * one_minus
    norm_x = PadicScalar(p, 1)
    norm_y = lc
    top = hi + n
    tk = t_power(p, k, top)
    twist = t_power(p, m - 1, top)
    x_k = (tk, None)
    y_k = (None, tk)
    delta2 = (Fraction(p) ** (-k), -k)
    fa, ga = cocycle_alpha(n, p, top)
    inv_pi = LaurentSeries.monomial(p, -1)
    gb = partial_power(inv_pi, n - 1).scale(_cm(n))

    def pair_exact(c1, c2):
        h2 = herr_cup(c1, c2, delta2)
        return h2_normalize(h2 * twist, prec)

    alpha_x = pair_exact((fa, ga), x_k) * norm_alpha * norm_x
    alpha_y = pair_exact((fa, ga), y_k) * norm_alpha * norm_y
    beta_x = pair_exact((None, gb), x_k) * norm_beta * norm_x
    # beta . y*: the cup is -c_n d^(n-1)(b) * phi_d2(t^k) * t^(m-1) = -c_n d^(n-1)(b) t^(n-1).
    # b and powers of t cannot be multiplied coefficientwise (their growth rates
    # cancel exactly), so the derivatives are moved onto t^(n-1):
    # res(d^r(h) g dt) = (-1)^r res(h d^r(g) dt).
    bs = solve_b(p, prec)
    tn = t_power(p, n - 1, n + 2)
    dt = partial_power(tn, n - 1)
    const = dt.coeff(0)  # d^(n-1) t^(n-1) = (n-1)!
    res_b = residue(bs.series)
    raw = res_b * (-_cm(n) * (-1) ** (n - 1) * const)
    beta_y_val = raw * Fraction(-p, p - 1) / lc
    beta_y = beta_y_val * norm_beta * norm_y
    digits = min(prec, bs.prec)
    return CupTable(p, m, k, alpha_x, alpha_y, beta_x, beta_y, (lo, hi), digits,
                    {"b_precision": bs.prec, "log_chi_precision": prec})


# --------------------------------------------------------------------------
# table cache


def load_table_cache(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        return {}
    out = {}
    for key, obj in data.get("entries", {}).items():
        out[key] = CupTable.from_json(obj)
    return out


def save_table_cache(path, tables, window=DEFAULT_WINDOW):
    from . import __version__
    data = {
        "meta": {
            "generator": "linvariant.robba_oracle.cup_table_generate",
            "package_version": __version__,
            "window": list(window),
            "kernel_backend": kernels.BACKEND,
        },
        "entries": {_key(t.p, t.m, t.k): t.to_json() for t in tables},
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)


def _key(p, m, k):
    return f"{p},{m},{k}"


def cup_table(p, m, k, cache_path=None, window=DEFAULT_WINDOW, prec=None):
    """cup_table_generate with an optional JSON cache.

    A cached entry is reused only for the same window and at least the requested precision.
    """
    prec = default_precision(p) if prec is None else prec
    if cache_path is not None:
        cached = load_table_cache(cache_path)
        t = cached.get(_key(p, m, k))
        if t is not None and tuple(t.window) == tuple(window) and t.meta.get("log_chi_precision", 0) >= prec:
            return t
    t = cup_table_generate(m, k, window, p, prec)
    if cache_path is not None:
        cached = load_table_cache(cache_path)
        cached[_key(p, m, k)] = t
        save_table_cache(cache_path, cached.values(), window)
    return t


# --------------------------------------------------------------------------
# log-extended series


def ell_series(p, lo):
    """ell(pi) = (1/p) log(pi^p / phi(pi)) = -(1/p) log(1 + pX), exact on [lo, 0].

    pX = sum_{j=1}^{p-1} C(p, j) pi^(j-p); each degree receives finitely many
    terms of the logarithm, so every coefficient in the window is exact.  The
    series continues below ``lo``.
    """
    return _log_one_plus_pX(p, lo).scale(Fraction(-1, p))


def _log_one_plus_pX(p, lo):
    D = -lo
    px = [Fraction(0)] * (D + 1)
    for j in range(1, p):
        d = p - j
        if d <= D:
            px[d] = Fraction(comb(p, j))
    out = [Fraction(0)] * (D + 1)
    powr = [Fraction(1)] + [Fraction(0)] * D
    for n in range(1, D + 1):
        powr = _frac_conv(powr, px, D + 1)
        if not any(powr):
            break
        sgn = Fraction((-1) ** (n + 1), n)
        for d in range(D + 1):
            if powr[d]:
                out[d] += sgn * powr[d]
    cs = [out[-k] for k in range(lo, 1)]
    return LaurentSeries(p, lo, cs, None, "open", "zero")


def _log_small_tail(p, prec):
    """log(phi(pi)/pi^p) with a tail below p**prec."""
    # coefficient of pi^-d has valuation >= d/(p-1) - log_p(d)
    d = 1
    while d / (p - 1) - math.log(d, p) < prec + 1:
        d += 1
    s = _log_one_plus_pX(p, -d)
    return LaurentSeries(p, s.lo, s.coeffs, prec, "small", "zero")


class LogExtSeries:
    """Polynomial in ell = log(pi) with LaurentSeries coefficients.

    phi(ell) = p ell + log(phi(pi)/pi^p), gamma(ell) = ell + log(gamma(pi)/pi),
    N = -(1 - 1/p)^-1 d/d ell.
    """

    def __init__(self, p, coeffs):
        self.p = p
        self.coeffs = [c for c in coeffs]
        if not self.coeffs:
            self.coeffs = [LaurentSeries(p, 0, [0])]

    @classmethod
    def ell(cls, p):
        return cls(p, [LaurentSeries(p, 0, [0]), LaurentSeries(p, 0, [1])])

    @property
    def degree(self):
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d].is_zero() and self.coeffs[d].upper == "zero":
            d -= 1
        return d

    def coefficient(self, i):
        if i < len(self.coeffs):
            return self.coeffs[i]
        return LaurentSeries(self.p, 0, [0])

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return LogExtSeries(self.p, [self.coefficient(i) + other.coefficient(i) for i in range(n)])

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return LogExtSeries(self.p, [x.scale(c) for x in self.coeffs])

    def __mul__(self, other):
        n = len(self.coeffs) + len(other.coeffs) - 1
        out = [None] * n
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                if a.is_zero() and a.upper == "zero" and a.lower == "zero":
                    continue
                if b.is_zero() and b.upper == "zero" and b.lower == "zero":
                    continue
                term = a * b
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        return LogExtSeries(self.p, [x if x is not None else LaurentSeries(self.p, 0, [0]) for x in out])

    def N(self):
        c = Fraction(-self.p, self.p - 1)
        return LogExtSeries(self.p, [self.coeffs[i].scale(c * i) for i in range(1, len(self.coeffs))])


def log_ext_actions(g, p=DEFAULT_P, prec=None, hi=None):
    """Image of ell under phi or gamma, as a LogExtSeries of degree 1."""
    prec = default_precision(p) if prec is None else prec
    if g == "phi":
        corr = _log_small_tail(p, prec)
        return LogExtSeries(p, [corr, LaurentSeries(p, 0, [p])])
    if g == "gamma":
        hi = DEFAULT_WINDOW[1] if hi is None else hi
        c = chi(p)
        U = _gamma_unit(p, c, hi + 1)
        v = [x / c for x in U]  # 1 + O(pi)
        # log(1 + y), y = v - 1 with y_0 = 0: exact through degree hi
        y = [Fraction(0)] + v[1:]
        out = [Fraction(0)] * (hi + 1)
        pw = [Fraction(1)] + [Fraction(0)] * hi
        for n in range(1, hi + 1):
            pw = _frac_conv(pw, y, hi + 1)
            sgn = Fraction((-1) ** (n + 1), n)
            for d in range(hi + 1):
                if pw[d]:
                    out[d] += sgn * pw[d]
        lc = log_chi(p, prec)
        out[0] = lc.value
        corr = LaurentSeries(p, 0, out, prec, "zero", "open")
        return LogExtSeries(p, [corr, LaurentSeries(p, 0, [1])])
    raise InputError(f"unknown operator {g!r}; use 'phi' or 'gamma'")


def phi_log_ext(f: LogExtSeries, prec=None):
    """phi on a LogExtSeries: sum phi(c_i) (p ell + corr)^i."""
    img = log_ext_actions("phi", f.p, prec)
    out = LogExtSeries(f.p, [LaurentSeries(f.p, 0, [0])])
    power = LogExtSeries(f.p, [LaurentSeries(f.p, 0, [1])])
    for c in f.coeffs:
        out = out + LogExtSeries(f.p, [phi_act(c, prec)]) * power
        power = power * img
    return out


def gamma_log_ext(f: LogExtSeries, prec=None, hi=None):
    img = log_ext_actions("gamma", f.p, prec, hi)
    out = LogExtSeries(f.p, [LaurentSeries(f.p, 0, [0])])
    power = LogExtSeries(f.p, [LaurentSeries(f.p, 0, [1])])
    for c in f.coeffs:
        out = out + LogExtSeries(f.p, [gamma_act(c, hi=hi)]) * power
        power = power * img
    return out


# --------------------------------------------------------------------------
# identity report


@dataclass
class IdentityCheck:
    name: str
    passed: bool
    exact: bool
    digits: float
    window: tuple
    detail: str = ""

    def to_json(self):
        d = self.digits
        return {
            "name": self.name,
            "passed": self.passed,
            "exact": self.exact,
            "digits": None if d == math.inf else d,
            "window": list(self.window),
            "detail": self.detail,
        }


@dataclass
class IdentityReport:
    p: int
    window: tuple
    checks: list

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        return {"p": self.p, "window": list(self.window), "ok": self.ok,
                "checks": [c.to_json() for c in self.checks]}


def _all_zero(f, lo, hi):
    return all(f._coeff_or_zero(k) == 0 for k in range(lo, hi + 1))


def random_laurent(rng, p, lo, hi, terms=6):
    """Random Laurent polynomial with rational coefficients in degrees lo..hi."""
    degs = rng.sample(range(lo, hi + 1), min(terms, hi - lo + 1))
    return LaurentSeries.from_dict(p, {d: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for d in degs})


def verify_identities(mmax=4, window=(-5, 60), p=DEFAULT_P, prec=None, min_digits=20,
                      mmax_principal=None, n_random=3, seed=0):
    """Run the series identities behind the rank-one cohomology computations.

    Residue invariance is checked on three fixed series plus ``n_random``
    random Laurent polynomials supported in the window.
    """
    check_prime(p)
    mmax_principal = mmax if mmax_principal is None else mmax_principal
    prec = default_precision(p) if prec is None else prec
    lo, hi = window
    checks = []

    # (a) psi(ell(pi)) = 0 exactly on its determined window
    ell = ell_series(p, p * lo - p)
    ps = psi_act(ell)
    checks.append(IdentityCheck("psi_ell_vanishes", ps.is_zero(), True, math.inf, ps.window,
                                "psi(ell(pi)) computed on exact coefficients"))

    # (b) residue invariance
    hs = [LaurentSeries.monomial(p, -1),
          LaurentSeries.from_dict(p, {-3: 2, -2: Fraction(-1, 5), -1: 7, 0: 1, 4: 3}),
          LaurentSeries.from_dict(p, {-2: 1, 1: Fraction(1, 2)})]
    rng = random.Random(seed)
    hs += [random_laurent(rng, p, lo, min(hi, 12)) for _ in range(n_random)]
    for idx, h in enumerate(hs):
        r0 = residue(h)
        r1 = residue(phi_act(h, prec))
        d = valuation(r1.value - r0.value, p)
        d = min(d, r1.prec) if r1.prec is not None else d
        checks.append(IdentityCheck(f"residue_phi_invariant[{idx}]", d >= min(min_digits, prec), False,
                                    d, (lo, hi), f"res(phi(h)dt) vs res(h dt) agree to {d} digits"))
        g = gamma_act(h, hi=max(hi, 2)).scale(chi(p))
        r2 = residue(g)
        checks.append(IdentityCheck(f"residue_gamma_invariant[{idx}]", r2.value == r0.value, True,
                                    math.inf, (lo, hi), "res(chi gamma(h) dt) = res(h dt)"))

    # (c) d^(m-1)(1/pi + 1/2) = (-1)^(m-1)(m-1)!/t^m mod power series
    h = LaurentSeries(p, -1, [1, Fraction(1, 2)])
    for m in range(1, mmax_principal + 1):
        lhs = partial_power(h, m - 1)
        tm = t_power(p, m, 2 * m + 4)
        rhs = inverse(tm).scale(Fraction((-1) ** (m - 1) * factorial(m - 1)))
        diff = lhs - rhs
        ok = not any(diff.principal_part().values())
        checks.append(IdentityCheck(f"principal_part_t_power[m={m}]", ok, True, math.inf, diff.window,
                                    "principal parts agree"))

    # (d) t^m c_m = -(1 - 1/p)^-1 mod pi
    rhs = (t_series(p, hi + 2) * LaurentSeries(p, -1, [1, Fraction(1, 2)])).scale(-1)
    F = solve_one_minus_phi(rhs.restrict(0, hi), scale=Fraction(1, p))
    c1 = F * inverse(t_series(p, hi + 2))
    target = Fraction(-p, p - 1)
    for m in range(1, mmax + 1):
        cm = partial_power(c1, m - 1).scale(_cm(m))
        prod = cm * t_power(p, m, hi)
        c0 = prod.coeff(0)
        checks.append(IdentityCheck(f"t_power_times_c[m={m}]", c0 == target, True, math.inf, prod.window,
                                    f"constant term {q_str(c0)}"))

    # alpha cocycles
    for m in range(1, mmax + 1):
        pair = cocycle_alpha(m, p, hi)
        res = cocycle_residual(m, pair, prec)
        # the residual is exact in degrees >= 0 and p-adic below
        exact_part = res.nonnegative_part()
        ok_exact = exact_part.is_zero()
        neg_digits = math.inf
        for k in range(res.lo, 0):
            c = res.coeff(k)
            if c:
                neg_digits = min(neg_digits, valuation(c, p))
        if res.prec is not None:
            neg_digits = min(neg_digits, res.prec)
        checks.append(IdentityCheck(f"alpha_cocycle[m={m}]", ok_exact and neg_digits >= min(min_digits, prec),
                                    res.prec is None, neg_digits, res.window,
                                    "residual of the Herr differential"))
    return IdentityReport(p, window, checks)

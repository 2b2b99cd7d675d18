"""Exact scalars over Q_p and linear algebra on rational matrices.

Rational inputs are handled exactly with :class:`fractions.Fraction`.
Capped-precision p-adic numbers (:class:`PadicScalar` with a finite
``prec``) only arise from :func:`padic_log` and from the series oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    InconsistentSystem,
    InputError,
    NotSemisimpleAtZero,
    OutOfDomain,
    PrecisionExhausted,
    RationalParseError,
)

DEFAULT_PRECISION = 30

Vector = tuple  # tuple of Fraction


# ---------------------------------------------------------------------------
# scalars

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_prime(p: int) -> int:
    """Return ``p`` if it is an odd prime, else raise InputError."""
    if not isinstance(p, int) or isinstance(p, bool):
        raise InputError(f"prime must be an integer, got {p!r}")
    if p == 2:
        raise InputError("p = 2 is not supported (Gamma is not procyclic)")
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    return p


def to_q(x) -> Fraction:
    """Parse an int, Fraction or "a/b" string as an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise RationalParseError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, PadicScalar):
        if not x.is_exact:
            raise RationalParseError("capped p-adic value is not an exact rational")
        return x.value
    if isinstance(x, str):
        s = x.strip()
        try:
            if "/" in s:
                a, b = s.split("/", 1)
                den = int(b)
                if den == 0:
                    raise RationalParseError(f"zero denominator in {x!r}")
                return Fraction(int(a), den)
            return Fraction(int(s))
        except ValueError as exc:
            raise RationalParseError(f"cannot parse rational {x!r}") from exc
    raise RationalParseError(f"not a rational: {x!r}")


def q_str(x: Fraction) -> str:
    """Serialize a rational as "a/b"."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _vp_int(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _ilog(n: int, p: int) -> int:
    """floor(log_p(n)) for n >= 1."""
    k = 0
    while n >= p:
        n //= p
        k += 1
    return k


def valuation(x, p: int) -> float:
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    return _vp_int(abs(x.numerator), p) - _vp_int(x.denominator, p)


def reduce_mod(x: Fraction, p: int, prec: int) -> Fraction:
    """Canonical representative of ``x`` modulo ``p**prec``.

    The result is ``p**v * u`` with ``0 < u < p**(prec - v)`` an integer,
    or zero when ``v_p(x) >= prec``.
    """
    x = Fraction(x)
    if x == 0:
        return x
    v = valuation(x, p)
    if v >= prec:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    if v >= 0:
        num //= p ** v
    else:
        den //= p ** (-v)
    mod = p ** (prec - v)
    u = (num * pow(den, -1, mod)) % mod
    return Fraction(u) * Fraction(p) ** v


class PadicScalar:
    """An element of Q_p: exact rational or known modulo ``p**prec``.

    ``prec`` is an absolute precision; ``None`` marks an exact value.
    Values are immutable.
    """

    __slots__ = ("p", "value", "prec")

    def __init__(self, p: int, value, prec: int | None = None):
        check_prime(p)
        v = to_q(value) if not isinstance(value, Fraction) else value
        if prec is not None:
            v = reduce_mod(v, p, prec)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, name, value):
        raise AttributeError("PadicScalar is immutable")

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    @property
    def valuation(self) -> float:
        v = valuation(self.value, self.p)
        if self.prec is not None and v >= self.prec:
            return self.prec  # lower bound only
        return v

    def is_zero(self) -> bool:
        return self.value == 0

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise InputError("mixing scalars over different primes")
            return other
        return PadicScalar(self.p, to_q(other))

    @staticmethod
    def _min_prec(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        o = self._coerce(other)
        return PadicScalar(self.p, self.value + o.value, self._min_prec(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.p, -self.value, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        va = valuation(self.value, self.p)
        vb = valuation(o.value, o.p)
        cands = []
        if self.prec is not None:
            cands.append(self.prec + (vb if vb != math.inf else (o.prec if o.prec is not None else 0)))
        if o.prec is not None:
            cands.append(o.prec + (va if va != math.inf else (self.prec if self.prec is not None else 0)))
        prec = int(min(cands)) if cands else None
        return PadicScalar(self.p, self.value * o.value, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.value == 0:
            if o.prec is not None:
                raise PrecisionExhausted("division by a value indistinguishable from zero")
            raise ZeroDivisionError("division by zero")
        vb = valuation(o.value, o.p)
        va = valuation(self.value, self.p)
        cands = []
        if self.prec is not None:
            cands.append(self.prec - vb)
        if o.prec is not None:
            # relative precision of the divisor bounds the quotient
            rel = o.prec - vb
            base = va if va != math.inf else (self.prec if self.prec is not None else 0)
            cands.append(base - vb + rel)
        prec = int(min(cands)) if cands else None
        return PadicScalar(self.p, self.value / o.value, prec)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (InputError, RationalParseError):
            return NotImplemented
        prec = self._min_prec(self.prec, o.prec)
        diff = self.value - o.value
        if prec is None:
            return diff == 0
        return valuation(diff, self.p) >= prec

    def __hash__(self):
        if self.prec is None:
            return hash(self.value)
        return hash((self.p, self.prec))

    def agrees_with(self, other, digits: int) -> bool:
        """True when ``self - other`` has valuation at least ``digits``."""
        o = self._coerce(other)
        return valuation(self.value - o.value, self.p) >= digits

    def digits(self) -> list[int]:
        """Base-p digits of the unit part, least significant first."""
        if self.value == 0:
            return []
        v = valuation(self.value, self.p)
        if self.prec is None:
            raise InputError("exact rationals have no finite digit expansion")
        u = reduce_mod(self.value / Fraction(self.p) ** v, self.p, self.prec - v)
        n = int(u)
        out = []
        for _ in range(self.prec - v):
            out.append(n % self.p)
            n //= self.p
        return out

    def to_json(self):
        if self.prec is None:
            return q_str(self.value)
        if self.value == 0:
            return {"valuation": self.prec, "digits": [], "precision": self.prec}
        return {"valuation": int(valuation(self.value, self.p)), "digits": self.digits(), "precision": self.prec}

    @classmethod
    def from_json(cls, p: int, obj) -> "PadicScalar":
        if isinstance(obj, dict):
            try:
                v, digs, prec = obj["valuation"], obj["digits"], obj["precision"]
            except KeyError as exc:
                raise InputError(f"p-adic object missing key {exc}") from exc
            n = sum(d * p ** i for i, d in enumerate(digs))
            return cls(p, Fraction(n) * Fraction(p) ** v, prec)
        return cls(p, to_q(obj))

    def __repr__(self):
        if self.prec is None:
            return f"PadicScalar({self.p}, {self.value})"
        return f"PadicScalar({self.p}, {self.value}, prec={self.prec})"


def padic_log(u, p: int | None = None, prec: int = DEFAULT_PRECISION) -> PadicScalar:
    """Iwasawa logarithm on 1 + pZ_p and at ``p`` (where it is 0).

    ``u`` may be a rational or a PadicScalar.  Other inputs raise OutOfDomain.
    """
    if isinstance(u, PadicScalar):
        p = u.p
        uprec = u.prec
        uval = u.value
    else:
        if p is None:
            raise InputError("prime required for a rational argument")
        uval = to_q(u)
        uprec = None
    check_prime(p)
    if uval == p and uprec is None:
        return PadicScalar(p, 0)
    if uval == 1 and uprec is None:
        return PadicScalar(p, 0)
    x = uval - 1
    vx = valuation(x, p)
    if vx < 1 or valuation(uval, p) != 0:
        raise OutOfDomain(f"log defined here only on 1 + pZ_p and at p, got {uval}")
    if uprec is not None:
        prec = min(prec, uprec)
    total = Fraction(0)
    xn = Fraction(1)
    n = 0
    while True:
        n += 1
        xn *= x
        # every later term has valuation >= n*vx - log_p(n) >= prec
        if n * vx - _ilog(n, p) >= prec:
            break
        term = xn / n
        total += term if n % 2 == 1 else -term
        total = reduce_mod(total, p, prec)
        xn = reduce_mod(xn, p, prec + n + 64)
    return PadicScalar(p, total, prec)


# ---------------------------------------------------------------------------
# matrices

class QpMatrix:
    """Immutable rational matrix acting on column vectors."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        rs = tuple(tuple(to_q(x) for x in r) for r in rows)
        if rs:
            n = len(rs[0])
            if any(len(r) != n for r in rs):
                raise DimensionMismatch("ragged matrix rows")
        else:
            n = ncols or 0
        object.__setattr__(self, "rows", rs)
        object.__setattr__(self, "nrows", len(rs))
        object.__setattr__(self, "ncols", n)

    def __setattr__(self, name, value):
        raise AttributeError("QpMatrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "QpMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, m: int, n: int) -> "QpMatrix":
        return cls([[0] * n for _ in range(m)], n)

    @classmethod
    def diag(cls, entries: Sequence) -> "QpMatrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "QpMatrix":
        return cls([[c[i] for c in cols] for i in range(nrows)], len(cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def col(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[Vector]:
        return [self.col(j) for j in range(self.ncols)]

    @property
    def T(self) -> "QpMatrix":
        return QpMatrix([self.col(j) for j in range(self.ncols)], self.nrows)

    def __eq__(self, other):
        return isinstance(other, QpMatrix) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __add__(self, other: "QpMatrix") -> "QpMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch("shape mismatch in addition")
        return QpMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "QpMatrix") -> "QpMatrix":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "QpMatrix":
        c = to_q(c)
        return QpMatrix([[c * a for a in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        if isinstance(other, QpMatrix):
            if self.ncols != other.nrows:
                raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
            cols = other.columns()
            return QpMatrix([[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self.rows],
                            other.ncols)
        return self.apply(other)

    def apply(self, v: Sequence) -> Vector:
        if len(v) != self.ncols:
            raise DimensionMismatch("vector length does not match matrix")
        v = [to_q(x) for x in v]
        return tuple(sum((a * b for a, b in zip(r, v)), Fraction(0)) for r in self.rows)

    def __pow__(self, k: int) -> "QpMatrix":
        if not self.is_square:
            raise DimensionMismatch("power of a non-square matrix")
        if k < 0:
            return self.inverse() ** (-k)
        out = QpMatrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def rank(self) -> int:
        return len(rref(self.rows, self.ncols)[1])

    def det(self) -> Fraction:
        if not self.is_square:
            raise DimensionMismatch("determinant of a non-square matrix")
        n = self.nrows
        a = [list(r) for r in self.rows]
        d = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                d = -d
            d *= a[c][c]
            inv = 1 / a[c][c]
            for r in range(c + 1, n):
                if a[r][c] != 0:
                    f = a[r][c] * inv
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return d

    def inverse(self) -> "QpMatrix":
        if not self.is_square:
            raise DimensionMismatch("inverse of a non-square matrix")
        n = self.nrows
        aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        red, piv = rref(aug, 2 * n)
        if piv[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return QpMatrix([r[n:] for r in red[:n]], n)

    def kernel(self) -> "Subspace":
        return kernel(self)

    def image(self) -> "Subspace":
        return Subspace.span(self.columns(), self.nrows)

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> "QpMatrix":
        return QpMatrix([[self.rows[i][j] for j in cols] for i in rows], len(cols))

    def to_json(self) -> list[list[str]]:
        return [[q_str(a) for a in r] for r in self.rows]

    def __repr__(self):
        body = "; ".join(" ".join(str(a) for a in r) for r in self.rows)
        return f"QpMatrix([{body}])"


def kron(a: QpMatrix, b: QpMatrix) -> QpMatrix:
    """Kronecker product, basis order (i, j) -> i * dim(b) + j."""
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            rows.append([x * y for x in ra for y in rb])
    return QpMatrix(rows, a.ncols * b.ncols)


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form of an exact rational matrix.

    Returns the nonzero rows and the list of pivot columns.
    """
    a = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    m = len(a)
    for c in range(ncols):
        if r >= m:
            break
        piv = next((i for i in range(r, m) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a[:r], pivots


@dataclass(frozen=True)
class LinearSolution:
    particular: Vector
    kernel: "Subspace"
    precision: int | None = None


def solve_linear(A, b: Sequence, p: int | None = None) -> LinearSolution:
    """Solve ``A x = b``: one solution plus a basis of ``ker A``.

    Exact rational entries are solved exactly.  If any entry of ``A`` or
    ``b`` is a capped PadicScalar the system is eliminated with
    minimal-valuation pivots and the result carries a precision floor.
    """
    rows = A.rows if isinstance(A, QpMatrix) else tuple(tuple(r) for r in A)
    m = len(rows)
    n = len(rows[0]) if rows else (A.ncols if isinstance(A, QpMatrix) else 0)
    if len(b) != m:
        raise DimensionMismatch("right-hand side length does not match matrix")
    capped = [x for r in rows for x in r if isinstance(x, PadicScalar) and not x.is_exact]
    capped += [x for x in b if isinstance(x, PadicScalar) and not x.is_exact]
    if capped:
        return _solve_capped(rows, list(b), n, capped[0].p)
    aug = [[to_q(x) for x in r] + [to_q(bi)] for r, bi in zip(rows, b)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        raise InconsistentSystem("system has no solution")
    x = [Fraction(0)] * n
    for r, c in zip(red, piv):
        x[c] = r[n]
    ker = kernel(QpMatrix(rows, n) if rows else QpMatrix.zeros(0, n))
    return LinearSolution(tuple(x), ker)


def _solve_capped(rows, b, n: int, p: int) -> LinearSolution:
    def lift(x):
        return x if isinstance(x, PadicScalar) else PadicScalar(p, to_q(x))

    a = [[lift(x) for x in r] + [lift(bi)] for r, bi in zip(rows, b)]
    m = len(a)
    pivots = []
    r = 0
    for c in range(n):
        if r >= m:
            break
        cands = [(a[i][c].valuation, i) for i in range(r, m) if not a[i][c].is_zero()]
        if not cands:
            continue
        _, piv = min(cands)
        pv = a[piv][c]
        if pv.prec is not None and pv.prec - valuation(pv.value, p) <= 0:
            raise PrecisionExhausted(f"pivot in column {c} has no significant digits")
        a[r], a[piv] = a[piv], a[r]
        inv = PadicScalar(p, 1) / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and not a[i][c].is_zero():
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    for i in range(r, m):
        if not a[i][n].is_zero():
            raise InconsistentSystem("system has no solution to the working precision")
    x = [PadicScalar(p, 0)] * n
    for i, c in enumerate(pivots):
        x[c] = a[i][n]
    precs = [y.prec for y in x if y.prec is not None]
    free = [c for c in range(n) if c not in pivots]
    kers = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -a[i][f].value
        kers.append(v)
    return LinearSolution(tuple(x), Subspace.span(kers, n), min(precs) if precs else None)


def kernel(A: QpMatrix) -> "Subspace":
    n = A.ncols
    red, piv = rref(A.rows, n)
    free = [c for c in range(n) if c not in piv]
    vecs = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, c in zip(red, piv):
            v[c] = -r[f]
        vecs.append(v)
    return Subspace.span(vecs, n)


def image(A: QpMatrix) -> "Subspace":
    return A.image()


# ---------------------------------------------------------------------------
# subspaces

class Subspace:
    """A subspace of Q_p^d stored by its reduced echelon basis (rows)."""

    __slots__ = ("dim_ambient", "basis", "pivots")

    def __init__(self, basis_rref: Sequence[Sequence[Fraction]], pivots: Sequence[int], d: int):
        object.__setattr__(self, "dim_ambient", d)
        object.__setattr__(self, "basis", tuple(tuple(r) for r in basis_rref))
        object.__setattr__(self, "pivots", tuple(pivots))

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def span(cls, vectors: Iterable[Sequence], d: int) -> "Subspace":
        vs = [[to_q(x) for x in v] for v in vectors]
        if any(len(v) != d for v in vs):
            raise DimensionMismatch(f"vectors must have length {d}")
        red, piv = rref(vs, d)
        return cls(red, piv, d)

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls((), (), d)

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls.span(QpMatrix.identity(d).rows, d)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[Vector]:
        return list(self.basis)

    def _check(self, other: "Subspace"):
        if self.dim_ambient != other.dim_ambient:
            raise DimensionMismatch("subspaces live in different ambient spaces")

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.dim_ambient == other.dim_ambient
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.dim_ambient, self.basis))

    def contains(self, v: Sequence) -> bool:
        v = [to_q(x) for x in v]
        for r, c in zip(self.basis, self.pivots):
            if v[c] != 0:
                f = v[c]
                v = [x - f * y for x, y in zip(v, r)]
        return all(x == 0 for x in v)

    def reduce(self, v: Sequence) -> Vector:
        """Canonical representative of ``v`` modulo this subspace."""
        v = [to_q(x) for x in v]
        for r, c in zip(self.basis, self.pivots):
            if v[c] != 0:
                f = v[c]
                v = [x - f * y for x, y in zip(v, r)]
        return tuple(v)

    def coordinates(self, v: Sequence) -> Vector:
        """Coordinates of ``v`` in the echelon basis; v must lie in the span."""
        v = [to_q(x) for x in v]
        coords = tuple(v[c] for c in self.pivots)
        resid = [x - sum((cf * r[i] for cf, r in zip(coords, self.basis)), Fraction(0)) for i, x in enumerate(v)]
        if any(x != 0 for x in resid):
            raise InconsistentSystem("vector is not in the subspace")
        return coords

    def __le__(self, other: "Subspace") -> bool:
        self._check(other)
        return all(other.contains(v) for v in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.span(list(self.basis) + list(other.basis), self.dim_ambient)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        d = self.dim_ambient
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(d)
        # solve sum a_i u_i - sum b_j v_j = 0
        cols = list(self.basis) + [tuple(-x for x in v) for v in other.basis]
        M = QpMatrix.from_columns(cols, d)
        ker = kernel(M)
        vecs = []
        for k in ker.basis:
            a = k[: self.dim]
            vecs.append([sum((ai * u[i] for ai, u in zip(a, self.basis)), Fraction(0)) for i in range(d)])
        return Subspace.span(vecs, d)

    def complement(self) -> list[Vector]:
        """Standard basis vectors spanning a complement in the ambient space."""
        d = self.dim_ambient
        return [tuple(Fraction(int(i == j)) for i in range(d)) for j in range(d) if j not in self.pivots]

    def quotient_basis(self, sub: "Subspace") -> list[Vector]:
        """Vectors of ``self`` whose classes form a basis of ``self / sub``."""
        self._check(sub)
        if not sub <= self:
            raise DimensionMismatch("quotient by a subspace that is not contained")
        cur = sub
        out = []
        for v in self.basis:
            if not cur.contains(v):
                out.append(v)
                cur = cur + Subspace.span([v], self.dim_ambient)
        return out

    def annihilator(self) -> "Subspace":
        """Linear forms (as row vectors) vanishing on this subspace."""
        d = self.dim_ambient
        if self.dim == 0:
            return Subspace.full(d)
        return kernel(QpMatrix(self.basis, d))

    def image_under(self, A: QpMatrix) -> "Subspace":
        if A.ncols != self.dim_ambient:
            raise DimensionMismatch("matrix does not act on this space")
        return Subspace.span([A.apply(v) for v in self.basis], A.nrows)

    def preimage_under(self, A: QpMatrix) -> "Subspace":
        """``{x : A x in self}``."""
        if A.nrows != self.dim_ambient:
            raise DimensionMismatch("matrix does not map into this space")
        ann = self.annihilator()
        if ann.dim == 0:
            return Subspace.full(A.ncols)
        F = QpMatrix(ann.basis, self.dim_ambient)
        return kernel(F @ A)

    def is_stable(self, A: QpMatrix) -> bool:
        return all(self.contains(A.apply(v)) for v in self.basis)

    def basis_matrix(self) -> QpMatrix:
        return QpMatrix(self.basis, self.dim_ambient)

    def to_json(self) -> list[list[str]]:
        return [[q_str(x) for x in v] for v in self.basis]

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.dim_ambient})"


def subspace_ops(U: Subspace, V: Subspace) -> dict:
    """Sum, intersection, quotient representatives and a complement of U."""
    U._check(V)
    s = U + V
    return {
        "sum": s,
        "intersection": U.intersect(V),
        "quotient": s.quotient_basis(V),
        "complement": U.complement(),
    }


def restrict(A: QpMatrix, U: Subspace) -> QpMatrix:
    """Matrix of ``A`` on an A-stable subspace in its echelon basis."""
    cols = [U.coordinates(A.apply(v)) for v in U.basis]
    return QpMatrix.from_columns(cols, U.dim) if cols else QpMatrix.zeros(0, 0)


def det_star(f: QpMatrix) -> Fraction:
    """Determinant of ``f`` restricted to its image (empty product 1)."""
    if not f.is_square:
        raise DimensionMismatch("det* needs a square matrix")
    K = kernel(f)
    I = f.image()
    if K.intersect(I).dim:
        raise NotSemisimpleAtZero("ker f meets Im f")
    if I.dim == 0:
        return Fraction(1)
    return restrict(f, I).det()


def generalized_kernel_dim(A: QpMatrix) -> int:
    n = A.nrows
    return kernel(A ** n).dim if n else 0

"""Filtered (phi, N)-modules over Q_p.

A module is a rational vector space Q_p^d with an invertible Frobenius
matrix ``phi``, a nilpotent monodromy ``N`` satisfying ``N phi = p phi N``
and a decreasing exhaustive filtration.  Matrices act on column vectors.

The filtration is stored as a sparse jump list ``((j_1, S_1), ..., (j_r, S_r))``
with ``j_1 < ... < j_r`` and ``S_1 = full ⊋ S_2 ⊋ ... ⊋ S_r ≠ 0``.
``Fil^i`` is ``S_k`` for the smallest ``k`` with ``j_k >= i`` and 0 past ``j_r``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    EigenvalueNotRational,
    FlagNotStable,
    InputError,
    NotPhiNStable,
    PhiNotScalar,
    PreconditionFailed,
    PrimeMismatch,
)
from .padic_linalg import (
    QpMatrix,
    Subspace,
    check_prime,
    kernel,
    kron,
    q_str,
    to_q,
    valuation,
)


# ---------------------------------------------------------------------------
# filtrations

class Filtration:
    """Decreasing exhaustive filtration on Q_p^d, stored sparsely."""

    __slots__ = ("dim", "steps")

    def __init__(self, dim: int, steps: Iterable[tuple[int, Subspace]]):
        st = sorted(((int(j), s) for j, s in steps), key=lambda t: t[0])
        for j, s in st:
            if s.dim_ambient != dim:
                raise DimensionMismatch(f"filtration step at jump {j} lives in the wrong space")
        # Fil^i is constant on (j_{k-1}, j_k]: drop steps that equal the next one
        norm: list[tuple[int, Subspace]] = []
        for k, (j, s) in enumerate(st):
            if k + 1 < len(st) and st[k + 1][1] == s:
                continue
            if s.dim == 0:
                continue
            norm.append((j, s))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "steps", tuple(norm))

    def __setattr__(self, name, value):
        raise AttributeError("Filtration is immutable")

    @classmethod
    def trivial(cls, dim: int, jump: int = 0) -> "Filtration":
        """Single jump: Fil^i = everything for i <= jump, 0 above."""
        return cls(dim, [(jump, Subspace.full(dim))] if dim else [])

    @classmethod
    def from_levels(cls, dim: int, levels: dict[int, Subspace]) -> "Filtration":
        return cls(dim, levels.items())

    def fil(self, i: int) -> Subspace:
        for j, s in self.steps:
            if j >= i:
                return s
        return Subspace.zero(self.dim)

    def jumps(self) -> list[int]:
        return [j for j, _ in self.steps]

    def hodge_numbers(self) -> dict[int, int]:
        """Jump -> dim Fil^j / Fil^{j+1}."""
        out = {}
        for j, s in self.steps:
            out[j] = s.dim - self.fil(j + 1).dim
        return out

    def hodge_multiset(self) -> list[int]:
        return sorted(j for j, m in self.hodge_numbers().items() for _ in range(m))

    def candidate_levels(self) -> list[int]:
        return self.jumps()

    def is_exhaustive(self) -> bool:
        return self.dim == 0 or (bool(self.steps) and self.steps[0][1].dim == self.dim)

    def is_decreasing(self) -> bool:
        return all(b <= a and b != a for (_, a), (_, b) in zip(self.steps, self.steps[1:]))

    def transform(self, P: QpMatrix) -> "Filtration":
        """Image of every step under the invertible matrix ``P``."""
        return Filtration(self.dim, [(j, s.image_under(P)) for j, s in self.steps])

    def induced_on(self, sub: Subspace, lifts: Sequence[Sequence[Fraction]], coords) -> "Filtration":
        """Filtration induced on a subquotient.

        ``sub`` is the ambient subspace B, ``coords`` maps a vector of B to
        coordinates in the subquotient basis.
        """
        n = len(lifts)
        steps = []
        for j, s in self.steps:
            inter = s.intersect(sub)
            steps.append((j, Subspace.span([coords(v) for v in inter.basis], n)))
        return Filtration(n, steps)

    def __eq__(self, other):
        return isinstance(other, Filtration) and self.dim == other.dim and self.steps == other.steps

    def __hash__(self):
        return hash((self.dim, self.steps))

    def to_json(self) -> list[dict]:
        return [{"jump": j, "basis": s.to_json()} for j, s in self.steps]

    def __repr__(self):
        return "Filtration(" + ", ".join(f"{j}:{s.dim}" for j, s in self.steps) + ")"


# ---------------------------------------------------------------------------
# modules

@dataclass(frozen=True)
class CharacterParam:
    """A character delta with delta(u) = u^{-weight} and delta(p) = phi_value."""

    weight: int
    phi_value: Fraction

    def family(self, p: int) -> tuple[str, int] | None:
        """("SHIFT", m) for |x|x^m, ("CRYS_UNIT", m) for x^{-m}, else None."""
        k, d = self.weight, Fraction(self.phi_value)
        if k <= -1 and d == Fraction(p) ** (-k - 1):
            return ("SHIFT", -k)
        if k >= 0 and d == Fraction(p) ** (-k):
            return ("CRYS_UNIT", k)
        return None

    def to_json(self) -> dict:
        return {"weight": self.weight, "delta_p": q_str(self.phi_value)}


@dataclass(frozen=True)
class ValidationReport:
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v[0] for v in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v[0]]

    def to_json(self) -> dict:
        return {k: {"pass": v[0], "detail": v[1]} for k, v in self.checks.items()}


class FilteredPhiNModule:
    """A filtered (phi, N)-module over Q_p in a fixed basis."""

    __slots__ = ("p", "dim", "phi", "N", "fil")

    def __init__(self, p: int, phi: QpMatrix, N: QpMatrix | None, fil: Filtration):
        check_prime(p)
        if not isinstance(phi, QpMatrix):
            phi = QpMatrix(phi)
        d = phi.nrows
        if N is None:
            N = QpMatrix.zeros(d, d)
        elif not isinstance(N, QpMatrix):
            N = QpMatrix(N, d)
        if not phi.is_square or N.shape != (d, d) or fil.dim != d:
            raise DimensionMismatch("phi, N and the filtration must share one square shape")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "fil", fil)

    def __setattr__(self, name, value):
        raise AttributeError("FilteredPhiNModule is immutable")

    def __eq__(self, other):
        return (isinstance(other, FilteredPhiNModule) and self.p == other.p and self.phi == other.phi
                and self.N == other.N and self.fil == other.fil)

    def __hash__(self):
        return hash((self.p, self.phi, self.N, self.fil))

    def __repr__(self):
        return f"FilteredPhiNModule(p={self.p}, dim={self.dim}, jumps={self.fil.hodge_multiset()})"

    def Fil(self, i: int) -> Subspace:
        return self.fil.fil(i)

    @property
    def t_dim(self) -> int:
        """dim of the tangent space M / Fil^0."""
        return self.dim - self.Fil(0).dim

    def eigenspace(self, lam, power: int = 1) -> Subspace:
        lam = to_q(lam)
        A = self.phi - QpMatrix.identity(self.dim).scale(lam)
        return kernel(A ** power)

    def conjugate(self, P: QpMatrix) -> "FilteredPhiNModule":
        """Same module written in the basis given by the columns of ``P``."""
        Pi = P.inverse()
        return FilteredPhiNModule(self.p, Pi @ self.phi @ P, Pi @ self.N @ P, self.fil.transform(Pi))

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "dim": self.dim,
            "phi": self.phi.to_json(),
            "N": self.N.to_json(),
            "filtration": self.fil.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FilteredPhiNModule":
        p = obj["p"]
        d = obj["dim"]
        phi = QpMatrix(obj["phi"], d)
        N = QpMatrix(obj["N"], d)
        steps = [(s["jump"], Subspace.span(s["basis"], d)) for s in obj["filtration"]]
        return cls(p, phi, N, Filtration(d, steps))


# ---------------------------------------------------------------------------
# constructors

def unit(p: int) -> FilteredPhiNModule:
    """The unit object: phi = 1, N = 0, Fil^0 = everything, Fil^1 = 0."""
    return FilteredPhiNModule(p, QpMatrix.identity(1), None, Filtration.trivial(1, 0))


def rank_one(p: int, alpha, jump: int) -> FilteredPhiNModule:
    """Rank-one module with phi = alpha and a single Hodge jump."""
    return FilteredPhiNModule(p, QpMatrix([[alpha]]), None, Filtration.trivial(1, jump))


def cyclotomic(p: int) -> FilteredPhiNModule:
    """D_cris(Q_p(1)): phi = p^-1, single jump at -1."""
    return rank_one(p, Fraction(1, p), -1)


def shift_model(p: int, m: int) -> FilteredPhiNModule:
    """Filtered model of R(|x| x^m): phi = p^-1, jump -m (so Fil^0 = 0 for m >= 1)."""
    return rank_one(p, Fraction(1, p), -m)


def crys_unit_model(p: int, m: int) -> FilteredPhiNModule:
    """Filtered model of R(x^-m): phi = 1, jump m."""
    return rank_one(p, 1, m)


def direct_sum(*mods: FilteredPhiNModule) -> FilteredPhiNModule:
    p = mods[0].p
    if any(m.p != p for m in mods):
        raise PrimeMismatch("direct sum of modules over different primes")
    d = sum(m.dim for m in mods)

    def blockdiag(mats):
        rows = []
        off = 0
        for A in mats:
            for r in A.rows:
                rows.append([0] * off + list(r) + [0] * (d - off - A.ncols))
            off += A.ncols
        return QpMatrix(rows, d)

    levels = sorted({j for m in mods for j in m.fil.jumps()})
    steps = []
    for j in levels:
        vecs = []
        off = 0
        for m in mods:
            for v in m.Fil(j).basis:
                vecs.append([0] * off + list(v) + [0] * (d - off - m.dim))
            off += m.dim
        steps.append((j, Subspace.span(vecs, d)))
    return FilteredPhiNModule(p, blockdiag([m.phi for m in mods]), blockdiag([m.N for m in mods]),
                              Filtration(d, steps))


# ---------------------------------------------------------------------------
# validation

def validate(M: FilteredPhiNModule) -> ValidationReport:
    """Check every structural invariant; report pass/fail per invariant."""
    checks = {}
    d = M.dim
    inv = M.phi.det() != 0
    checks["phi_invertible"] = (inv, "det(phi) != 0" if inv else "phi is singular")
    lhs = M.N @ M.phi
    rhs = (M.phi @ M.N).scale(M.p)
    rel = lhs == rhs
    checks["N_phi_relation"] = (rel, "N phi = p phi N" if rel else "violated relation N phi = p phi N")
    nil = (M.N ** d).is_zero() if d else True
    checks["N_nilpotent"] = (nil, "N^d = 0" if nil else "N is not nilpotent")
    ex = M.fil.is_exhaustive()
    checks["filtration_exhaustive"] = (ex, "lowest step is the full space" if ex else "lowest step is not the full space")
    dec = M.fil.is_decreasing()
    checks["filtration_decreasing"] = (dec, "steps strictly decrease" if dec else "steps do not strictly decrease")
    return ValidationReport(checks)


# ---------------------------------------------------------------------------
# tensor, dual, twist

def tensor(M1: FilteredPhiNModule, M2: FilteredPhiNModule) -> FilteredPhiNModule:
    """Tensor product; basis e_i (x) f_j has index i * dim(M2) + j."""
    if M1.p != M2.p:
        raise PrimeMismatch("tensor product of modules over different primes")
    d1, d2 = M1.dim, M2.dim
    d = d1 * d2
    phi = kron(M1.phi, M2.phi)
    N = kron(M1.N, QpMatrix.identity(d2)) + kron(QpMatrix.identity(d1), M2.N)
    ja, jb = M1.fil.jumps(), M2.fil.jumps()
    levels = sorted({a + b for a in ja for b in jb})
    steps = []
    for c in levels:
        vecs = []
        for a in ja:
            A = M1.Fil(a)
            B = M2.Fil(c - a)
            for u in A.basis:
                for v in B.basis:
                    vecs.append([x * y for x in u for y in v])
        steps.append((c, Subspace.span(vecs, d)))
    return FilteredPhiNModule(M1.p, phi, N, Filtration(d, steps))


def dual(M: FilteredPhiNModule) -> FilteredPhiNModule:
    """Plain dual: phi* = (phi^-1)^T, N* = -N^T, Fil^i = ann(Fil^{1-i})."""
    phi = M.phi.inverse().T
    N = M.N.T.scale(-1)
    steps = [(-j, M.Fil(1 + j).annihilator()) for j in M.fil.jumps()]
    return FilteredPhiNModule(M.p, phi, N, Filtration(M.dim, steps))


def twisted_dual(M: FilteredPhiNModule) -> FilteredPhiNModule:
    """D*(chi) = dual(M) (x) Q_p(1): (phi f)(x) = p^-1 f(phi^-1 x), Fil^i = ann(Fil^{-i})."""
    return tensor(dual(M), cyclotomic(M.p))


def twist(M: FilteredPhiNModule, alpha, jump_shift: int) -> FilteredPhiNModule:
    """Tensor with the rank-one module (alpha, jump_shift)."""
    return tensor(M, rank_one(M.p, alpha, jump_shift))


# ---------------------------------------------------------------------------
# subquotients

class Subquotient:
    """B / A for phi,N-stable subspaces A ⊂ B of a module.

    ``lifts`` are vectors of B whose classes form the basis of B / A;
    ``coords(v)`` gives the coordinates of the class of v in that basis.
    """

    def __init__(self, M: FilteredPhiNModule, A: Subspace, B: Subspace, check: bool = True):
        if not A <= B:
            raise DimensionMismatch("subquotient B/A needs A inside B")
        if check:
            for S, name in ((A, "sub"), (B, "ambient")):
                if not (S.is_stable(M.phi) and S.is_stable(M.N)):
                    raise NotPhiNStable(f"{name} space of the subquotient is not phi,N-stable")
        self.M = M
        self.A = A
        self.B = B
        self.lifts = B.quotient_basis(A)
        n = len(self.lifts)
        self.n = n
        cols = list(self.lifts) + list(A.basis)
        self._basis = cols
        d = M.dim
        if cols:
            # coordinates via an echelon system of the full basis of B
            self._mat = QpMatrix.from_columns(cols, d)
        self.module = self._build()

    def coords(self, v: Sequence) -> tuple:
        if self.n == 0:
            return ()
        from .padic_linalg import solve_linear
        sol = solve_linear(self._mat, list(v))
        return tuple(sol.particular[: self.n])

    def lift(self, c: Sequence) -> tuple:
        d = self.M.dim
        return tuple(sum((ci * l[i] for ci, l in zip(c, self.lifts)), Fraction(0)) for i in range(d))

    def _build(self) -> FilteredPhiNModule:
        n = self.n
        M = self.M
        if n == 0:
            return FilteredPhiNModule(M.p, QpMatrix.zeros(0, 0), QpMatrix.zeros(0, 0), Filtration(0, []))
        phi_cols = [self.coords(M.phi.apply(l)) for l in self.lifts]
        n_cols = [self.coords(M.N.apply(l)) for l in self.lifts]
        fil = M.fil.induced_on(self.B, self.lifts, self.coords)
        return FilteredPhiNModule(M.p, QpMatrix.from_columns(phi_cols, n), QpMatrix.from_columns(n_cols, n), fil)

    def image(self, S: Subspace) -> Subspace:
        """Image in the subquotient of a subspace of B."""
        return Subspace.span([self.coords(v) for v in S.basis], self.n)

    def preimage(self, S: Subspace) -> Subspace:
        """Preimage in the ambient module of a subspace of the subquotient."""
        return Subspace.span([self.lift(c) for c in S.basis], self.M.dim) + self.A


def submodule(M: FilteredPhiNModule, B: Subspace) -> Subquotient:
    return Subquotient(M, Subspace.zero(M.dim), B)


def quotient(M: FilteredPhiNModule, A: Subspace) -> Subquotient:
    return Subquotient(M, A, Subspace.full(M.dim))


# ---------------------------------------------------------------------------
# semisimplicity, rank one, decomposition

def check_semisimple_at(M: FilteredPhiNModule, lam) -> bool:
    """True iff ker(phi - lam) = ker(phi - lam)^2."""
    return M.eigenspace(lam, 1) == M.eigenspace(lam, 2)


def rank1_classify(M: FilteredPhiNModule) -> CharacterParam:
    """Character of a rank-one module: weight = jump k, delta(p) = alpha p^-k."""
    if M.dim != 1:
        raise DimensionMismatch("rank1_classify needs a rank-one module")
    alpha = M.phi.rows[0][0]
    k = M.fil.jumps()[0]
    return CharacterParam(k, alpha * Fraction(M.p) ** (-k))


def adapted_basis(fil: Filtration, sub: Subspace | None = None) -> list[tuple[tuple, int, bool]]:
    """Basis adapted to a filtration, optionally splitting off ``sub``.

    Returns (vector, jump, in_sub) triples.  The vectors with in_sub true
    span ``sub``; those with in_sub false span a filtered complement.
    Vectors are listed from the highest jump down.
    """
    d = fil.dim
    sub = sub if sub is not None else Subspace.zero(d)
    cur = Subspace.zero(d)
    out = []
    for j, S in reversed(fil.steps):
        # complete U ∩ Fil^{j+1} to U ∩ Fil^j first, then the rest of Fil^j
        for v in S.intersect(sub).basis:
            if not cur.contains(v):
                out.append((v, j, True))
                cur = cur + Subspace.span([v], d)
        for v in S.basis:
            if not cur.contains(v):
                out.append((v, j, False))
                cur = cur + Subspace.span([v], d)
    return out


def decompose_scalar_phi(M: FilteredPhiNModule) -> tuple[list[CharacterParam], list[tuple]]:
    """Split a module with scalar phi into rank-one pieces.

    Returns characters delta_i(p) = lam p^{-k_i} (k_i the jumps) and a
    filtration-adapted basis realizing the splitting, highest jump first.
    """
    d = M.dim
    if d == 0:
        return [], []
    lam = M.phi.rows[0][0]
    if M.phi != QpMatrix.identity(d).scale(lam):
        raise PhiNotScalar("phi is not a scalar matrix")
    if not M.N.is_zero():
        raise PhiNotScalar("N must vanish when phi is scalar")
    basis = adapted_basis(M.fil)
    chars = [CharacterParam(j, lam * Fraction(M.p) ** (-j)) for _, j, _ in basis]
    return chars, [v for v, _, _ in basis]


def refinement_to_parameters(M: FilteredPhiNModule, flag: Sequence[Subspace]) -> list[CharacterParam]:
    """Parameters (delta_i) of the triangulation attached to a full flag.

    ``flag`` lists F_1 ⊂ ... ⊂ F_d with dim F_i = i (F_0 = 0 implicit).
    """
    d = M.dim
    steps = [Subspace.zero(d)] + list(flag)
    if len(steps) != d + 1:
        raise FlagNotStable(f"a full flag needs {d} steps, got {len(flag)}")
    for i, F in enumerate(steps):
        if F.dim != i:
            raise FlagNotStable(f"flag step {i} has dimension {F.dim}")
        if i and not steps[i - 1] <= F:
            raise FlagNotStable(f"flag step {i} does not contain step {i - 1}")
        if not (F.is_stable(M.phi) and F.is_stable(M.N)):
            raise FlagNotStable(f"flag step {i} is not phi,N-stable")
    out = []
    jumps = M.fil.jumps()
    for i in range(1, d + 1):
        prev, F = steps[i - 1], steps[i]
        v = F.quotient_basis(prev)[0]
        w = M.phi.apply(v)
        # phi v = alpha v mod F_{i-1}
        alpha = _eigen_on_line(prev, v, w)
        if alpha is None:
            raise EigenvalueNotRational(f"graded piece {i} has no rational Frobenius eigenvalue")
        k = None
        for j in reversed(jumps):
            if not (M.Fil(j).intersect(F) <= prev):
                k = j
                break
        if k is None:
            k = jumps[0] if jumps else 0
        out.append(CharacterParam(k, alpha * Fraction(M.p) ** (-k)))
    return out


def _eigen_on_line(prev: Subspace, v, w):
    rv = prev.reduce(v)
    rw = prev.reduce(w)
    c = next((i for i, x in enumerate(rv) if x != 0), None)
    if c is None:
        return None
    alpha = rw[c] / rv[c]
    if any(b != alpha * a for a, b in zip(rv, rw)):
        return None
    return alpha


def admissible_check(M: FilteredPhiNModule, D: Subspace) -> bool:
    """True iff D maps isomorphically onto M / Fil^0."""
    if not (D.is_stable(M.phi) and D.is_stable(M.N)):
        raise NotPhiNStable("D is not stable under phi and N")
    F0 = M.Fil(0)
    return D.dim == M.dim - F0.dim and D.intersect(F0).dim == 0


# ---------------------------------------------------------------------------
# canonical filtration

@dataclass(frozen=True)
class CanonicalFiltration:
    d_minus1: Subspace
    d0: Subspace
    d1: Subspace

    def as_tuple(self) -> tuple[Subspace, Subspace, Subspace]:
        return (self.d_minus1, self.d0, self.d1)

    def to_json(self) -> dict:
        return {"D_-1": self.d_minus1.to_json(), "D_0": self.d0.to_json(), "D_1": self.d1.to_json()}


def _check_c3_admissible(M: FilteredPhiNModule, D: Subspace):
    if not check_semisimple_at(M, 1):
        raise PreconditionFailed("phi is not semisimple at 1")
    if not check_semisimple_at(M, Fraction(1, M.p)):
        raise PreconditionFailed("phi is not semisimple at p^-1")
    try:
        ok = admissible_check(M, D)
    except NotPhiNStable as exc:
        raise PreconditionFailed(f"D is not admissible: {exc}") from exc
    if not ok:
        raise PreconditionFailed("D is not admissible")


def canonical_filtration(M: FilteredPhiNModule, D: Subspace) -> CanonicalFiltration:
    """D_{-1} = (1 - p^-1 phi^-1) D + N(D^{phi=1}); D_1 = D + M^{phi=1} ∩ N^-1(D^{phi=p^-1})."""
    _check_c3_admissible(M, D)
    p = M.p
    d = M.dim
    I = QpMatrix.identity(d)
    pinv = Fraction(1, p)
    op = I - M.phi.inverse().scale(pinv)
    D_phi1 = D.intersect(M.eigenspace(1))
    D_phip = D.intersect(M.eigenspace(pinv))
    dm1 = D.image_under(op) + D_phi1.image_under(M.N)
    d1 = D + M.eigenspace(1).intersect(D_phip.preimage_under(M.N))
    return CanonicalFiltration(dm1, D, d1)


def verify_filtration_properties(M: FilteredPhiNModule, D: Subspace, filt) -> ValidationReport:
    """Check D1-D3 (and phi,N-stability of each step) for a candidate triple."""
    dm1, d0, d1 = filt.as_tuple() if isinstance(filt, CanonicalFiltration) else filt
    p = M.p
    n = M.dim
    I = QpMatrix.identity(n)
    pinv = Fraction(1, p)
    checks = {}
    stable = all(S.is_stable(M.phi) and S.is_stable(M.N) for S in (dm1, d0, d1))
    chain = dm1 <= d0 <= d1
    checks["steps_phiN_stable"] = (stable and chain, "each step is a phi,N-submodule and the steps increase")
    checks["D1"] = (d0 == D, "D_-2 = 0, D_0 = D, D_2 = M")
    # (M / D_1)^{phi=1, N=0} = 0
    Y = d1.preimage_under(M.phi - I).intersect(d1.preimage_under(M.N))
    checks["D2_quotient"] = (Y <= d1, "(M/D_1)^{phi=1,N=0} = 0")
    op = I - M.phi.inverse().scale(pinv)
    regen = dm1.image_under(op) + dm1.image_under(M.N)
    checks["D2_minus1"] = (regen == dm1, "D_-1 = (1 - p^-1 phi^-1) D_-1 + N(D_-1)")
    ok3a = d0.image_under(M.phi - I.scale(pinv)) <= dm1 if dm1 <= d0 else False
    checks["D3_gr0"] = (ok3a, "phi = p^-1 on D_0 / D_-1")
    ok3b = d1.image_under(M.phi - I) <= d0 if d0 <= d1 else False
    checks["D3_gr1"] = (ok3b, "phi = 1 on D_1 / D_0")
    return ValidationReport(checks)


def dual_filtration_check(M: FilteredPhiNModule, D: Subspace) -> bool:
    """Canonical filtration of (D*(chi), ann D) equals the annihilators of D_{-i}."""
    filt = canonical_filtration(M, D)
    Md = twisted_dual(M)
    Dd = D.annihilator()
    fd = canonical_filtration(Md, Dd)
    return (fd.d_minus1 == filt.d1.annihilator() and fd.d0 == Dd and fd.d1 == filt.d_minus1.annihilator())


# ---------------------------------------------------------------------------
# Hodge and Newton polygons

def char_poly(A: QpMatrix) -> list[Fraction]:
    """Coefficients c_0..c_n of det(x I - A) (Faddeev-LeVerrier), c_n = 1."""
    n = A.nrows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = QpMatrix.zeros(n, n)
    I = QpMatrix.identity(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + I.scale(coeffs[n - k + 1])
        AM = A @ Mk
        tr = sum((AM.rows[i][i] for i in range(n)), Fraction(0))
        coeffs[n - k] = -tr / k
    return coeffs


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    f = 1
    while f * f <= n:
        if n % f == 0:
            small.append(f)
            if f * f != n:
                large.append(n // f)
        f += 1
    return small + large[::-1]


def rational_roots(coeffs: Sequence[Fraction]) -> dict[Fraction, int]:
    """Rational roots of a polynomial (low-degree-first coefficients) with multiplicity."""
    from math import lcm

    cs = [Fraction(c) for c in coeffs]
    roots: dict[Fraction, int] = {}
    while len(cs) > 1 and cs[0] == 0:
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
        cs = cs[1:]
    while len(cs) > 1:
        L = lcm(*[c.denominator for c in cs])
        ints = [int(c * L) for c in cs]
        found = None
        for a in _divisors(ints[0]):
            for b in _divisors(ints[-1]):
                for s in (1, -1):
                    r = Fraction(s * a, b)
                    if _peval(cs, r) == 0:
                        found = r
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        roots[found] = roots.get(found, 0) + 1
        cs = _pdiv_linear(cs, found)
    return roots


def _peval(cs, x):
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def _pdiv_linear(cs, r):
    n = len(cs) - 1
    out = [Fraction(0)] * n
    acc = Fraction(0)
    for i in range(n, 0, -1):
        acc = acc * r + cs[i]
        out[i - 1] = acc
    return out


def newton_slopes(coeffs: Sequence[Fraction], p: int) -> list[Fraction]:
    """Slopes (with multiplicity) of the Newton polygon of a monic polynomial."""
    pts = [(i, valuation(c, p)) for i, c in enumerate(coeffs) if c != 0]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(int(y1 - y2), x2 - x1)
        slopes.extend([s] * (x2 - x1))
    return sorted(slopes)


def _t_hodge(M: FilteredPhiNModule, S: Subspace) -> int:
    total = 0
    for j in M.fil.jumps():
        a = M.Fil(j).intersect(S).dim
        b = M.Fil(j + 1).intersect(S).dim
        total += j * (a - b)
    return total


def _t_newton(M: FilteredPhiNModule, S: Subspace) -> float:
    if S.dim == 0:
        return 0
    from .padic_linalg import restrict
    return valuation(restrict(M.phi, S).det(), M.p)


def hodge_newton(M: FilteredPhiNModule) -> dict:
    """Hodge numbers, Newton slopes and a weak-admissibility flag.

    Sub-objects tested: N-closures of sums of generalized eigenspaces for
    rational eigenvalues (and of the non-rational remainder).
    """
    d = M.dim
    hodge = M.fil.hodge_multiset()
    cp = char_poly(M.phi) if d else [Fraction(1)]
    slopes = newton_slopes(cp, M.p) if d else []
    tH = sum(hodge)
    tN = _t_newton(M, Subspace.full(d)) if d else 0
    roots = rational_roots(cp) if d else {}
    pieces = [M.eigenspace(r, d) for r in roots]
    rest_dim = d - sum(P.dim for P in pieces)
    if rest_dim:
        # remainder: image of prod (phi - r)^d over rational roots
        A = QpMatrix.identity(d)
        for r in roots:
            A = A @ ((M.phi - QpMatrix.identity(d).scale(r)) ** d)
        pieces.append(A.image())
    cands = set()
    for k in range(len(pieces) + 1):
        for combo in itertools.combinations(range(len(pieces)), k):
            S = Subspace.zero(d)
            for c in combo:
                S = S + pieces[c]
            cands.add(_n_closure(M, S))
            for a in range(1, d + 1):
                cands.add(_n_closure(M, S.intersect(kernel(M.N ** a))))
    ok = tH == tN
    worst = None
    for S in cands:
        if 0 < S.dim < d and _t_hodge(M, S) > _t_newton(M, S):
            ok = False
            worst = S
    return {
        "hodge": hodge,
        "newton": slopes,
        "t_H": tH,
        "t_N": tN,
        "weakly_admissible": ok,
        "violating_subobject": worst.to_json() if worst is not None else None,
    }


def _n_closure(M: FilteredPhiNModule, S: Subspace) -> Subspace:
    cur = S
    while True:
        nxt = cur + cur.image_under(M.N) + cur.image_under(M.phi)
        if nxt == cur:
            return cur
        cur = nxt

"""Coordinates on the cohomology of the rank-one families R(|x| x^m) and R(x^-m).

SHIFT(m), m >= 1, is delta = |x| x^m; its filtered model has phi = 1/p and a
single Hodge jump at -m.  CRYS_UNIT(m), m >= 0, is delta = x^-m with phi = 1
and jump m.  H^1 of SHIFT(m) carries the basis (alpha*_m, beta*_m), H^1 of
CRYS_UNIT(k) the basis (x*_k, y*_k).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError, OutOfDomain, TargetH2Vanishes, UnsupportedCharacter, WrongParent
from .filtered_phin import (
    CharacterParam,
    FilteredPhiNModule,
    crys_unit_model,
    shift_model,
    twisted_dual,
)
from .padic_linalg import PadicScalar, QpMatrix, padic_log, solve_linear, valuation
from .st_cohomology import StClass, h_cris, h_st

SHIFT = "SHIFT"
CRYS_UNIT = "CRYS_UNIT"

# <basis of H^1(SHIFT(n)), basis of H^1(CRYS_UNIT(k))> in H^2(SHIFT(n-k)) = Q_p.
# Rows alpha*, beta*; columns x*, y*.  Regenerated by robba_oracle.cup_table_generate.
PAIR_TABLE = ((Fraction(0), Fraction(1)), (Fraction(-1), Fraction(0)))


@dataclass(frozen=True)
class Rank1Space:
    family: str
    m: int

    def __post_init__(self):
        if self.family == SHIFT and self.m < 1:
            raise UnsupportedCharacter("SHIFT(m) needs m >= 1")
        if self.family == CRYS_UNIT and self.m < 0:
            raise UnsupportedCharacter("CRYS_UNIT(m) needs m >= 0")
        if self.family not in (SHIFT, CRYS_UNIT):
            raise UnsupportedCharacter(f"unknown family {self.family!r}")

    @classmethod
    def from_character(cls, delta: CharacterParam, p: int) -> "Rank1Space":
        fam = delta.family(p)
        if fam is None:
            raise UnsupportedCharacter(
                f"character with weight {delta.weight} and delta(p) = {delta.phi_value} "
                "is in neither rank-one family")
        return cls(*fam)

    def character_at(self, p: int) -> CharacterParam:
        if self.family == SHIFT:
            return CharacterParam(-self.m, Fraction(p) ** (self.m - 1))
        return CharacterParam(self.m, Fraction(p) ** (-self.m))

    def model(self, p: int) -> FilteredPhiNModule:
        if self.family == SHIFT:
            return shift_model(p, self.m)
        return crys_unit_model(p, self.m)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(dim H^0, dim H^1, dim H^1_f)."""
        return (0, 2, 1) if self.family == SHIFT else (1, 2, 1)

    @property
    def basis_names(self) -> tuple[str, str]:
        return ("alpha*", "beta*") if self.family == SHIFT else ("x*", "y*")

    def to_json(self):
        return {"family": self.family, "m": self.m}


def h_dims(delta: CharacterParam, p: int) -> tuple[int, int, int, int]:
    """(dim H^0, dim H^1, dim H^1_f, dim H^1_st), computed from the filtered model.

    H^0 and H^1_st come from C_st, H^2 from H^0 of the twisted dual,
    H^1 from the Euler characteristic, H^1_f from C_cris.
    """
    space = Rank1Space.from_character(delta, p)
    M = space.model(p)
    h0 = h_st(M).dims[0]
    h2 = h_st(twisted_dual(M)).dims[0]
    h1 = h0 + h2 + M.dim
    h1f = h_cris(M).dims[1]
    h1st = h_st(M).dims[1]
    return (h0, h1, h1f, h1st)


@dataclass(frozen=True)
class H1Coord:
    """A class in H^1 of a rank-one space, in its normalized basis."""

    space: Rank1Space
    a: PadicScalar
    b: PadicScalar

    @classmethod
    def of(cls, space: Rank1Space, p: int, a, b) -> "H1Coord":
        a = a if isinstance(a, PadicScalar) else PadicScalar(p, a)
        b = b if isinstance(b, PadicScalar) else PadicScalar(p, b)
        return cls(space, a, b)

    @property
    def p(self):
        return self.a.p

    def __add__(self, other: "H1Coord") -> "H1Coord":
        if other.space != self.space:
            raise WrongParent("coordinates in different spaces")
        return H1Coord(self.space, self.a + other.a, self.b + other.b)

    def scale(self, c) -> "H1Coord":
        return H1Coord(self.space, self.a * c, self.b * c)

    def __neg__(self):
        return self.scale(-1)

    def __eq__(self, other):
        return (isinstance(other, H1Coord) and self.space == other.space
                and self.a == other.a and self.b == other.b)

    def __hash__(self):
        return hash(self.space)

    def as_tuple(self):
        return (self.a, self.b)

    def to_json(self):
        n1, n2 = self.space.basis_names
        return {"space": self.space.to_json(), n1: self.a.to_json(), n2: self.b.to_json()}

    def __repr__(self):
        n1, n2 = self.space.basis_names
        return f"H1Coord({self.space.family}({self.space.m}): {self.a.value} {n1} + {self.b.value} {n2})"


def _shift_parent(M: FilteredPhiNModule) -> int:
    """Return m when M is the SHIFT(m) model, else raise WrongParent."""
    if M.dim != 1:
        raise WrongParent("expected a rank-one module")
    if not M.N.is_zero():
        raise WrongParent("expected N = 0")
    if M.phi.rows[0][0] != Fraction(1, M.p):
        raise WrongParent("expected phi = 1/p on the generator")
    jumps = M.fil.jumps()
    if len(jumps) != 1 or jumps[0] > -1:
        raise WrongParent("expected a single Hodge jump at -m with m >= 1 (so Fil^0 = 0)")
    return -jumps[0]


def stclass_to_alphabeta(c: StClass) -> H1Coord:
    """Write c = u cl(1,0,0) + v cl(0,0,1) and return -u alpha* - v beta*."""
    M = c.parent
    m = _shift_parent(M)
    p = M.p
    e1 = StClass(M, (1,), (0,), (0,)).vec
    e2 = StClass(M, (0,), (0,), (1,)).vec
    A = QpMatrix.from_columns([e1, e2], len(c.vec))
    sol = solve_linear(A, list(c.vec))
    u, v = sol.particular
    return H1Coord.of(Rank1Space(SHIFT, m), p, -u, -v)


def alphabeta_to_stclass(coord: H1Coord, p: int | None = None) -> StClass:
    """Inverse of stclass_to_alphabeta; coordinates must be exact rationals."""
    if coord.space.family != SHIFT:
        raise WrongParent("expected coordinates in a SHIFT space")
    p = coord.p if p is None else p
    if not (coord.a.is_exact and coord.b.is_exact):
        raise InputError("C_st classes need exact rational coordinates")
    M = shift_model(p, coord.space.m)
    return StClass(M, (-coord.a.value,), (0,), (-coord.b.value,))


def pair(a: H1Coord, b: H1Coord) -> PadicScalar:
    """Cup pairing H^1(SHIFT(n)) x H^1(CRYS_UNIT(k)) -> H^2(SHIFT(n-k)) = Q_p."""
    if a.space.family != SHIFT or b.space.family != CRYS_UNIT:
        raise WrongParent("pair expects (SHIFT class, CRYS_UNIT class)")
    if a.p != b.p:
        raise InputError("coordinates over different primes")
    if a.space.m - b.space.m < 1:
        raise TargetH2Vanishes(f"H^2 of the product vanishes: n - k = {a.space.m - b.space.m} < 1")
    (t_ax, t_ay), (t_bx, t_by) = PAIR_TABLE
    return a.a * b.a * t_ax + a.a * b.b * t_ay + a.b * b.a * t_bx + a.b * b.b * t_by


def gram_matrix(n: int, k: int, p: int) -> tuple[tuple[PadicScalar, ...], ...]:
    """Pairing of the bases (alpha*_n, beta*_n) against (x*_k, y*_k)."""
    rows = []
    for a, b in ((1, 0), (0, 1)):
        u = H1Coord.of(Rank1Space(SHIFT, n), p, a, b)
        row = []
        for x, y in ((1, 0), (0, 1)):
            w = H1Coord.of(Rank1Space(CRYS_UNIT, k), p, x, y)
            row.append(pair(u, w))
        rows.append(tuple(row))
    return tuple(rows)


def kummer_coords(u, p: int | None = None, prec: int = 30) -> H1Coord:
    """Kummer class of u in H^1(SHIFT(1)): kappa(p) = -beta*, kappa(u) = -log(u) alpha* for u = 1 mod p."""
    if isinstance(u, PadicScalar):
        p, val = u.p, u.value
    else:
        if p is None:
            raise InputError("prime required")
        val = Fraction(u)
    space = Rank1Space(SHIFT, 1)
    if val == p:
        return H1Coord.of(space, p, 0, -1)
    if val != 0 and valuation(val, p) == 0 and valuation(val - 1, p) >= 1:
        lg = padic_log(u if isinstance(u, PadicScalar) else val, p, prec)
        return H1Coord(space, -lg, PadicScalar(p, 0))
    raise OutOfDomain("kummer_coords is defined for u = p and u = 1 mod p")

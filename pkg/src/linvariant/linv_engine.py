"""L-invariant of a semistable filtered module along an admissible submodule D.

Pipeline: conditions -> canonical filtration D_-1 ⊂ D_0 ⊂ D_1 -> the graded
pieces gr_0 = D_0/D_-1 (phi = 1/p) and gr_1 = D_1/D_0 (phi = 1) -> block
extension classes e_ij in H^1(SHIFT(m_i + k_j)) -> the local image S ⊂ H^1(M_1)
-> L_loc = det(U V^-1) for a basis [U | V] of S.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    C4Violation,
    ConditionFailure,
    DimensionMismatch,
    DualizeFirst,
    FormsDisagree,
    GlobalLocalMismatch,
    InputError,
    LineIsD1,
    NotPhiNStable,
    RankDefect,
    RhoCNotInvertible,
    ShapeMismatch,
    UnsupportedCharacter,
)
from .filtered_phin import (
    CanonicalFiltration,
    FilteredPhiNModule,
    Filtration,
    Subquotient,
    adapted_basis,
    admissible_check,
    canonical_filtration,
    check_semisimple_at,
    crys_unit_model,
    dual,
    tensor,
    twisted_dual,
    validate,
)
from .padic_linalg import PadicScalar, QpMatrix, Subspace, det_star, kernel, q_str, restrict
from .rank1_coords import CRYS_UNIT, PAIR_TABLE, SHIFT, H1Coord, Rank1Space, stclass_to_alphabeta
from .st_cohomology import ShortExactSequence, extension_class_st


@dataclass(frozen=True)
class LInvariantInput:
    M: FilteredPhiNModule
    D: Subspace
    assert_c1c2: bool = False
    global_subspace: tuple | None = None

    def __post_init__(self):
        if self.D.dim_ambient != self.M.dim:
            raise DimensionMismatch("D lives in a space of the wrong dimension")
        if self.global_subspace is not None:
            rows = tuple(tuple(Fraction(x) for x in r) for r in self.global_subspace)
            object.__setattr__(self, "global_subspace", rows)

    def to_json(self) -> dict:
        out = self.M.to_json()
        out["D"] = {"basis": self.D.to_json()}
        out["assert_c1c2"] = self.assert_c1c2
        out["global_subspace"] = (None if self.global_subspace is None
                                  else [[q_str(x) for x in r] for r in self.global_subspace])
        return out


@dataclass(frozen=True)
class Piece:
    """A rank-one graded piece: its model and a generator in D_W coordinates."""

    space: Rank1Space
    vector: tuple

    def to_json(self):
        return {**self.space.to_json(), "vector": [q_str(x) for x in self.vector]}


@dataclass
class WDecomposition:
    p: int
    gr0: list[Piece]
    m1: list[Piece]
    w1: list[Piece]
    blocks: list[list[H1Coord]]
    w0_rank: int = 0
    filtration: CanonicalFiltration | None = None
    notes: list[str] = field(default_factory=list)

    @classmethod
    def from_blocks(cls, p: int, ms: Sequence[int], ks: Sequence[int], ab) -> "WDecomposition":
        """Coordinate model: ab[i][j] = (a_ij, b_ij) with e_ij = a alpha* + b beta*."""
        if len(ab) != len(ms) or any(len(row) != len(ks) for row in ab):
            raise DimensionMismatch("block matrix does not match the piece lists")
        gr0 = [Piece(Rank1Space(SHIFT, m), ()) for m in ms]
        m1 = [Piece(Rank1Space(CRYS_UNIT, k), ()) for k in ks]
        blocks = [[H1Coord.of(Rank1Space(SHIFT, ms[i] + ks[j]), p, *ab[i][j]) for j in range(len(ks))]
                  for i in range(len(ms))]
        return cls(p, gr0, m1, list(), blocks)

    @property
    def r(self) -> int:
        return len(self.gr0) - self.w0_rank

    @property
    def s(self) -> int:
        return len(self.w1)

    @property
    def e(self) -> int:
        return self.r + self.s

    def alpha_matrix(self) -> QpMatrix:
        return QpMatrix([[c.a.value for c in row] for row in self.blocks], len(self.m1))

    def beta_matrix(self) -> QpMatrix:
        return QpMatrix([[c.b.value for c in row] for row in self.blocks], len(self.m1))

    def to_json(self) -> dict:
        return {
            "gr0": [x.to_json() for x in self.gr0],
            "M1": [x.to_json() for x in self.m1],
            "W1": [x.to_json() for x in self.w1],
            "blocks": [[{"alpha*": q_str(c.a.value), "beta*": q_str(c.b.value),
                         "space": c.space.to_json()} for c in row] for row in self.blocks],
            "r": self.r, "s": self.s, "e": self.e, "rank_W0": self.w0_rank,
            "notes": list(self.notes),
        }


@dataclass
class ConditionReport:
    checks: dict = field(default_factory=dict)
    c1c2_asserted: bool = False

    def set(self, name, ok, detail=""):
        self.checks[name] = (ok, detail)

    def passed(self, name) -> bool | None:
        return self.checks.get(name, (None, ""))[0]

    @property
    def ok(self) -> bool:
        return all(v[0] is True for v in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if v[0] is not True]

    def to_json(self) -> dict:
        out = {k: {"ok": v[0], "detail": v[1]} for k, v in self.checks.items()}
        out["C1_C2"] = {"ok": None, "detail": "asserted by the user" if self.c1c2_asserted
                        else "not asserted"}
        return out


@dataclass
class LInvariantReport:
    conditions: ConditionReport
    filtration: CanonicalFiltration
    r: int
    s: int
    l_local: PadicScalar
    l_global: PadicScalar | None
    l_value: PadicScalar | None
    interpolation: PadicScalar
    decomposition: WDecomposition
    precision: str = "exact"

    @property
    def e(self) -> int:
        return self.r + self.s

    def to_json(self) -> dict:
        def num(x):
            return None if x is None else q_str(x.value)
        return {
            "conditions": self.conditions.to_json(),
            "filtration": self.filtration.to_json(),
            "r": self.r, "s": self.s, "e": self.e,
            "L_loc": num(self.l_local),
            "L_gl": num(self.l_global) if self.l_global is not None else "requires global data",
            "L": num(self.l_value) if self.l_value is not None else "requires global data",
            "E": num(self.interpolation),
            "precision": self.precision,
            "decomposition": self.decomposition.to_json(),
        }


# ---------------------------------------------------------------------------
# W and its pieces

def _w_module(M: FilteredPhiNModule, filt: CanonicalFiltration) -> Subquotient:
    return Subquotient(M, filt.d_minus1, filt.d1)


def _phi1_fil0_kerN(X: FilteredPhiNModule, with_kerN: bool = True) -> Subspace:
    S = X.Fil(0).intersect(X.eigenspace(1))
    if with_kerN:
        S = S.intersect(kernel(X.N))
    return S


def w0_rank(DW: FilteredPhiNModule) -> int:
    """rank W_0, read off as dim Fil^0 (W*(1))^{phi=1, N=0}."""
    return _phi1_fil0_kerN(twisted_dual(DW)).dim


def _sort_pieces(pieces: list[Piece]) -> list[Piece]:
    return sorted(pieces, key=lambda x: -x.space.m)


def _split(M: FilteredPhiNModule, D: Subspace, filt: CanonicalFiltration):
    """Return (D_W module, gr0 pieces, M1 pieces, W1 pieces, rank W0, notes)."""
    p = M.p
    sqW = _w_module(M, filt)
    DW = sqW.module
    n = DW.dim
    d0W = sqW.image(filt.d0)
    notes = []

    gr0 = Subquotient(DW, Subspace.zero(n), d0W)
    gr1 = Subquotient(DW, d0W, Subspace.full(n))
    for sq, lam, name in ((gr0, Fraction(1, p), "gr_0"), (gr1, Fraction(1), "gr_1")):
        if sq.n and sq.module.phi != QpMatrix.identity(sq.n).scale(lam):
            raise ConditionFailure(f"phi on {name} is not {q_str(lam)}")

    pieces0 = []
    for v, j, _ in adapted_basis(gr0.module.fil):
        if j > -1:
            raise UnsupportedCharacter(f"gr_0 piece with Hodge jump {j} is not of the form SHIFT(m), m >= 1")
        pieces0.append(Piece(Rank1Space(SHIFT, -j), gr0.lift(v)))

    W1 = _phi1_fil0_kerN(DW)
    W1_loose = _phi1_fil0_kerN(DW, with_kerN=False)
    if W1_loose.dim != W1.dim:
        notes.append(f"intersecting with ker N lowered rank W_1 from {W1_loose.dim} to {W1.dim}")
    W1_img = gr1.image(W1)
    if W1_img.dim != W1.dim:
        raise ConditionFailure("W_1 does not inject into gr_1")
    m1, w1 = [], []
    for v, j, in_sub in adapted_basis(gr1.module.fil, W1_img):
        if j < 0:
            raise UnsupportedCharacter(f"gr_1 piece with Hodge jump {j} is not of the form CRYS_UNIT(k), k >= 0")
        piece = Piece(Rank1Space(CRYS_UNIT, j), gr1.lift(v))
        (w1 if in_sub else m1).append(piece)
    return sqW, _sort_pieces(pieces0), _sort_pieces(m1), _sort_pieces(w1), w0_rank(DW), notes


def block_class(DW: FilteredPhiNModule, gr0: list[Piece], i: int, lift_j: Piece) -> H1Coord:
    """Class of the rank-2 extension (gr_0 piece i) -- (gr_1 piece j), twisted to an extension of 1."""
    n = DW.dim
    d0W = Subspace.span([x.vector for x in gr0], n)
    Xp = d0W + Subspace.span([lift_j.vector], n)
    Bi = Subspace.span([x.vector for t, x in enumerate(gr0) if t != i], n)
    X = Subquotient(DW, Bi, Xp)
    sub = Subspace.span([X.coords(gr0[i].vector)], X.n)
    k = lift_j.space.m
    X2 = tensor(X.module, dual(crys_unit_model(DW.p, k)))
    seq = ShortExactSequence.from_submodule(X2, sub)
    # normalize the quotient generator to the image of lift_j
    b = seq.pi.apply(X.coords(lift_j.vector))
    if b[0] != 1:
        seq = ShortExactSequence(seq.A, seq.X, seq.B, seq.i, seq.pi.scale(Fraction(1) / b[0]))
    a = seq.pull_back(X.coords(gr0[i].vector))
    if a[0] != 1:
        seq = ShortExactSequence(seq.A, seq.X, seq.B, seq.i.scale(a[0]), seq.pi)
    return stclass_to_alphabeta(extension_class_st(seq))


def build_W(M: FilteredPhiNModule, D: Subspace, filt: CanonicalFiltration | None = None) -> WDecomposition:
    filt = filt if filt is not None else canonical_filtration(M, D)
    sqW, gr0, m1, w1, rw0, notes = _split(M, D, filt)
    r = len(gr0) - rw0
    if r != len(m1):
        raise C4Violation(f"rank M_0 = {r} but rank M_1 = {len(m1)}")
    if rw0 and w1:
        raise ConditionFailure("W_0 and W_1 are both nonzero")
    blocks = [[block_class(sqW.module, gr0, i, pj) for pj in m1] for i in range(len(gr0))]
    return WDecomposition(M.p, gr0, m1, w1, blocks, rw0, filt, notes)


# ---------------------------------------------------------------------------
# conditions

def check_conditions(inp: LInvariantInput) -> ConditionReport:
    rep = ConditionReport(c1c2_asserted=inp.assert_c1c2)
    M, D = inp.M, inp.D
    v = validate(M)
    rep.set("valid", v.ok, "; ".join(v.failures()))
    if not v.ok:
        return rep
    s1 = check_semisimple_at(M, 1)
    sp = check_semisimple_at(M, Fraction(1, M.p))
    rep.set("C3", s1 and sp, "" if s1 and sp else
            "phi is not semisimple at " + ("1" if not s1 else "p^-1"))
    try:
        adm = admissible_check(M, D)
        rep.set("admissible", adm, "" if adm else "D does not project isomorphically onto M/Fil^0")
    except NotPhiNStable as exc:
        rep.set("admissible", False, str(exc))
    if not rep.ok:
        return rep
    filt = canonical_filtration(M, D)
    try:
        sqW, gr0, m1, w1, rw0, _ = _split(M, D, filt)
    except (ConditionFailure, InputError) as exc:
        rep.set("C4", False, str(exc))
        return rep
    r = len(gr0) - rw0
    if r != len(m1):
        rep.set("C4", False, f"rank M_0 = {r} but rank M_1 = {len(m1)}")
    elif rw0 and not w1:
        dual_rep = check_conditions(LInvariantInput(*dual_submodule(M, D), inp.assert_c1c2))
        ok, detail = dual_rep.checks.get("C4", (None, ""))
        rep.set("C4", ok, "checked on the dual input" + (f": {detail}" if detail else ""))
    elif rw0:
        rep.set("C4", None, "not checked: W_0 and W_1 are both nonzero")
    else:
        blocks = [[block_class(sqW.module, gr0, i, pj) for pj in m1] for i in range(len(gr0))]
        Wd = WDecomposition(M.p, gr0, m1, w1, blocks, rw0, filt)
        inj = Wd.beta_matrix().rank() == r if r else True
        rep.set("C4", inj, "" if inj else "H^0(M_1) meets H^1_f(M_0): a block class is crystalline")
    c5 = rw0 == 0 or not w1
    rep.set("C5", c5, f"rank W_0 = {rw0}, rank W_1 = {len(w1)}")
    return rep


# ---------------------------------------------------------------------------
# local image and determinants

def kernel_system(Wd: WDecomposition) -> QpMatrix:
    """Rows i: coefficients of sum_j pair(e_ij, u_j x* + v_j y*) in (u_1..u_r | v_1..v_r)."""
    (t_ax, t_ay), (t_bx, t_by) = PAIR_TABLE
    r = len(Wd.m1)
    rows = []
    for row in Wd.blocks[: len(Wd.gr0)]:
        u = [c.a.value * t_ax + c.b.value * t_bx for c in row]
        v = [c.a.value * t_ay + c.b.value * t_by for c in row]
        rows.append(u + v)
    return QpMatrix(rows, 2 * r)


def local_image(Wd: WDecomposition) -> Subspace:
    r = Wd.r
    if r < 1:
        raise RankDefect("the local image needs r >= 1")
    S = kernel(kernel_system(Wd))
    if S.dim != r:
        raise RankDefect(f"local image has dimension {S.dim}, expected {r}")
    return S


def _det_ratio(rows: Sequence[Sequence[Fraction]], n: int) -> Fraction:
    U = QpMatrix([r[:n] for r in rows], n)
    V = QpMatrix([r[n:] for r in rows], n)
    dv = V.det()
    if dv == 0:
        raise RhoCNotInvertible("the y*-projection of the subspace is not invertible")
    return U.det() / dv


def l_local(Wd: WDecomposition) -> PadicScalar:
    S = local_image(Wd)
    return PadicScalar(Wd.p, _det_ratio(S.basis, Wd.r))


def l_global(Wd: WDecomposition, global_subspace) -> tuple[PadicScalar, PadicScalar]:
    """(L, L_gl) from a basis of the global image in H^1(gr_1).

    Columns: x* for the M_1 pieces then the W_1 pieces, then y* in the same order.
    """
    r, s, e = Wd.r, Wd.s, Wd.e
    rows = [tuple(Fraction(x) for x in row) for row in global_subspace]
    if len(rows) != e or any(len(row) != 2 * e for row in rows):
        raise DimensionMismatch(f"global subspace must be {e} rows of length {2 * e}")
    G = Subspace.span(rows, 2 * e)
    if G.dim != e:
        raise DimensionMismatch("global subspace rows are dependent")
    L = _det_ratio(G.basis, e)
    mcols = list(range(r)) + list(range(e, e + r))
    wcols = list(range(r, e)) + list(range(e + r, 2 * e))
    W_zero = Subspace.span([[Fraction(int(i == j)) for i in range(2 * e)] for j in mcols], 2 * e)
    GS = G.intersect(W_zero)
    S = local_image(Wd)
    S_emb = Subspace.span([_embed(v, r, e) for v in S.basis], 2 * e)
    if GS != S_emb:
        raise GlobalLocalMismatch("the global subspace does not meet the M_1 block in the local image")
    # W_1 coordinates of a complement of S inside G give the global factor
    comp = G.quotient_basis(GS)
    Lgl = _det_ratio([[v[c] for c in wcols] for v in comp], s) if s else Fraction(1)
    return PadicScalar(Wd.p, L), PadicScalar(Wd.p, Lgl)


def _embed(v, r, e):
    out = [Fraction(0)] * (2 * e)
    for i in range(r):
        out[i] = v[i]
        out[e + i] = v[r + i]
    return out


# ---------------------------------------------------------------------------
# interpolation factor

def _euler_on_nzero(M: FilteredPhiNModule, D: Subspace) -> Fraction:
    """det*(1 - p^-1 phi^-1 | D^{N=0})."""
    DN = D.intersect(kernel(M.N))
    if DN.dim == 0:
        return Fraction(1)
    op = QpMatrix.identity(M.dim) - M.phi.inverse().scale(Fraction(1, M.p))
    return det_star(restrict(op, DN))


def dual_submodule(M: FilteredPhiNModule, D: Subspace) -> tuple[FilteredPhiNModule, Subspace]:
    """(M*(1), D*) with D* the annihilator of D."""
    return twisted_dual(M), D.annihilator()


def interpolation_factor(M: FilteredPhiNModule, D: Subspace) -> PadicScalar:
    """E(M, D), cross-checked by the coinvariant form and by duality."""
    Md, Dd = dual_submodule(M, D)
    first = _euler_on_nzero(M, D)
    form1 = first * _euler_on_nzero(Md, Dd)
    Q = Subquotient(M, M.N.image() + D, Subspace.full(M.dim))
    if Q.n:
        form2 = first * det_star(QpMatrix.identity(Q.n) - Q.module.phi)
    else:
        form2 = first
    if form1 != form2:
        raise FormsDisagree(f"E = {q_str(form1)} by N-invariants but {q_str(form2)} by coinvariants")
    Ed = _euler_on_nzero(Md, Dd) * _euler_on_nzero(twisted_dual(Md), Dd.annihilator())
    if Ed != form1:
        raise FormsDisagree(f"E = {q_str(form1)} but the dual input gives {q_str(Ed)}")
    return PadicScalar(M.p, form1)


# ---------------------------------------------------------------------------
# modular forms

def modular_form_module(p: int, k: int, lam) -> LInvariantInput:
    """Twisted D_st of a weight-2k newform split multiplicative at p, with L-invariant lam."""
    if k < 1:
        raise InputError("k must be >= 1")
    lam = Fraction(lam)
    phi = QpMatrix.diag([Fraction(1, p), Fraction(1)])
    N = QpMatrix([[0, 1], [0, 0]])
    line = Subspace.span([(-lam, Fraction(1))], 2)
    fil = Filtration(2, [(-k, Subspace.full(2)), (k - 1, line)])
    M = FilteredPhiNModule(p, phi, N, fil)
    return LInvariantInput(M, Subspace.span([(1, 0)], 2))


def fontaine_mazur_module(p: int, k: int, lam) -> FilteredPhiNModule:
    """D_st of a weight-2k newform split multiplicative at p: Hodge jumps 0 and 2k-1."""
    if k < 1:
        raise InputError("k must be >= 1")
    lam = Fraction(lam)
    phi = QpMatrix.diag([Fraction(p) ** (k - 1), Fraction(p) ** k])
    N = QpMatrix([[0, 1], [0, 0]])
    line = Subspace.span([(-lam, Fraction(1))], 2)
    fil = Filtration(2, [(0, Subspace.full(2)), (2 * k - 1, line)])
    return FilteredPhiNModule(p, phi, N, fil)


def fontaine_mazur_extract(M: FilteredPhiNModule) -> PadicScalar:
    """lam with d_2 - lam d_1 spanning the middle filtration step.

    Expects phi = diag(p^(k-1), p^k) and N d_2 = d_1.
    """
    p = M.p
    if M.dim != 2:
        raise ShapeMismatch("expected a rank-two module")
    a, b = M.phi.rows[0][0], M.phi.rows[1][1]
    if M.phi.rows[0][1] or M.phi.rows[1][0] or b != a * p:
        raise ShapeMismatch("phi must be diag(p^(k-1), p^k)")
    if a <= 0 or a.denominator != 1 or a.numerator != p ** _ilog(a, p):
        raise ShapeMismatch("phi(d_1) must be a power of p with exponent >= 0")
    if M.N != QpMatrix([[0, 1], [0, 0]]):
        raise ShapeMismatch("N must send d_2 to d_1 and kill d_1")
    lines = [S for _, S in M.fil.steps if S.dim == 1]
    if len(lines) != 1:
        raise ShapeMismatch("expected exactly one one-dimensional filtration step")
    v = lines[0].basis[0]
    if v[1] == 0:
        raise LineIsD1("the middle filtration step is span(d_1); lambda is undefined")
    return PadicScalar(p, -v[0] / v[1])


def _ilog(a: Fraction, p: int) -> int:
    n, e = a.numerator, 0
    while n % p == 0:
        n //= p
        e += 1
    return e


# ---------------------------------------------------------------------------
# pipeline

def run_pipeline(inp: LInvariantInput, local_only: bool = False) -> LInvariantReport:
    """Full report; raises the first failing condition."""
    conds = check_conditions(inp)
    if conds.passed("valid") is False:
        raise InputError("invalid module: " + conds.checks["valid"][1])
    for name in ("C3", "admissible"):
        if conds.passed(name) is False:
            raise ConditionFailure(f"{name} fails: {conds.checks[name][1]}")
    filt = canonical_filtration(inp.M, inp.D)
    sqW, gr0, m1, w1, rw0, _ = _split(inp.M, inp.D, filt)
    if rw0 and not w1:
        raise DualizeFirst(LInvariantInput(*dual_submodule(inp.M, inp.D), inp.assert_c1c2))
    if conds.passed("C4") is False:
        raise C4Violation(conds.checks["C4"][1])
    if conds.passed("C5") is False:
        raise ConditionFailure("C5 fails: " + conds.checks["C5"][1])
    Wd = build_W(inp.M, inp.D, filt)
    L_loc = l_local(Wd) if Wd.r else PadicScalar(inp.M.p, 1)
    L_gl = L = None
    if Wd.s == 0:
        L_gl, L = PadicScalar(inp.M.p, 1), L_loc
    elif inp.global_subspace is not None and not local_only:
        L, L_gl = l_global(Wd, inp.global_subspace)
    E = interpolation_factor(inp.M, inp.D)
    return LInvariantReport(conds, filt, Wd.r, Wd.s, L_loc, L_gl, L, E, Wd)

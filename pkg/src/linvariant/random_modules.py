"""Random filtered (phi, N)-modules, admissible submodules, classes and sequences.

Modules are built from N-chains e, Ne, N^2 e, ... on which phi is diagonal
(phi N^i e = alpha p^-i N^i e), optionally plus 2x2 blocks without rational
eigenvalues, and then conjugated by a random invertible matrix.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .filtered_phin import FilteredPhiNModule, Filtration, direct_sum, validate
from .padic_linalg import QpMatrix, Subspace, kernel
from .st_cohomology import ShortExactSequence, StClass, st_differentials


def _rat(rng: random.Random, lo=-4, hi=4, nonzero=False) -> Fraction:
    while True:
        x = Fraction(rng.randint(lo, hi), rng.choice((1, 1, 1, 2, 3)))
        if x or not nonzero:
            return x


def random_invertible(rng: random.Random, n: int) -> QpMatrix:
    while True:
        P = QpMatrix([[_rat(rng, -3, 3) for _ in range(n)] for _ in range(n)], n)
        if n == 0 or P.det() != 0:
            return P


def _chain_block(p: int, alpha: Fraction, length: int) -> tuple[list, list]:
    """phi and N on the chain basis (N^(length-1) e, ..., N e, e)."""
    phi = [[Fraction(0)] * length for _ in range(length)]
    N = [[Fraction(0)] * length for _ in range(length)]
    for i in range(length):
        # basis vector i is N^(length-1-i) e
        phi[i][i] = alpha * Fraction(p) ** (-(length - 1 - i))
        if i + 1 < length:
            N[i][i + 1] = Fraction(1)
    return phi, N


def random_flag_filtration(rng: random.Random, n: int, basis=None, jumps_range=(-3, 3)) -> Filtration:
    """Random filtration: nested spans of the columns of ``basis`` at random jumps."""
    if n == 0:
        return Filtration(0, [])
    cols = basis if basis is not None else random_invertible(rng, n).columns()
    sizes = sorted(set(rng.randint(1, n) for _ in range(rng.randint(1, n))) | {n})
    jumps = sorted(rng.sample(range(jumps_range[0], jumps_range[1] + 1), len(sizes)), reverse=True)
    steps = [(j, Subspace.span(cols[:s], n)) for j, s in zip(jumps, sizes)]
    return Filtration(n, steps)


def random_module(rng: random.Random, p: int, max_dim: int = 4, eigen=None,
                  semisimple: bool = False) -> FilteredPhiNModule:
    """Random module of dimension 1..max_dim with invertible phi and compatible nilpotent N."""
    n = rng.randint(1, max_dim)
    eigen = eigen or [Fraction(1), Fraction(1, p), Fraction(p), Fraction(2), Fraction(-1),
                      Fraction(1, p * p), Fraction(3, 2)]
    blocks = []
    left = n
    while left:
        kind = rng.random()
        if left >= 2 and kind < 0.15:
            # companion block of x^2 - p (no rational root)
            a = _rat(rng, 1, 3, nonzero=True)
            blocks.append(([[0, p * a * a], [1, 0]], [[0, 0], [0, 0]]))
            left -= 2
            continue
        if not semisimple and left >= 2 and kind < 0.25:
            # N = 0 Jordan block
            a = rng.choice(eigen)
            blocks.append(([[a, 1], [0, a]], [[0, 0], [0, 0]]))
            left -= 2
            continue
        length = rng.randint(1, min(left, 3))
        blocks.append(_chain_block(p, rng.choice(eigen), length))
        left -= length
    phi = _blockdiag([b[0] for b in blocks], n)
    N = _blockdiag([b[1] for b in blocks], n)
    P = random_invertible(rng, n)
    Pi = P.inverse()
    M = FilteredPhiNModule(p, Pi @ phi @ P, Pi @ N @ P, random_flag_filtration(rng, n))
    assert validate(M).ok
    return M


def _blockdiag(blocks, n) -> QpMatrix:
    rows = [[Fraction(0)] * n for _ in range(n)]
    off = 0
    for B in blocks:
        k = len(B)
        for i in range(k):
            for j in range(k):
                rows[off + i][off + j] = Fraction(B[i][j])
        off += k
    return QpMatrix(rows, n)


def random_admissible(rng: random.Random, p: int, max_dim: int = 4,
                      eigen=None) -> tuple[FilteredPhiNModule, Subspace]:
    """A C3-compliant module (phi diagonalizable) together with an admissible D.

    D is a sum of chain tails, Fil^0 a random complement of D, and the other
    steps refine or extend Fil^0 at random.
    """
    eigen = eigen or [Fraction(1), Fraction(1, p), Fraction(1, p * p), Fraction(p), Fraction(2),
                      Fraction(1, 2)]
    n = rng.randint(1, max_dim)
    phi_blocks, N_blocks, tails = [], [], []
    off, left = 0, n
    while left:
        length = rng.randint(1, min(left, 2))
        ph, nn = _chain_block(p, rng.choice(eigen), length)
        phi_blocks.append(ph)
        N_blocks.append(nn)
        # chain tail of size t: the first t vectors (the N-images)
        t = rng.randint(0, length)
        tails.extend(off + i for i in range(t))
        off += length
        left -= length
    phi = _blockdiag(phi_blocks, n)
    N = _blockdiag(N_blocks, n)
    e = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    D = Subspace.span([e[i] for i in tails], n)
    # Fil^0: graph of a random map from a coordinate complement of D into D
    comp = [e[i] for i in range(n) if i not in tails]
    F0 = []
    for v in comp:
        w = list(v)
        for i in tails:
            w[i] = _rat(rng, -3, 3)
        F0.append(w)
    hi_sizes = sorted(set(rng.randint(0, len(F0)) for _ in range(2)) - {0, len(F0)}, reverse=True)
    steps = []
    if F0:
        steps.append((0, Subspace.span(F0, n)))
        for t, s in enumerate(hi_sizes):
            steps.append((t + 1 + rng.randint(0, 2), Subspace.span(F0[:s], n)))
    # below Fil^0: add D back in a couple of stages
    dvecs = [e[i] for i in tails]
    mid = rng.randint(0, len(dvecs))
    lvl = -1 - rng.randint(0, 2)
    if 0 < mid < len(dvecs):
        steps.append((lvl, Subspace.span(F0 + dvecs[:mid], n)))
        lvl -= 1 + rng.randint(0, 2)
    steps.append((lvl, Subspace.full(n)))
    # keep jumps strictly ordered by size
    steps = _monotone(steps)
    M = FilteredPhiNModule(p, phi, N, Filtration(n, steps))
    P = random_invertible(rng, n)
    Mc = M.conjugate(P)
    Dc = D.image_under(P.inverse())
    return Mc, Dc


def _monotone(steps):
    steps = sorted(steps, key=lambda t: t[0])
    out = []
    for j, s in steps:
        if out and s.dim > out[-1][1].dim:
            continue
        if out and s.dim == out[-1][1].dim:
            # equal steps: the higher jump wins
            out.pop()
        out.append((j, s))
    return out


def random_stclass(rng: random.Random, A: FilteredPhiNModule) -> StClass:
    """Random 1-cocycle of C_st(A)."""
    g, h, T = st_differentials(A)
    Z = kernel(h)
    n = T.dim + 2 * A.dim
    vec = [Fraction(0)] * n
    for b in Z.basis:
        c = _rat(rng)
        vec = [x + c * y for x, y in zip(vec, b)]
    return StClass.from_vector(A, vec)


def random_ses(rng: random.Random, p: int, max_dim: int = 4) -> ShortExactSequence:
    """0 -> A -> X -> X/A -> 0 with A a random phi,N-stable subspace of X."""
    while True:
        X = random_module(rng, p, max_dim)
        cands = _stable_subspaces(X)
        if cands:
            sub = rng.choice(cands)
            return ShortExactSequence.from_submodule(X, sub)


def _stable_subspaces(X: FilteredPhiNModule) -> list[Subspace]:
    n = X.dim
    out = [Subspace.zero(n), Subspace.full(n)]
    I = QpMatrix.identity(n)
    for lam in set(X.phi.rows[i][i] for i in range(n)) | {Fraction(1), Fraction(1, X.p), Fraction(2)}:
        for k in (1, 2):
            S = kernel((X.phi - I.scale(lam)) ** k)
            if 0 < S.dim < n and S.is_stable(X.N) and S not in out:
                out.append(S)
    K = kernel(X.N)
    if K.is_stable(X.phi) and K not in out:
        out.append(K)
    Im = X.N.image()
    if Im.is_stable(X.phi) and Im not in out:
        out.append(Im)
    return out


def direct_sum_input(*pairs):
    """Direct sum of (module, D) pairs."""
    M = direct_sum(*[m for m, _ in pairs])
    n = M.dim
    vecs, off = [], 0
    for m, D in pairs:
        for v in D.basis:
            w = [Fraction(0)] * n
            w[off:off + m.dim] = v
            vecs.append(w)
        off += m.dim
    return M, Subspace.span(vecs, n)

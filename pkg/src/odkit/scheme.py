"""Quasi-unbiased weighing matrices for ``(4^t, 2^t, 4^t, 1)`` and their scheme.

The members ``W_1 .. W_{2^t}`` are ``H (x) (phi(a_i a_1), ..., phi(a_i a_{2^t}))``
for a Sylvester Hadamard matrix ``H`` over GF(2^t), and the extra member is
``I (x) H``.  Vertices of the scheme are ordered ``(copy, x, member)`` with the
member index innermost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy

from .errors import BudgetExceeded, CertificationError, ShapeError
from .exact import IntMatrix, gram, identity, is_hadamard, kron, matmul, ones, sylvester, templated_tensor
from .rings import RingSpec, build_K
from .unbiased import QuwFamily, QuwParams, certify_quw_family

MAX_T = 3


@dataclass(frozen=True, eq=False)
class SchemeFamily:
    t: int
    indices: tuple[int, ...]  # 0-based; 2**t denotes I (x) H
    members: tuple[IntMatrix, ...]
    quw: QuwFamily

    @property
    def f(self) -> int:
        return len(self.indices)


def all_members(t: int, hadamard: IntMatrix | None = None) -> list[IntMatrix]:
    """``W_1, ..., W_{2^t}, I (x) H`` in element order (``a_1 = 0``).

    ``H`` defaults to the Sylvester matrix; any Hadamard matrix of order
    ``2^t`` may be supplied instead.
    """
    if not 1 <= t <= MAX_T:
        raise BudgetExceeded(f"t must lie in 1..{MAX_T}")
    H = sylvester(t) if hadamard is None else hadamard
    if H.shape != (2 ** t, 2 ** t) or not is_hadamard(H):
        raise ValueError(f"need a Hadamard matrix of order {2 ** t}")
    R = RingSpec.gf(2 ** t)
    els = R.elements()
    grid = build_K(R, els, els)
    mats = [templated_tensor(H, [K.to_dense() for K in row]) for row in grid]
    mats.append(kron(identity(2 ** t), H))
    return mats


def scheme_family(t: int, f: int | None = None, indices: Sequence[int] | None = None,
                  hadamard: IntMatrix | None = None) -> SchemeFamily:
    """The first ``f`` members, or the members at ``indices`` (0-based)."""
    n = 2 ** t
    if indices is None:
        if f is None or not 2 <= f <= n + 1:
            raise ValueError(f"need 2 <= f <= {n + 1}")
        indices = range(f)
    indices = tuple(int(i) for i in indices)
    if len(set(indices)) != len(indices) or any(not 0 <= i <= n for i in indices):
        raise ValueError("indices must be distinct members of 0..2^t")
    mats = all_members(t, hadamard)
    chosen = [mats[i] for i in indices]
    Q = certify_quw_family(chosen, QuwParams(n * n, n, n * n, 1))
    return SchemeFamily(t, indices, tuple(chosen), Q)


def is_bush_type(H: IntMatrix, n: int) -> bool:
    """Hadamard of order ``n^2`` with ``J`` diagonal blocks and zero-sum off blocks."""
    if H.shape != (n * n, n * n):
        raise ShapeError(f"expected order {n * n}")
    if not is_hadamard(H):
        return False
    B = H.reshape(n, n, n, n).transpose(0, 2, 1, 3)  # B[a, b] is block (a, b)
    for a in range(n):
        if not (B[a, a] == 1).all():
            return False
    off = ~np.eye(n, dtype=bool)
    rows = B.sum(axis=3)[off]
    cols = B.sum(axis=2)[off]
    return not rows.any() and not cols.any()


@dataclass(frozen=True)
class BlockSumReport:
    ok: bool
    detail: str = ""

    def __bool__(self):
        return self.ok


def block_row_sums(M: IntMatrix, n: int) -> BlockSumReport:
    """Every block row and block column of ``M`` (blocks of size ``n``) sums to ``n I``."""
    if M.shape != (n * n, n * n):
        raise ShapeError(f"expected order {n * n}")
    B = M.reshape(n, n, n, n).transpose(0, 2, 1, 3)
    target = n * identity(n)
    for k in range(n):
        if not np.array_equal(B[k].sum(axis=0), target):
            return BlockSumReport(False, f"block row {k} does not sum to {n}I")
        if not np.array_equal(B[:, k].sum(axis=0), target):
            return BlockSumReport(False, f"block column {k} does not sum to {n}I")
    return BlockSumReport(True)


def mutually_unbiased_bush(t: int) -> list[IntMatrix]:
    """The ``2^t - 1`` products ``W_1 W_j^T`` (``j >= 2``), certified Bush-type
    Hadamard and pairwise unbiased."""
    n = 2 ** t
    mats = all_members(t)
    Hs = [gram(mats[0], mats[j]) for j in range(1, n)]
    for j, H in enumerate(Hs):
        if not is_bush_type(H, n):
            raise CertificationError(f"W_1 W_{j + 2}^T is not Bush-type")
    for a, b in itertools.combinations(range(len(Hs)), 2):
        if not (np.abs(gram(Hs[a], Hs[b])) == n).all():
            raise CertificationError(f"products {a + 2} and {b + 2} are not unbiased")
    return Hs


# ---- maximality ---------------------------------------------------------------

def block_candidates(t: int) -> np.ndarray:
    """Vectors with exactly one ±1 in each block of length ``2^t``."""
    n = 2 ** t
    per_block = [np.eye(n, dtype=np.int64)[p] * s for p in range(n) for s in (1, -1)]
    return np.array([np.concatenate(c) for c in itertools.product(per_block, repeat=n)])


def weight_vectors(length: int, weight: int, cap: int = 200_000) -> np.ndarray:
    combos = list(itertools.combinations(range(length), weight))
    if len(combos) * 2 ** weight > cap:
        raise BudgetExceeded("too many weight-k vectors to enumerate")
    signs = np.array(list(itertools.product((1, -1), repeat=weight)), dtype=np.int64)
    out = np.zeros((len(combos) * len(signs), length), dtype=np.int64)
    r = 0
    for c in combos:
        out[r:r + len(signs), list(c)] = signs
        r += len(signs)
    return out


def _quasi_unbiased_to(W: IntMatrix, U: np.ndarray) -> np.ndarray:
    """Mask of rows ``u`` of ``U`` with ``W u`` a ±1 vector."""
    return (np.abs(matmul(U, W.T)) == 1).all(axis=1)


@dataclass(frozen=True)
class MaximalityResult:
    maximal: bool
    candidates: int
    counterexample: np.ndarray | None = None
    structure_forced: bool | None = None
    parity_ok: bool | None = None
    checks: dict = field(default_factory=dict)


def parity_pattern(t: int) -> np.ndarray:
    """Block pattern of ``W_1 + ... + W_{2^t+1}`` mod 2: first block row all
    ``J``; block row ``a > 0`` is ``J`` except zero blocks at columns 0 and ``a``."""
    n = 2 ** t
    P = np.ones((n, n), dtype=np.int64)
    for a in range(1, n):
        P[a, 0] = P[a, a] = 0
    return kron(P, ones(n))


def maximality_certificate(t: int, indices: Sequence[int] | None = None) -> MaximalityResult:
    """Search for a weight-``2^t`` vector quasi-unbiased to every chosen member.

    When ``I (x) H`` is among the members only vectors with one ±1 per block
    need testing (that reduction is itself re-derived by brute force over
    all weight-``2^t`` vectors), and the parity obstruction is checked on
    every candidate.  Otherwise all weight-``2^t`` vectors are tried.
    """
    if t > 2:
        raise BudgetExceeded("maximality search is capped at t = 2")
    n = 2 ** t
    mats = all_members(t)
    indices = tuple(range(n + 1)) if indices is None else tuple(indices)
    chosen = [mats[i] for i in indices]
    checks = {}
    if n in indices:
        U = block_candidates(t)
        allU = weight_vectors(n * n, n)
        forced = allU[_quasi_unbiased_to(mats[n], allU)]
        structure_forced = {tuple(r) for r in forced} == {tuple(r) for r in U}
        checks["structure_forced"] = structure_forced
        if len(indices) == n + 1:
            S = sum(mats) % 2
            pattern_ok = np.array_equal(S, parity_pattern(t))
            parity_ok = pattern_ok and not (matmul(U, S.T) % 2).any()
            checks["parity_pattern"] = pattern_ok
        else:
            parity_ok = None
    else:
        U = weight_vectors(n * n, n)
        structure_forced = parity_ok = None
    alive = np.ones(len(U), dtype=bool)
    for W in chosen:
        alive &= _quasi_unbiased_to(W, U)
    survivors = U[alive]
    cx = survivors[0] if len(survivors) else None
    return MaximalityResult(cx is None, len(U), cx, structure_forced, parity_ok, checks)


# ---- association scheme ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AssociationScheme:
    adjacency: tuple[IntMatrix, ...]
    p: np.ndarray  # p[i, j, k] with A_i A_j = sum_k p[i, j, k] A_k

    @property
    def nvertices(self) -> int:
        return self.adjacency[0].shape[0]

    @property
    def valencies(self) -> tuple[int, ...]:
        return tuple(int(A[0].sum()) for A in self.adjacency)

    @property
    def nclasses(self) -> int:
        return len(self.adjacency) - 1


def verify_scheme(As: Sequence[IntMatrix]) -> np.ndarray:
    """Check the symmetric scheme axioms exactly and return ``p[i, j, k]``."""
    V = As[0].shape[0]
    if not np.array_equal(As[0], identity(V)):
        raise CertificationError("A_0 is not the identity")
    if not np.array_equal(sum(As), ones(V)):
        raise CertificationError("adjacency matrices do not partition J")
    for i, A in enumerate(As):
        if not np.isin(A, (0, 1)).all() or not A.any():
            raise CertificationError(f"A_{i} is not a nonzero (0,1)-matrix")
        if not np.array_equal(A, A.T):
            raise CertificationError(f"A_{i} is not symmetric")
    d = len(As)
    reps = [tuple(np.argwhere(A)[0]) for A in As]
    p = np.zeros((d, d, d), dtype=np.int64)
    for i in range(d):
        for j in range(d):
            M = matmul(As[i], As[j])
            coeff = [int(M[reps[k]]) for k in range(d)]
            if not np.array_equal(M, sum(c * A for c, A in zip(coeff, As))):
                raise CertificationError(f"A_{i} A_{j} is not in the span")
            if min(coeff) < 0:
                raise CertificationError("negative intersection number")
            p[i, j] = coeff
    if not np.array_equal(p, p.transpose(1, 0, 2)):
        raise CertificationError("intersection numbers are not symmetric in i, j")
    return p


def build_scheme(F: SchemeFamily) -> AssociationScheme:
    """The six relations on two copies of ``f * 4^t`` vertices."""
    t, f = F.t, F.f
    n = 2 ** t
    V = f * n * n
    G = np.zeros((V, V), dtype=np.int64)
    for a, Wa in enumerate(F.members):
        for b, Wb in enumerate(F.members):
            G[a::f, b::f] = gram(Wa, Wb)
    N = G - n * identity(V)
    Np, Nm = (N == 1).astype(np.int64), (N == -1).astype(np.int64)
    if not np.array_equal(Np + Nm, kron(ones(n * n), ones(f) - identity(f))):
        raise CertificationError("N^+ + N^- != J (x) (J_f - I_f)")
    I, J = identity, ones
    X4 = kron(kron(J(n) - I(n), I(n)), I(f))
    X5 = kron(kron(J(n), J(n) - I(n)), I(f))
    As = (
        I(2 * V),
        kron(J(2) - I(2), I(V)),
        np.block([[Np, Nm], [Nm, Np]]),
        np.block([[Nm, Np], [Np, Nm]]),
        np.block([[X4, X4], [X4, X4]]),
        np.block([[X5, X5], [X5, X5]]),
    )
    return AssociationScheme(As, verify_scheme(As))


# ---- eigenmatrices -----------------------------------------------------------------

def _common_eigenvectors(Bs: list[sympy.Matrix], bounds: list[int]) -> list[sympy.Matrix]:
    d = Bs[0].shape[0]
    spaces = [sympy.eye(d)]
    for B, k in zip(Bs, bounds):
        refined = []
        for V in spaces:
            for theta in range(-k, k + 1):
                ns = ((B - theta * sympy.eye(d)) * V).nullspace()
                if ns:
                    refined.append(V * sympy.Matrix.hstack(*ns))
        spaces = refined
    if any(V.shape[1] != 1 for V in spaces) or len(spaces) != d:
        raise CertificationError("eigenspaces did not split into lines")
    return [V[:, 0] / V[0, 0] for V in spaces]


def _valency_row(P: sympy.Matrix) -> list:
    # every eigenvalue of A_j is at most k_j in modulus, so the valency row has the largest sum
    return list(P[max(range(P.shape[0]), key=lambda r: sum(P[r, :])), :])


def multiplicities(P: sympy.Matrix, nvertices: int) -> list:
    k = _valency_row(P)
    return [sympy.Rational(nvertices) / sum(P[r, j] ** 2 / k[j] for j in range(P.shape[1]))
            for r in range(P.shape[0])]


def canonical_row_order(P: sympy.Matrix, nvertices: int) -> list[int]:
    """Trivial character first, then descending multiplicity, then descending
    eigenvalue on ``A_2``, then the descending row itself."""
    m = multiplicities(P, nvertices)
    k = _valency_row(P)

    def key(r):
        row = list(P[r, :])
        return (row != k, -m[r], -P[r, 2], tuple(-x for x in row))

    return sorted(range(P.shape[0]), key=key)


@dataclass(frozen=True, eq=False)
class Eigenmatrices:
    P: sympy.Matrix
    Q: sympy.Matrix
    multiplicities: tuple


def eigenmatrices(S: AssociationScheme) -> Eigenmatrices:
    """Exact first and second eigenmatrices in canonical row order.

    Row ``r`` of ``P`` holds the eigenvalues of every ``A_j`` on one primitive
    idempotent; it is a common right eigenvector of the intersection matrices
    ``B_i[j, k] = p_ij^k`` normalised to start with 1.  ``Q = |X| P^{-1}``,
    and every idempotent ``E_j = Q[:, j] . A / |X|`` is checked exactly.
    """
    d = S.nclasses + 1
    Bs = [sympy.Matrix(S.p[i].tolist()) for i in range(d)]
    vecs = _common_eigenvectors(Bs, list(S.valencies))
    P = sympy.Matrix.hstack(*vecs).T
    for r in range(d):
        for i in range(d):
            if Bs[i] * P[r, :].T != P[r, i] * P[r, :].T:
                raise CertificationError("eigenvector check failed")
    order = canonical_row_order(P, S.nvertices)
    P = P.extract(order, list(range(d)))
    X = S.nvertices
    Q = X * P.inv()
    if P * Q != X * sympy.eye(d):
        raise CertificationError("P Q != |X| I")
    if any(not x.is_integer for x in list(P) + list(Q)):
        raise CertificationError("eigenmatrices are not integral")
    for j in range(d):
        E = sum(int(Q[i, j]) * S.adjacency[i] for i in range(d))  # |X| E_j
        if not np.array_equal(matmul(E, E), X * E):
            raise CertificationError(f"E_{j} is not idempotent")
    m = tuple(int(x) for x in multiplicities(P, X))
    return Eigenmatrices(P, Q, m)


def printed_eigenmatrices(t: int, f: int) -> tuple[sympy.Matrix, sympy.Matrix]:
    """The symbolic tables evaluated at ``(t, f)``, with the last two relation
    labels exchanged to match this module's ``A_4`` (valency ``2(2^t-1)``) and
    ``A_5`` (valency ``2^{t+1}(2^t-1)``)."""
    n = 2 ** t
    P = sympy.Matrix([
        [1, 1, (f - 1) * n * n, (f - 1) * n * n, 2 * n * (n - 1), 2 * (n - 1)],
        [1, 1, -n * n, -n * n, 2 * n * (n - 1), 2 * (n - 1)],
        [1, -1, -n, n, 0, 0],
        [1, -1, (f - 1) * n, -(f - 1) * n, 0, 0],
        [1, 1, 0, 0, -2 * n, 2 * (n - 1)],
        [1, 1, 0, 0, 0, -2],
    ])
    Q = sympy.Matrix([
        [1, f - 1, (f - 1) * n * n, n * n, f * (n - 1), f * n * (n - 1)],
        [1, f - 1, -(f - 1) * n * n, -n * n, f * (n - 1), f * n * (n - 1)],
        [1, -1, -n, n, 0, 0],
        [1, -1, n, -n, 0, 0],
        [1, f - 1, 0, 0, -f, 0],
        [1, f - 1, 0, 0, f * (n - 1), -f * n],
    ])
    swap = [0, 1, 2, 3, 5, 4]
    P = P.extract(list(range(6)), swap)
    Q = Q.extract(swap, list(range(6)))
    order = canonical_row_order(P, 2 * f * n * n)
    return P.extract(order, list(range(6))), Q.extract(list(range(6)), order)

"""Unbiased orthogonal designs and quasi-unbiased weighing matrices.

Every family object is built through a ``certify_*`` function which checks
each pair exactly and stores the pairwise witnesses, so holding a family
means holding its proof.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constructions import (
    H2,
    base_od,
    od_with_type,
    paley,
    goethals_seidel_pair,
    williamson,
    LatinSquare,
    are_suitable,
)
from .designs import OrthogonalDesign, certify_od, plug_in, od_direct_sum, od_kron
from .errors import BudgetExceeded, CertificationError, OdkitError, SearchError, ShapeError
from .exact import (
    IntMatrix,
    back_identity,
    gram,
    identity,
    is_weighing,
    kron,
    matmul,
    ones,
    sylvester,
    templated_tensor,
)
from .rings import RingSpec, build_K, is_unit


# ---- parameters and certificates -------------------------------------------

@dataclass(frozen=True)
class QuwParams:
    """Quasi-unbiased parameters ``(n, k, l, a)`` with ``l = k^2 / a``."""

    n: int
    k: int
    l: int
    a: int

    def __post_init__(self):
        if min(self.n, self.k, self.l, self.a) <= 0:
            raise ValueError("parameters must be positive")
        if self.l * self.a != self.k * self.k:
            raise ValueError(f"inconsistent parameters: l*a != k^2 for {self.astuple()}")
        if self.l > self.n:
            raise ValueError("l cannot exceed n")

    @property
    def scale(self) -> int:
        """``sqrt(a)``; raises if ``a`` is not a perfect square."""
        s = math.isqrt(self.a)
        if s * s != self.a:
            raise ValueError(f"a = {self.a} is not a perfect square")
        return s

    def astuple(self):
        return (self.n, self.k, self.l, self.a)


@dataclass(frozen=True)
class PairReport:
    ok: bool
    witness: IntMatrix | None = None
    alpha: int | None = None
    check: str = ""
    pair: tuple[int, int] | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def is_unbiased_pair(D1: OrthogonalDesign, D2: OrthogonalDesign) -> PairReport:
    """Decide whether ``D1 D2^T = (sum s x^2) / sqrt(alpha) * W``.

    Cross terms ``A_k B_l^T + A_l B_k^T`` must vanish; the diagonal terms
    must satisfy ``s_1 A_k B_k^T = s_k A_1 B_1^T``; the common magnitude ``g``
    of ``G = A_1 B_1^T`` gives ``alpha = s_1^2 / g^2``.
    """
    if D1.order != D2.order or D1.type != D2.type:
        raise ShapeError("designs differ in order or type")
    A, B, s = D1.coeffs, D2.coeffs, D1.type
    u = D1.nvars
    for k in range(u):
        for l in range(k + 1, u):
            if (gram(A[k], B[l]) + gram(A[l], B[k])).any():
                return PairReport(False, check="cross_terms", pair=(k, l),
                                  detail="A_k B_l^T + A_l B_k^T != 0")
    G = gram(A[0], B[0])
    for k in range(1, u):
        if not np.array_equal(s[0] * gram(A[k], B[k]), s[k] * G):
            return PairReport(False, check="proportional_terms", pair=(0, k),
                              detail="s_1 A_k B_k^T != s_k A_1 B_1^T")
    mags = np.unique(np.abs(G[G != 0]))
    if len(mags) != 1:
        return PairReport(False, check="magnitude", detail=f"G has entry magnitudes {mags.tolist()}")
    g = int(mags[0])
    if (s[0] * s[0]) % (g * g):
        return PairReport(False, check="alpha", detail=f"alpha = {s[0]}^2/{g}^2 is not an integer")
    alpha = (s[0] * s[0]) // (g * g)
    W = G // g
    if not is_weighing(W, alpha):
        return PairReport(False, check="witness", detail=f"witness is not W(n,{alpha})")
    return PairReport(True, witness=W, alpha=alpha)


def is_quasi_unbiased_pair(W1: IntMatrix, W2: IntMatrix, params: QuwParams,
                           check_members: bool = True) -> PairReport:
    """``W1 W2^T / sqrt(a)`` must be a weighing matrix of weight ``l``."""
    n, k = params.n, params.k
    for W in (W1, W2) if check_members else ():
        if W.shape != (n, n) or not is_weighing(W, k):
            return PairReport(False, check="members", detail=f"input is not W({n},{k})")
    s = params.scale
    P = gram(W1, W2)
    bad = (P != 0) & (np.abs(P) != s)
    if bad.any():
        r, c = map(int, np.argwhere(bad)[0])
        return PairReport(False, check="entries", detail=f"entry ({r},{c}) = {P[r, c]} not in {{0,±{s}}}")
    Wt = P // s
    if not is_weighing(Wt, params.l):
        return PairReport(False, check="witness", detail=f"witness is not W({n},{params.l})")
    return PairReport(True, witness=Wt)


def check_bounds(n: int, alpha: int, f: int) -> dict:
    """Evaluate the two upper bounds on the size of an unbiased family.

    The second bound is only meaningful when ``3 alpha - (n + 2) > 0``.
    """
    b1 = Fraction((n - 1) * (n + 2), 2) + 1
    d = 3 * alpha - (n + 2)
    b2 = Fraction(alpha * (n - 1), d) + 1 if d > 0 else None
    ok = f <= b1 and (b2 is None or f <= b2)
    return {"ok": ok, "bound1": b1, "bound2": b2, "f": f}


@dataclass(frozen=True, eq=False)
class UnbiasedFamily:
    members: tuple[OrthogonalDesign, ...]
    alpha: int
    witnesses: dict = field(repr=False)
    target_size: int
    excluded: tuple = ()

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def order(self) -> int:
        return self.members[0].order

    @property
    def type(self) -> tuple[int, ...]:
        return self.members[0].type


@dataclass(frozen=True, eq=False)
class QuwFamily:
    members: tuple[IntMatrix, ...]
    params: QuwParams
    witnesses: dict = field(repr=False)
    target_size: int | None = None

    @property
    def size(self) -> int:
        return len(self.members)


def certify_unbiased_family(members: Sequence[OrthogonalDesign], alpha: int | None = None,
                            target_size: int | None = None, excluded=()) -> UnbiasedFamily:
    """Verify every member and every pair; all pairs must share one ``alpha``."""
    members = tuple(members)
    if not members:
        raise CertificationError("empty family")
    for D in members:
        certify_od(D)
    wit = {}
    for i, j in itertools.combinations(range(len(members)), 2):
        rep = is_unbiased_pair(members[i], members[j])
        if not rep:
            raise CertificationError(f"members {i},{j} not unbiased: {rep.check} {rep.detail}")
        if alpha is None:
            alpha = rep.alpha
        if rep.alpha != alpha:
            raise CertificationError(f"members {i},{j} have alpha {rep.alpha}, expected {alpha}")
        if alpha == members[0].order and not is_weighing(rep.witness, alpha):
            raise CertificationError("alpha = n witness is not Hadamard")
        wit[(i, j)] = rep.witness
    if alpha is None:
        raise CertificationError("singleton family needs an explicit alpha")
    b = check_bounds(members[0].order, alpha, len(members))
    if not b["ok"]:
        raise CertificationError(f"family violates the size bounds: {b}")
    return UnbiasedFamily(members, int(alpha), wit,
                          len(members) if target_size is None else target_size, tuple(excluded))


def certify_quw_family(members: Sequence[IntMatrix], params: QuwParams,
                       target_size: int | None = None) -> QuwFamily:
    members = tuple(np.asarray(M, dtype=np.int64) for M in members)
    if not members:
        raise CertificationError("empty family")
    for M in members:
        if M.shape != (params.n, params.n) or not is_weighing(M, params.k):
            raise CertificationError(f"member is not W({params.n},{params.k})")
    wit = {}
    for i, j in itertools.combinations(range(len(members)), 2):
        rep = is_quasi_unbiased_pair(members[i], members[j], params, check_members=False)
        if not rep:
            raise CertificationError(f"members {i},{j} not quasi-unbiased: {rep.check} {rep.detail}")
        wit[(i, j)] = rep.witness
    return QuwFamily(members, params, wit, target_size)


# ---- family combinators ------------------------------------------------------

def subset_substitution(F: UnbiasedFamily, S: Sequence[int]) -> QuwFamily:
    """Set the variables in ``S`` (0-based) to 1 and the rest to 0."""
    S = sorted(set(S))
    if not S:
        raise ValueError("S must be nonempty")
    k = sum(F.type[v] for v in S)
    if (k * k) % F.alpha:
        raise CertificationError(f"k^2/alpha = {k * k}/{F.alpha} is not an integer")
    params = QuwParams(F.order, k, F.alpha, k * k // F.alpha)
    mats = [D.coeffs[S].sum(axis=0) for D in F.members]
    return certify_quw_family(mats, params, F.target_size)


def direct_sum_family(F: UnbiasedFamily, G: UnbiasedFamily) -> UnbiasedFamily:
    if F.size != G.size or F.type != G.type or F.alpha != G.alpha:
        raise ShapeError("families differ in size, type or alpha")
    return certify_unbiased_family([od_direct_sum(a, b) for a, b in zip(F.members, G.members)], F.alpha)


def tensor_family(F: UnbiasedFamily, Q: QuwFamily, mode: str = "fixed-W") -> UnbiasedFamily:
    """Tensor designs with quasi-unbiased weighing matrices.

    ``fixed-W``: ``D_i (x) W_1``, same ``alpha``.  ``fixed-D``:
    ``D_1 (x) W_i``, parameter ``l``.  ``paired``: ``D_i (x) W_i``, parameter
    ``l * alpha``.
    """
    k, l = Q.params.k, Q.params.l
    if mode == "fixed-W":
        mem, alpha = [od_kron(D, Q.members[0], k) for D in F.members], F.alpha
    elif mode == "fixed-D":
        mem, alpha = [od_kron(F.members[0], W, k) for W in Q.members], l
    elif mode == "paired":
        if F.size != Q.size:
            raise ShapeError("paired mode needs families of equal size")
        mem, alpha = [od_kron(D, W, k) for D, W in zip(F.members, Q.members)], l * F.alpha
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return certify_unbiased_family(mem, alpha)


def msls_family(D: OrthogonalDesign, W: IntMatrix, Ls: Sequence[LatinSquare]) -> UnbiasedFamily:
    """``f + 1`` mutually unbiased designs of order ``n^2`` from suitable squares.

    Every pairwise product is ``sigma / k`` times a (0,±1) matrix of weight
    ``k^2``, so the parameter is ``alpha = k^2`` for a weighing matrix of
    weight ``k`` (it is 1 only when ``k = 1``).

    With ``C_i = w_i d_i^T`` (columns of ``W`` and ``D``), square ``L`` gives
    the block matrix ``(C_{L[i,j]})``; the extra member has blocks
    ``w_j d_i^T``.
    """
    n = D.order
    if W.shape != (n, n) or any(L.order != n for L in Ls):
        raise ShapeError("D, W and the Latin squares must share one order")
    k = int(gram(W)[0, 0])
    if not is_weighing(W, k):
        raise CertificationError("W is not a weighing matrix")
    for a, b in itertools.combinations(Ls, 2):
        if not are_suitable(a, b):
            raise CertificationError("Latin squares are not mutually suitable")
    # C[v][i] = w_i (A_v[:, i])^T
    C = np.einsum("ri,vci->virc", W, D.coeffs)
    members = []
    for L in Ls:
        coeffs = np.zeros((D.nvars, n * n, n * n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                coeffs[:, i * n:(i + 1) * n, j * n:(j + 1) * n] = C[:, L.cells[i, j]]
        members.append(OrthogonalDesign(coeffs, tuple(k * s for s in D.type), D.labels))
    coeffs = np.zeros((D.nvars, n * n, n * n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            coeffs[:, i * n:(i + 1) * n, j * n:(j + 1) * n] = np.einsum("r,vc->vrc", W[:, j], D.coeffs[:, :, i])
    members.append(OrthogonalDesign(coeffs, tuple(k * s for s in D.type), D.labels))
    return certify_unbiased_family(members, k * k)


def quasi_unbiased_partner(H: IntMatrix, a: int) -> IntMatrix:
    """A Hadamard matrix ``H'`` with every entry of ``H H'^T`` equal to ``±sqrt(a)``.

    Backtracking over ±1 rows in lexicographic order; small orders only.
    """
    n = H.shape[0]
    if n > 16:
        raise BudgetExceeded("partner search is limited to order 16")
    s = math.isqrt(a)
    if s * s != a:
        raise ValueError("a must be a perfect square")
    vecs = np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int64)
    good = vecs[(np.abs(vecs @ H.T) == s).all(axis=1)]
    orth = (good @ good.T) == 0

    def extend(chosen, cands):
        if len(chosen) == n:
            return chosen
        for c in cands:
            found = extend(chosen + [c], [d for d in cands if d > c and orth[c, d]])
            if found:
                return found
        return None

    pick = extend([], list(range(len(good))))
    if pick is None:
        raise SearchError(f"no Hadamard partner with scale {s}")
    return good[pick]


def half_split_family(D: OrthogonalDesign, H1: IntMatrix, H2_: IntMatrix) -> UnbiasedFamily:
    """Two designs from halves of ``D`` and column halves of two quasi-unbiased Hadamard matrices."""
    if D.order % 4 or H1.shape != H2_.shape or H1.shape[0] % 4:
        raise ShapeError("need a design of order 4m and Hadamard matrices of order 4n")
    N = H1.shape[0]
    n = N // 4
    P = gram(H1, H2_)
    mags = np.unique(np.abs(P))
    if len(mags) != 1 or mags[0] == 0:
        raise CertificationError("H1, H2 are not quasi-unbiased Hadamard matrices")
    a = int(mags[0]) ** 2
    certify_quw_family([H1, H2_], QuwParams(N, N, N * N // a, a))
    if (16 * n * n) % a:
        raise CertificationError("alpha = 16 n^2 / a is not an integer")
    h = D.order // 2
    D1, D2 = D.coeffs[:, :h], D.coeffs[:, h:]
    members = []
    for H in (H1, H2_):
        X, Y = H[:, :N // 2], H[:, N // 2:]
        Pp, Pm = (X + Y) // 2, (X - Y) // 2
        coeffs = np.array([kron(Pp, A1) + kron(Pm, A2) for A1, A2 in zip(D1, D2)])
        members.append(OrthogonalDesign(coeffs, tuple(2 * n * s for s in D.type), D.labels))
    return certify_unbiased_family(members, 16 * n * n // a)


# ---- ring-based families ----------------------------------------------------

def grid_quw_family(W: IntMatrix, Kgrid) -> QuwFamily:
    """``W_i = W (x) (K_{i,1}, ..., K_{i,m})`` with parameters ``(nm, k, k^2, 1)``."""
    m = W.shape[0]
    k = int(gram(W)[0, 0])
    if not is_weighing(W, k) or len(Kgrid) != m:
        raise CertificationError("need W(m,k) and an m x m grid")
    mats = [templated_tensor(W, [K.to_dense() for K in row]) for row in Kgrid]
    n = Kgrid[0][0].size
    return certify_quw_family(mats, QuwParams(n * m, k, k * k, 1))


def block_screen(W: IntMatrix, m: int) -> bool:
    """Every row has at most one nonzero in each aligned group of ``m`` columns."""
    groups = (W != 0).reshape(W.shape[0], -1, m).sum(axis=2)
    return bool((groups <= 1).all())


def quw_to_unbiased_family(Q: QuwFamily, K: OrthogonalDesign, target_size: int | None = None) -> UnbiasedFamily:
    """``D_i = W_i (I_n (x) K)`` for the members passing the block screen."""
    m = K.order
    nm = Q.params.n
    if nm % m:
        raise ShapeError("design order must divide the weighing-matrix order")
    k = Q.params.k
    blocks = [kron(identity(nm // m), A) for A in K.coeffs]
    members, excluded = [], []
    for idx, W in enumerate(Q.members):
        if not block_screen(W, m):
            excluded.append((idx, "block screen"))
            continue
        coeffs = np.array([matmul(W, B) for B in blocks])
        if (np.abs(coeffs).sum(axis=0) > 1).any() or np.abs(coeffs).max() > 1:
            excluded.append((idx, "multi-variable entry"))
            continue
        members.append(OrthogonalDesign(coeffs, tuple(k * s for s in K.type), K.labels))
    if not members:
        raise CertificationError("every member failed the block screen")
    alpha = k * k
    if len(members) == 1:
        certify_od(members[0])
    return certify_unbiased_family(members, alpha, target_size or Q.size, excluded)


@dataclass(frozen=True, eq=False)
class RingFamilyResult:
    family: UnbiasedFamily
    quw: QuwFamily
    ring: RingSpec
    xs: tuple[int, ...]
    alphas: tuple[int, ...]
    block_order: str
    substituted: dict = field(default_factory=dict)


def perfect_shuffle(m: int, q: int) -> np.ndarray:
    """Index map sending position ``b*q + x`` to ``x*m + b``."""
    b, x = np.divmod(np.arange(m * q), q)
    return x * m + b


def shuffle_family(Q: QuwFamily, m: int) -> QuwFamily:
    """Conjugate every member by the perfect shuffle (Gram relations are preserved)."""
    pos = perfect_shuffle(m, Q.params.n // m)
    inv = np.argsort(pos)
    return certify_quw_family([W[inv][:, inv] for W in Q.members], Q.params, Q.target_size)


def _grid_choices(R: RingSpec, m: int):
    units = R.units()
    for xs in itertools.combinations(range(R.size), m):
        if all(units[R.add[a, R.neg[b]]] for a, b in itertools.combinations(xs, 2)):
            for al in itertools.combinations(range(R.size), m):
                yield xs, al


def ring_family(q: int, W: IntMatrix, K: OrthogonalDesign, subsets: Sequence[Sequence[int]] = (),
              ring: RingSpec | None = None, budget: int = 2000) -> RingFamilyResult:
    """``m`` mutually unbiased designs of order ``mq`` from W(m,k) and an OD of order m.

    Unit-difference elements ``xs`` and multipliers ``alphas`` are chosen in
    lexicographic order, each tried in the native block order
    ``W (x) (K_i1, ..., K_im)`` and then conjugated by the perfect shuffle,
    until every member passes the block screen.  If the budget runs out the
    best choice is used and the shortfall is recorded on the family.
    """
    m = W.shape[0]
    if K.order != m:
        raise ShapeError("K must have the order of W")
    R = ring if ring is not None else RingSpec.gf(q)
    if m > R.size:
        raise ValueError("need m <= q")
    best = None
    for trial, (xs, al) in enumerate(_grid_choices(R, m)):
        if trial >= budget:
            break
        grid = build_K(R, [R.at(x) for x in xs], [R.at(a) for a in al])
        Q = grid_quw_family(W, grid)
        for order in ("native", "shuffled"):
            if order == "shuffled":
                if m == R.size:
                    break
                Q = shuffle_family(Q, m)
            passing = sum(block_screen(Wi, m) for Wi in Q.members)
            if best is None or passing > best[0]:
                best = (passing, xs, al, Q, order)
            if passing == m:
                break
        if best[0] == m:
            break
    if best is None:
        raise SearchError("no unit-difference family of the requested size")
    _, xs, al, Q, order = best
    fam = quw_to_unbiased_family(Q, K, target_size=m)
    subs = {tuple(sorted(S)): subset_substitution(fam, S) for S in subsets}
    return RingFamilyResult(fam, Q, R, tuple(xs), tuple(al), order, subs)


# ---- plug-in families --------------------------------------------------------

def plug_in_family(F: UnbiasedFamily, Bs: Sequence[IntMatrix]) -> QuwFamily:
    """Plug the same matrices into every member; certifies the quasi-unbiased outcome."""
    mats = [plug_in(D, Bs) for D in F.members]
    n = mats[0].shape[0]
    k = int(gram(mats[0])[0, 0])
    P = gram(mats[0], mats[1]) if len(mats) > 1 else None
    if P is None:
        raise CertificationError("plug-in family needs at least two members")
    s = int(np.abs(P[P != 0]).min())
    a = s * s
    params = QuwParams(n, k, k * k // a, a)
    return certify_quw_family(mats, params, F.target_size)


def paley_plug_matrices(q: int) -> tuple[list[IntMatrix], str]:
    """``J, J-2I, (P+I)R`` for ``q = 3 mod 4``; ``J, J-2I, P+I, P-I`` for ``q = 1 mod 4``."""
    P = paley(q)
    J, I = ones(q), identity(q)
    if q % 4 == 3:
        return [J, J - 2 * I, matmul(P + I, back_identity(q))], "3"
    return [J, J - 2 * I, P + I, P - I], "1"


def asymptotic_type(q: int, t: int | None = None, max_t: int = 6) -> tuple[int, tuple[int, ...]]:
    """Smallest ``t`` (or the given one) and lexicographically least positive type.

    ``q = 3 mod 4``: ``qa + (q-4)b - c = 0`` with ``a + b + c = 2^t``.
    ``q = 1 mod 4``: ``qa + (q-4)b - 2c = 0`` with ``a + b + 2c = 2^t``, type ``(a,b,c,c)``.
    """
    ts = [t] if t is not None else range(1, max_t + 1)
    for tt in ts:
        n = 2 ** tt
        for a in range(1, n):
            for b in range(1, n):
                if q % 4 == 3:
                    c = n - a - b
                    if c > 0 and q * a + (q - 4) * b - c == 0:
                        return tt, (a, b, c)
                else:
                    if (n - a - b) % 2 == 0 and n - a - b > 0:
                        c = (n - a - b) // 2
                        if q * a + (q - 4) * b - 2 * c == 0:
                            return tt, (a, b, c, c)
    raise SearchError(f"no suitable type for q={q} with t <= {max(ts)}")


def plug_matrices_for_type(q: int, type_: Sequence[int]) -> list[IntMatrix]:
    """Paley-based matrices aligned with ``type_``; zero parts are dropped together."""
    Bs, _ = paley_plug_matrices(q)
    if len(type_) != len(Bs):
        raise ShapeError(f"q={q} needs a {len(Bs)}-part type")
    return [B for B, s in zip(Bs, type_) if s]


def asymptotic_pipeline(q: int, t: int | None = None, type_: Sequence[int] | None = None) -> QuwFamily:
    """``2^t`` quasi-unbiased Hadamard matrices ``(2^{2t} q, 2^{2t} q, 2^{2t}, 2^{2t} q^2)``."""
    if q < 3 or not all(q % d for d in range(2, int(q ** 0.5) + 1)):
        raise ValueError("q must be an odd prime")
    if type_ is None:
        t, type_ = asymptotic_type(q, t)
    elif t is None:
        raise ValueError("an explicit type needs an explicit t")
    n = 2 ** t
    if sum(type_) != n:
        raise ValueError(f"type must sum to {n}")
    Bs = plug_matrices_for_type(q, type_)
    K = od_with_type(t, type_)
    res = ring_family(n, sylvester(t), K)
    Qf = plug_in_family(res.family, Bs)
    expect = QuwParams(n * n * q, n * n * q, n * n, n * n * q * q)
    if Qf.params != expect:
        raise CertificationError(f"pipeline produced {Qf.params}, expected {expect}")
    return Qf


def gs_plugin_family(p: int, max_q: int = 31) -> QuwFamily:
    """Goethals-Seidel pair into two unbiased OD(4;2,2): QUW(4q, 4q-2, 4, (2q-1)^2)."""
    R, S = goethals_seidel_pair(p, max_q)
    res = ring_family(2, H2, base_od(1))
    return plug_in_family(res.family, [R, S])


def williamson_plugin_family(n: int, max_n: int = 15) -> QuwFamily:
    """Williamson quadruple into four unbiased OD(16;4,4,4,4): (16n, 16n, 16, 16n^2)."""
    quad = williamson(n, max_n)
    res = ring_family(4, sylvester(2), base_od(2))
    return plug_in_family(res.family, list(quad))

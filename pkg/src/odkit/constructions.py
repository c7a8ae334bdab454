"""Catalog of base designs and named matrices, plus order-doubling templates.

Everything here is a generator; the returned objects are always passed
through the matching verifier before they leave the function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .designs import (
    OrthogonalDesign,
    certify_od,
    left_multiply,
    merge_groups,
    od_kron,
    substitute,
)
from .errors import BudgetExceeded, CertificationError, SearchError, ShapeError
from .exact import (
    IntMatrix,
    circulant,
    direct_sum,
    gram,
    identity,
    is_weighing,
    kron,
    matmul,
)
from .rings import RingSpec, factor_prime_power

H2 = np.array([[1, 1], [1, -1]], dtype=np.int64)

_BASE_ENTRIES = {
    1: [[1, 2],
        [-2, 1]],
    2: [[1, 2, 3, 4],
        [-2, 1, 4, -3],
        [-3, -4, 1, 2],
        [-4, 3, -2, 1]],
    3: [[1, 2, 3, 4, 5, 6, 7, 8],
        [-2, 1, 4, -3, 6, -5, 8, -7],
        [-3, -4, 1, 2, -7, 8, 5, -6],
        [-4, 3, -2, 1, 8, 7, -6, -5],
        [-5, -6, 7, -8, 1, 2, -3, 4],
        [-6, 5, -8, -7, -2, 1, 4, 3],
        [-7, -8, -5, 6, 3, -4, 1, 2],
        [-8, 7, 6, 5, -4, -3, -2, 1]],
}


def base_od(t: int) -> OrthogonalDesign:
    """The explicit full designs of order 2, 4 and 8 with all weights 1."""
    if t not in _BASE_ENTRIES:
        raise ValueError("base designs exist for t = 1, 2, 3")
    return certify_od(OrthogonalDesign.from_entries(np.array(_BASE_ENTRIES[t])))


def subset_sums(type_: Sequence[int]) -> set[int]:
    sums = {0}
    for s in type_:
        sums |= {x + s for x in sums}
    sums.discard(0)
    return sums


def subset_with_sum(type_: Sequence[int], k: int) -> list[int] | None:
    """Indices of a subset of ``type_`` summing to ``k`` (first found by DP)."""
    reach = {0: []}
    for i, s in enumerate(type_):
        for total, idx in list(reach.items()):
            if total + s not in reach:
                reach[total + s] = idx + [i]
    return reach.get(k)


# ---- doubling templates ------------------------------------------------------

def normalize_to_identity(D: OrthogonalDesign, v: int) -> OrthogonalDesign:
    """Left-multiply by ``A_v^T`` so that weight-1 variable ``v`` has matrix ``I``."""
    if D.type[v] != 1 or D.order != D.coeffs.shape[1] or (np.abs(D.coeffs[v]).sum() != D.order):
        raise ValueError("normalization needs a weight-1 variable of a square design")
    return certify_od(left_multiply(D.coeffs[v].T, D))


def _commutes(D_terms, Dp_terms) -> bool:
    """Symbolic ``D D' == D' D`` for linear forms given as (variable, matrix) lists."""
    acc: dict[tuple, np.ndarray] = {}
    for (a, A), (b, B) in itertools.product(D_terms, Dp_terms):
        key = tuple(sorted((a, b)))
        acc[key] = acc.get(key, 0) + matmul(A, B) - matmul(B, A)
    return all(not np.any(M) for M in acc.values())


def double_t1(D: OrthogonalDesign, fresh: Sequence[int]) -> OrthogonalDesign:
    """``[[D, D'], [-D'^T, D^T]]`` where ``D'`` renames the ``fresh`` variables.

    Valid when ``D`` and ``D'`` commute as matrices over the commuting
    indeterminates; this is checked before the output is built.
    """
    fresh = sorted(set(fresh))
    if not fresh or any(not 0 <= v < D.nvars for v in fresh):
        raise ValueError("fresh must name at least one existing variable")
    u = D.nvars
    d_terms = [(v, D.coeffs[v]) for v in range(u)]
    dp_terms = [(v if v not in fresh else u + fresh.index(v), D.coeffs[v]) for v in range(u)]
    if not _commutes(d_terms, dp_terms):
        raise SearchError("T1 side condition fails: D and its mate do not commute")
    n = D.order
    Z = np.zeros((n, n), dtype=np.int64)
    coeffs, typ, labels = [], [], []
    for v in range(u):
        C = D.coeffs[v]
        Cp = Z if v in fresh else C
        coeffs.append(np.block([[C, Cp], [-Cp.T, C.T]]))
        typ.append(D.type[v] if v in fresh else 2 * D.type[v])
        labels.append(D.labels[v])
    for v in fresh:
        C = D.coeffs[v]
        coeffs.append(np.block([[Z, C], [-C.T, Z]]))
        typ.append(D.type[v])
        labels.append(D.labels[v] + "'")
    return certify_od(OrthogonalDesign(np.array(coeffs), tuple(typ), tuple(labels)))


def double_t2(D: OrthogonalDesign) -> OrthogonalDesign:
    """``D (x) H_2``; every weight doubles."""
    return certify_od(od_kron(D, H2, 2))


def double_t3(D: OrthogonalDesign) -> OrthogonalDesign:
    """Border ``[[yI, D], [D^T, -yI]]`` adding a weight-1 variable ``y`` in front."""
    n = D.order
    I, Z = identity(n), np.zeros((n, n), dtype=np.int64)
    coeffs = [np.block([[I, Z], [Z, -I]])]
    coeffs += [np.block([[Z, A], [A.T, Z]]) for A in D.coeffs]
    return certify_od(OrthogonalDesign(np.array(coeffs), (1,) + D.type, ("y",) + D.labels))


def double(D: OrthogonalDesign, template: str, fresh: Sequence[int] | None = None,
           budget: int = 10_000) -> OrthogonalDesign:
    """Apply a doubling template; T1 searches for a mate within ``budget`` trials.

    With ``fresh`` given, T1 tries that renaming against ``D`` and against
    each normalization making a weight-1 variable the identity.  Without it,
    every nonempty renaming set is tried, smallest first.
    """
    if template == "T2":
        return double_t2(D)
    if template == "T3":
        return double_t3(D)
    if template != "T1":
        raise ValueError(f"unknown template {template!r}")
    bases = [D] + [normalize_to_identity(D, v) for v in range(D.nvars)
                   if D.type[v] == 1 and np.abs(D.coeffs[v]).sum() == D.order]
    if fresh is not None:
        choices = [tuple(fresh)]
    else:
        choices = [c for r in range(1, D.nvars + 1) for c in itertools.combinations(range(D.nvars), r)]
    trials = 0
    for base in bases:
        for fr in choices:
            trials += 1
            if trials > budget:
                raise BudgetExceeded("T1 mate search exceeded its budget")
            try:
                return double_t1(base, fr)
            except SearchError:
                continue
    raise SearchError(f"T1 found no commuting mate for {D!r} (fresh={fresh}) after {trials} trials")


def _sorted_by_weight(D: OrthogonalDesign) -> OrthogonalDesign:
    order = sorted(range(D.nvars), key=lambda v: D.type[v])
    return OrthogonalDesign(D.coeffs[order], tuple(D.type[v] for v in order),
                            tuple(f"x{i + 1}" for i in range(D.nvars)))


def full_od_power2(t: int, max_t: int = 5) -> OrthogonalDesign:
    """A full design of order ``2**t`` whose subset sums cover ``1..2**t``.

    ``t <= 3`` returns the explicit designs.  Larger ``t`` applies T1 with the
    identity variable renamed, which maps type ``(1, s_2, ...)`` to
    ``(1, 1, 2 s_2, ...)``; weights are then listed in ascending order.
    """
    if t < 1:
        raise ValueError("t must be positive")
    if t <= 3:
        return base_od(t)
    if t > max_t:
        raise BudgetExceeded(f"full designs are only built up to t = {max_t}")
    D = base_od(3)
    for _ in range(3, t):
        D = _sorted_by_weight(double_t1(normalize_to_identity(D, 0), (0,)))
    if sum(D.type) != 2 ** t or subset_sums(D.type) != set(range(1, 2 ** t + 1)):
        raise CertificationError("doubled design lost the subset-sum property")
    return D


def partition_type(type_: Sequence[int], parts: Sequence[int]) -> list[list[int]] | None:
    """Split variable indices into groups whose weights sum to ``parts``.

    Greedy first (largest weight into the group with the largest remaining
    need), then exhaustive backtracking.
    """
    idx = sorted(range(len(type_)), key=lambda v: -type_[v])
    need = list(parts)
    groups: list[list[int]] = [[] for _ in parts]
    for v in idx:
        fits = [g for g in range(len(parts)) if need[g] >= type_[v]]
        if not fits:
            break
        g = max(fits, key=lambda g: (need[g], -g))
        groups[g].append(v)
        need[g] -= type_[v]
    else:
        if not any(need):
            return [sorted(g) for g in groups]

    need = list(parts)
    groups = [[] for _ in parts]

    def place(k):
        if k == len(idx):
            return not any(need)
        v = idx[k]
        for g in range(len(parts)):
            if need[g] >= type_[v]:
                need[g] -= type_[v]
                groups[g].append(v)
                if place(k + 1):
                    return True
                groups[g].pop()
                need[g] += type_[v]
        return False

    return [sorted(g) for g in groups] if place(0) else None


def od_with_type(t: int, parts: Sequence[int]) -> OrthogonalDesign:
    """A full design of order ``2**t`` and the given type, by merging variables.

    Zero parts are dropped (so ``(a, 0, c)`` yields a two-variable design).
    """
    parts = [int(p) for p in parts if p]
    if sum(parts) != 2 ** t or any(p < 0 for p in parts):
        raise ValueError(f"parts must be nonnegative and sum to {2 ** t}")
    D = full_od_power2(t)
    groups = partition_type(D.type, parts)
    if groups is None:
        raise SearchError(f"type {D.type} cannot be merged into {tuple(parts)}")
    return merge_groups(D, groups)


def weighing_power2(t: int, k: int) -> IntMatrix:
    """A weighing matrix ``W(2**t, k)``.

    Substitution into :func:`full_od_power2`; if that design is unavailable,
    falls back on direct sums and tensor products of smaller ones.
    """
    n = 2 ** t
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= 2**t")
    try:
        D = full_od_power2(t)
    except (BudgetExceeded, SearchError):
        D = None
    if D is not None:
        S = subset_with_sum(D.type, k)
        if S is not None:
            return substitute(D, {v: int(v in S) for v in range(D.nvars)})
    half = n // 2
    if k <= half:
        W = weighing_power2(t - 1, k)
        M = direct_sum(W, W)
    elif k % 2 == 0:
        M = kron(weighing_power2(t - 1, k // 2), H2)
    else:
        raise SearchError(f"no composite route to W({n},{k})")
    if not is_weighing(M, k):
        raise CertificationError("composite weighing matrix failed verification")
    return M


# ---- Paley, Goethals-Seidel, Williamson --------------------------------------

def quadratic_character(R: RingSpec) -> np.ndarray:
    """``chi[x]`` for every element index: 0 at zero, 1 on squares, -1 otherwise."""
    sq = {int(R.mul[x, x]) for x in range(1, R.size)}
    chi = np.array([0] + [1 if x in sq else -1 for x in range(1, R.size)], dtype=np.int64)
    return chi


def paley(q: int) -> IntMatrix:
    """Paley matrix with ``P[i, j] = chi(a_j - a_i)`` over GF(q), ``q`` odd."""
    p, _ = factor_prime_power(q)
    if p == 2:
        raise ValueError("Paley matrices need odd q")
    R = RingSpec.gf(q)
    chi = quadratic_character(R)
    P = chi[R.add[R.neg][:, :q]]  # R.add[neg[i], j] is a_j - a_i
    J, I = np.ones((q, q), dtype=np.int64), identity(q)
    if not np.array_equal(gram(P), q * I - J):
        raise CertificationError("Paley matrix fails P P^T = qI - J")
    return P


def periodic_autocorrelation(row: np.ndarray) -> np.ndarray:
    """``PAF[s] = sum_i row[i] row[i+s]`` for ``s = 1 .. n-1``."""
    return np.array([int(np.dot(row, np.roll(row, -s))) for s in range(1, len(row))], dtype=np.int64)


def symmetric_rows(n: int, zero_diagonal: bool = False, lead: int | None = None):
    """First rows of symmetric circulant (0,)±1 matrices, in lexicographic order
    with ``-1 < +1`` on the free positions ``0 .. n//2``."""
    free = list(range(1 if zero_diagonal else 0, n // 2 + 1))
    for signs in itertools.product((-1, 1), repeat=len(free)):
        row = np.zeros(n, dtype=np.int64)
        for pos, s in zip(free, signs):
            row[pos] = s
            row[-pos % n] = s
        if lead is not None and not zero_diagonal and row[0] != lead:
            continue
        yield row


def goethals_seidel_pair(p: int, max_q: int = 31) -> tuple[IntMatrix, IntMatrix]:
    """Symmetric circulants ``R`` (zero diagonal) and ``S`` with ``RR^T + SS^T = pI``.

    Order ``q = (p+1)/2``; exhaustive meet-in-the-middle on periodic
    autocorrelations, lexicographically least ``R`` then ``S``.
    """
    factor_prime_power(p)
    if p % 4 != 1:
        raise ValueError("p must be a prime power congruent to 1 mod 4")
    q = (p + 1) // 2
    if q > max_q:
        raise BudgetExceeded(f"order {q} exceeds search cap {max_q}")
    table: dict[bytes, np.ndarray] = {}
    for s in symmetric_rows(q):
        table.setdefault(periodic_autocorrelation(s).tobytes(), s)
    for r in symmetric_rows(q, zero_diagonal=True):
        s = table.get((-periodic_autocorrelation(r)).tobytes())
        if s is not None:
            R, S = circulant(r), circulant(s)
            if not np.array_equal(gram(R) + gram(S), p * identity(q)):
                raise CertificationError("Goethals-Seidel pair failed the Gram identity")
            return R, S
    raise SearchError(f"no Goethals-Seidel pair of order {q} found (anomalous)")


def williamson(n: int, max_n: int = 15) -> tuple[IntMatrix, IntMatrix, IntMatrix, IntMatrix]:
    """Four symmetric ±1 circulants with ``A^2 + B^2 + C^2 + D^2 = 4n I``."""
    if n < 1:
        raise ValueError("order must be positive")
    if n > max_n:
        raise BudgetExceeded(f"order {n} exceeds search cap {max_n}")
    rows = list(symmetric_rows(n, lead=1))
    pafs = [periodic_autocorrelation(r) for r in rows]
    pairs: dict[bytes, tuple[int, int]] = {}
    for i in range(len(rows)):
        for j in range(i, len(rows)):
            pairs.setdefault((pafs[i] + pafs[j]).tobytes(), (i, j))
    for i in range(len(rows)):
        for j in range(i, len(rows)):
            hit = pairs.get((-(pafs[i] + pafs[j])).tobytes())
            if hit is not None:
                quad = tuple(circulant(rows[k]) for k in (i, j) + hit)
                total = sum(matmul(M, M) for M in quad)
                if not np.array_equal(total, 4 * n * identity(n)):
                    raise CertificationError("Williamson quadruple failed verification")
                return quad
    raise SearchError(f"no Williamson quadruple of order {n} found")


# ---- Latin squares -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatinSquare:
    """Latin square on symbols ``0 .. n-1`` (printed 1-based)."""

    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.int64)
        n = c.shape[0]
        if c.shape != (n, n):
            raise ShapeError("Latin square must be square")
        full = np.arange(n)
        if not all(np.array_equal(np.sort(c[i]), full) and np.array_equal(np.sort(c[:, i]), full)
                   for i in range(n)):
            raise ValueError("not a Latin square")
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def order(self) -> int:
        return self.cells.shape[0]


def are_orthogonal(L1: LatinSquare, L2: LatinSquare) -> bool:
    n = L1.order
    return len(set(zip(L1.cells.ravel().tolist(), L2.cells.ravel().tolist()))) == n * n


def are_suitable(L1: LatinSquare, L2: LatinSquare) -> bool:
    """Every row of ``L1`` agrees with every row of ``L2`` in exactly one cell."""
    agree = (L1.cells[:, None, :] == L2.cells[None, :, :]).sum(axis=2)
    return bool((agree == 1).all())


def mols(q: int, f: int) -> list[LatinSquare]:
    """``L_k(i, j) = a_k a_i + a_j`` over GF(q) for the first ``f`` nonzero ``a_k``."""
    if not 1 <= f <= q - 1:
        raise ValueError("need 1 <= f <= q - 1")
    R = RingSpec.gf(q)
    out = []
    for k in range(1, f + 1):
        cells = np.array([[R.add[R.mul[k, i], j] for j in range(q)] for i in range(q)])
        out.append(LatinSquare(cells))
    return out


def rows_to_symbols(L: LatinSquare) -> LatinSquare:
    """The square ``S`` with ``S[s, c] = r`` whenever ``L[r, c] = s``."""
    n = L.order
    S = np.empty((n, n), dtype=np.int64)
    for r in range(n):
        for c in range(n):
            S[L.cells[r, c], c] = r
    return LatinSquare(S)


def msls(q: int, f: int, budget: int = 10_000) -> list[LatinSquare]:
    """``f`` mutually suitable Latin squares of order ``q``.

    Each square of :func:`mols` is transformed by :func:`rows_to_symbols`;
    orthogonality of two squares becomes suitability of their transforms.
    If certification ever fails, symbol permutations are searched.
    """
    Ls = [rows_to_symbols(L) for L in mols(q, f)]

    def ok(sq):
        return all(are_suitable(a, b) for a, b in itertools.combinations(sq, 2))

    if ok(Ls):
        return Ls
    trials = 0
    for k in range(1, len(Ls)):
        for perm in itertools.permutations(range(q)):
            trials += 1
            if trials > budget:
                raise BudgetExceeded("MSLS symbol-permutation search exceeded its budget")
            cand = LatinSquare(np.array(perm)[Ls[k].cells])
            if all(are_suitable(Ls[i], cand) for i in range(k)):
                Ls[k] = cand
                break
        else:
            raise SearchError("no suitable symbol permutation found")
    return Ls


__all__ = [
    "H2", "base_od", "subset_sums", "subset_with_sum", "normalize_to_identity",
    "double", "double_t1", "double_t2", "double_t3", "full_od_power2",
    "partition_type", "od_with_type", "weighing_power2", "quadratic_character",
    "paley", "periodic_autocorrelation", "goethals_seidel_pair", "williamson",
    "LatinSquare", "are_orthogonal", "are_suitable", "mols", "rows_to_symbols", "msls",
]

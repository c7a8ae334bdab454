"""Unit weighing matrices and unit orthogonal designs over roots of unity.

Every entry is ``0`` or ``zeta_m^j`` for a fixed modulus ``m``; matrices are
stored as an exponent array plus a support mask.  Products are formed as
exponent counts in ``Z[x]/(x^m - 1)`` and reduced modulo the ``m``-th
cyclotomic polynomial, so every test is exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .designs import ODReport, OrthogonalDesign
from .errors import CertificationError, SearchError, ShapeError
from .exact import IntMatrix, MonomialMatrix
from .rings import RingSpec, build_K, factor_prime_power

# ---- cyclotomic arithmetic ---------------------------------------------------


def _poly_divexact(a: list[int], b: list[int]) -> list[int]:
    """Exact quotient of integer polynomials (low degree first, ``b`` monic)."""
    a = list(a)
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1]
        q[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    if any(a):
        raise ArithmeticError("division is not exact")
    return q


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients of the ``m``-th cyclotomic polynomial, constant term first."""
    if m < 1:
        raise ValueError("m must be positive")
    p = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            p = _poly_divexact(p, list(cyclotomic_poly(d)))
    return tuple(p)


@lru_cache(maxsize=None)
def reduction_matrix(m: int) -> np.ndarray:
    """Row ``j`` holds ``x^j mod Phi_m`` in the basis ``1, x, ..., x^(phi(m)-1)``."""
    f = cyclotomic_poly(m)
    d = len(f) - 1
    R = np.zeros((m, d), dtype=np.int64)
    cur = np.zeros(d, dtype=np.int64)
    cur[0] = 1
    for j in range(m):
        R[j] = cur
        top = cur[-1]
        cur = np.concatenate(([0], cur[:-1])) - top * np.array(f[:-1], dtype=np.int64)
    R.setflags(write=False)
    return R


@dataclass(frozen=True)
class CycloInt:
    """``sum_j coeffs[j] zeta_m^j``; equality is decided after reduction mod ``Phi_m``."""

    modulus: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.modulus:
            raise ShapeError("need one coefficient per exponent")

    @classmethod
    def root(cls, m: int, j: int = 0, g: int = 1) -> "CycloInt":
        c = [0] * m
        c[j % m] = g
        return cls(m, tuple(c))

    @classmethod
    def integer(cls, m: int, g: int) -> "CycloInt":
        return cls.root(m, 0, g)

    def reduced(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.array(self.coeffs, dtype=np.int64) @ reduction_matrix(self.modulus))

    def is_zero(self) -> bool:
        return not any(self.reduced())

    def _check(self, other: "CycloInt"):
        if not isinstance(other, CycloInt) or other.modulus != self.modulus:
            raise ShapeError("moduli differ; rescale first")

    def __add__(self, other):
        self._check(other)
        return CycloInt(self.modulus, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return CycloInt(self.modulus, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        m = self.modulus
        out = [0] * m
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[(i + j) % m] += a * b
        return CycloInt(m, tuple(out))

    def conj(self) -> "CycloInt":
        m = self.modulus
        out = [0] * m
        for j, a in enumerate(self.coeffs):
            out[-j % m] += a
        return CycloInt(m, tuple(out))

    def rescale(self, M: int) -> "CycloInt":
        """The same number written with modulus ``M`` (a multiple of ``m``)."""
        if M % self.modulus:
            raise ValueError("new modulus must be a multiple")
        out = [0] * M
        for j, a in enumerate(self.coeffs):
            out[j * (M // self.modulus)] += a
        return CycloInt(M, tuple(out))

    def __eq__(self, other):
        if not isinstance(other, CycloInt):
            return NotImplemented
        M = math.lcm(self.modulus, other.modulus)
        return (self.rescale(M) - other.rescale(M)).is_zero()

    def __hash__(self):
        return hash((self.modulus, self.reduced()))


def cyclo_reduce(v: CycloInt) -> tuple[int, ...]:
    return v.reduced()


# ---- unit matrices ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnitMatrix:
    """Entry ``(r, c)`` is ``zeta_m^exps[r, c]`` where ``mask`` is set, else 0."""

    exps: np.ndarray
    mask: np.ndarray
    modulus: int

    def __post_init__(self):
        e = np.asarray(self.exps, dtype=np.int64) % self.modulus
        k = np.asarray(self.mask, dtype=bool)
        if e.shape != k.shape or e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ShapeError("need square exponent and mask arrays of one shape")
        object.__setattr__(self, "exps", np.where(k, e, 0))
        object.__setattr__(self, "mask", k)

    @property
    def order(self) -> int:
        return self.exps.shape[0]

    @classmethod
    def from_signs(cls, M: IntMatrix) -> "UnitMatrix":
        M = np.asarray(M)
        if not np.isin(M, (-1, 0, 1)).all():
            raise ValueError("entries must lie in {0, ±1}")
        return cls((M == -1).astype(np.int64), M != 0, 2)

    @classmethod
    def fourier(cls, q: int) -> "UnitMatrix":
        r = np.arange(q)
        return cls(np.outer(r, r) % q, np.ones((q, q), dtype=bool), q)

    @classmethod
    def identity(cls, n: int, m: int = 1) -> "UnitMatrix":
        return cls(np.zeros((n, n), dtype=np.int64), np.eye(n, dtype=bool), m)

    def to_signs(self) -> IntMatrix:
        """Back to a ``{0, ±1}`` matrix when every entry is ``±1`` or 0."""
        if (self.exps[self.mask] * 2 % self.modulus).any():
            raise ValueError("entries are not real")
        return np.where(self.mask, np.where(self.exps == 0, 1, -1), 0).astype(np.int64)

    def rescale(self, M: int) -> "UnitMatrix":
        if M % self.modulus:
            raise ValueError("new modulus must be a multiple")
        return UnitMatrix(self.exps * (M // self.modulus), self.mask, M)

    def conj_t(self) -> "UnitMatrix":
        return UnitMatrix(-self.exps.T, self.mask.T, self.modulus)

    def entry(self, r: int, c: int) -> CycloInt:
        if not self.mask[r, c]:
            return CycloInt(self.modulus, (0,) * self.modulus)
        return CycloInt.root(self.modulus, int(self.exps[r, c]))

    def __eq__(self, other):
        if not isinstance(other, UnitMatrix):
            return NotImplemented
        M = math.lcm(self.modulus, other.modulus)
        a, b = self.rescale(M), other.rescale(M)
        return np.array_equal(a.mask, b.mask) and np.array_equal(a.exps, b.exps)

    __hash__ = None


def common_modulus(*mats: UnitMatrix) -> list[UnitMatrix]:
    M = math.lcm(*(U.modulus for U in mats))
    return [U.rescale(M) for U in mats]


def _one_hot(U: UnitMatrix) -> np.ndarray:
    m = U.modulus
    out = np.zeros(U.exps.shape + (m,), dtype=np.int64)
    r, c = np.nonzero(U.mask)
    out[r, c, U.exps[r, c]] = 1
    return out


def gram_counts(A: UnitMatrix, B: UnitMatrix) -> np.ndarray:
    """``C[i, j, r]`` counts the terms ``zeta^r`` in entry ``(i, j)`` of ``A B^*``."""
    A, B = common_modulus(A, B)
    m = A.modulus
    n = A.order
    OA = _one_hot(A).reshape(n, -1)
    OB = _one_hot(B)
    C = np.empty((n, n, m), dtype=np.int64)
    for r in range(m):
        # a - b = r  <=>  b = a - r
        C[:, :, r] = OA @ np.roll(OB, r, axis=2).reshape(n, -1).T
    return C


@dataclass(frozen=True, eq=False)
class CycloMatrix:
    """A matrix over ``Z[zeta_m]`` in reduced coordinates, shape ``(n, n, phi(m))``."""

    reduced: np.ndarray
    modulus: int

    @classmethod
    def from_counts(cls, C: np.ndarray, m: int) -> "CycloMatrix":
        return cls(C @ reduction_matrix(m), m)

    def __add__(self, other: "CycloMatrix") -> "CycloMatrix":
        if other.modulus != self.modulus:
            raise ShapeError("moduli differ")
        return CycloMatrix(self.reduced + other.reduced, self.modulus)

    def scale(self, g: int) -> "CycloMatrix":
        return CycloMatrix(self.reduced * g, self.modulus)

    def is_zero(self) -> bool:
        return not self.reduced.any()

    def equals_scalar_identity(self, k: int) -> bool:
        n = self.reduced.shape[0]
        target = np.zeros_like(self.reduced)
        target[np.arange(n), np.arange(n)] = k * reduction_matrix(self.modulus)[0]
        return np.array_equal(self.reduced, target)

    def entry(self, r: int, c: int) -> CycloInt:
        d = self.reduced.shape[2]
        return CycloInt(self.modulus, tuple(int(x) for x in self.reduced[r, c]) + (0,) * (self.modulus - d))

    def monomial_form(self):
        """Write each entry as ``g zeta^j`` with ``g >= 0``.

        Returns ``(g, j)`` integer arrays, or ``None`` if some entry is not a
        nonnegative multiple of a single root of unity.
        """
        m = self.modulus
        R = reduction_matrix(m)
        V = self.reduced.reshape(-1, R.shape[1])
        norms = (R * R).sum(axis=1)
        dots = V @ R.T
        g = np.zeros(len(V), dtype=np.int64)
        j = np.zeros(len(V), dtype=np.int64)
        done = ~V.any(axis=1)
        for e in range(m):
            ok = ~done & (dots[:, e] > 0) & (dots[:, e] % norms[e] == 0)
            cand = dots[:, e] // norms[e]
            ok &= (V == cand[:, None] * R[e]).all(axis=1)
            g[ok], j[ok] = cand[ok], e
            done |= ok
        if not done.all():
            return None
        shape = self.reduced.shape[:2]
        return g.reshape(shape), j.reshape(shape)


def unit_gram(A: UnitMatrix, B: UnitMatrix | None = None) -> CycloMatrix:
    B = A if B is None else B
    M = math.lcm(A.modulus, B.modulus)
    return CycloMatrix.from_counts(gram_counts(A, B), M)


def unit_matmul(A: UnitMatrix, B: UnitMatrix) -> UnitMatrix:
    """``A B`` when every entry of the product has at most one term."""
    A, B = common_modulus(A, B)
    ma, mb = A.mask.astype(np.int64), B.mask.astype(np.int64)
    terms = ma @ mb
    if terms.max(initial=0) > 1:
        raise CertificationError("product has an entry with more than one term")
    exps = (A.exps * ma) @ mb + ma @ (B.exps * mb)
    return UnitMatrix(exps, terms == 1, A.modulus)


def is_unit_weighing(W: UnitMatrix, k: int) -> bool:
    return unit_gram(W).equals_scalar_identity(k)


def _unsigned(Mm: MonomialMatrix, m: int) -> UnitMatrix:
    if any(s != 1 for s in Mm.signs):
        raise ValueError("odd modulus cannot hold -1")
    D = Mm.to_dense()
    return UnitMatrix(np.zeros_like(D), D != 0, m)


def unit_templated_tensor(W: UnitMatrix, Ks: Sequence[UnitMatrix]) -> UnitMatrix:
    """Block ``(k, l)`` is ``W[k, l] K_l``."""
    m = W.order
    if len(Ks) != m:
        raise ShapeError("need one block per column of W")
    mats = common_modulus(W, *Ks)
    W, Ks = mats[0], mats[1:]
    q = Ks[0].order
    exps = np.zeros((m * q, m * q), dtype=np.int64)
    mask = np.zeros((m * q, m * q), dtype=bool)
    for k in range(m):
        for l in range(m):
            if W.mask[k, l]:
                sl = np.s_[k * q:(k + 1) * q, l * q:(l + 1) * q]
                exps[sl] = Ks[l].exps + W.exps[k, l]
                mask[sl] = Ks[l].mask
    return UnitMatrix(exps, mask, W.modulus)


def unit_kron(A: UnitMatrix, B: UnitMatrix) -> UnitMatrix:
    A, B = common_modulus(A, B)
    n = B.order
    exps = np.repeat(np.repeat(A.exps, n, 0), n, 1) + np.tile(B.exps, (A.order, A.order))
    mask = np.kron(A.mask, B.mask).astype(bool)
    return UnitMatrix(exps, mask, A.modulus)


# ---- the c_m embedding ----------------------------------------------------------

def c_embed(m: int, x: int) -> UnitMatrix:
    """``c_m^x`` for ``0 <= x < m``, where ``c_m = diag(1, w, ..., w^(m-1)) r_m``.

    Row ``r`` has ``w^(x r + x (x - 1) / 2)`` in column ``r + x``.
    """
    x %= m
    r = np.arange(m)
    exps = np.zeros((m, m), dtype=np.int64)
    mask = np.zeros((m, m), dtype=bool)
    cols = (r + x) % m
    exps[r, cols] = x * r + x * (x - 1) // 2
    mask[r, cols] = True
    return UnitMatrix(exps, mask, m)


def unit_phi(R: RingSpec, g: int) -> UnitMatrix:
    """Tensor product of ``c_p`` powers over the coordinates of ``g`` in GF(p^e)."""
    p, _ = factor_prime_power(R.size)
    out = UnitMatrix.identity(1, p)
    for c in R.coords(g):
        out = unit_kron(out, c_embed(p, int(c)))
    return out


def unit_build_K(R: RingSpec, xs: Sequence[int], alphas: Sequence[int]) -> list[list[UnitMatrix]]:
    """Grid ``K[i][l] = c(x_i alpha_l)`` with every ``sum_l K_il K_jl^*`` (i != j)
    certified to have entries 0 or a single root of unity."""
    if len(set(alphas)) != len(alphas):
        raise ValueError("alphas must be distinct")
    grid = [[unit_phi(R, int(R.mul[x, a])) for a in alphas] for x in xs]
    m = len(xs)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            C = sum(gram_counts(grid[i][l], grid[j][l]) for l in range(len(alphas)))
            if C.sum(axis=2).max() > 1:
                raise CertificationError(f"sum K[{i}]K[{j}]^* has an entry with several terms")
    return grid


# ---- unit orthogonal designs ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnitOrthogonalDesign:
    """Coefficient matrices per variable; entry ``zeta^j x_i`` sits in ``parts[i]``."""

    parts: tuple[UnitMatrix, ...]
    type: tuple[int, ...]

    def __post_init__(self):
        if len(self.parts) != len(self.type) or not self.parts:
            raise ShapeError("need one coefficient matrix per variable")
        parts = common_modulus(*self.parts)
        object.__setattr__(self, "parts", tuple(parts))
        object.__setattr__(self, "type", tuple(int(s) for s in self.type))

    @property
    def modulus(self) -> int:
        return self.parts[0].modulus

    @property
    def order(self) -> int:
        return self.parts[0].order

    @property
    def nvars(self) -> int:
        return len(self.parts)

    @classmethod
    def from_real(cls, D: OrthogonalDesign, m: int = 2) -> "UnitOrthogonalDesign":
        return cls(tuple(UnitMatrix.from_signs(A).rescale(math.lcm(2, m)) for A in D.coeffs), D.type)

    def __eq__(self, other):
        if not isinstance(other, UnitOrthogonalDesign):
            return NotImplemented
        return self.type == other.type and all(a == b for a, b in zip(self.parts, other.parts))

    __hash__ = None


def verify_unit_od(D: UnitOrthogonalDesign) -> ODReport:
    """Disjoint supports, ``A_i A_i^* = s_i I`` and ``A_i A_j^* + A_j A_i^* = 0``."""
    u = D.nvars
    done = ["entries"]
    for i in range(u):
        for j in range(i + 1, u):
            if (D.parts[i].mask & D.parts[j].mask).any():
                return ODReport(False, "disjoint_supports", (i, j), "supports overlap", tuple(done))
    done.append("disjoint_supports")
    for i in range(u):
        if not unit_gram(D.parts[i]).equals_scalar_identity(D.type[i]):
            return ODReport(False, "diagonal_gram", (i, i), f"A{i + 1} A{i + 1}^* != {D.type[i]} I", tuple(done))
    done.append("diagonal_gram")
    for i in range(u):
        for j in range(i + 1, u):
            if not (unit_gram(D.parts[i], D.parts[j]) + unit_gram(D.parts[j], D.parts[i])).is_zero():
                return ODReport(False, "anticommutation", (i, j), "A_i A_j^* + A_j A_i^* != 0", tuple(done))
    done.append("anticommutation")
    return ODReport(True, checks=tuple(done))


def certify_unit_od(D: UnitOrthogonalDesign) -> UnitOrthogonalDesign:
    rep = verify_unit_od(D)
    if not rep:
        raise CertificationError(f"unit design failed {rep.check} at {rep.pair}: {rep.detail}")
    return D


# ---- unbiasedness -----------------------------------------------------------------

@dataclass(frozen=True)
class UnitPairReport:
    ok: bool
    witness: UnitMatrix | None = None
    alpha: Fraction | None = None
    check: str = ""
    detail: str = ""

    def __bool__(self):
        return self.ok


def _witness(G: CycloMatrix):
    """``G = g U`` with ``U`` a unit matrix; returns ``(g, U)`` or ``None``."""
    form = G.monomial_form()
    if form is None:
        return None
    g, j = form
    mags = np.unique(g[g != 0])
    if len(mags) != 1:
        return None
    return int(mags[0]), UnitMatrix(j, g != 0, G.modulus)


def is_unit_unbiased_pair(D1: UnitOrthogonalDesign, D2: UnitOrthogonalDesign) -> UnitPairReport:
    """``D1 D2^* = (sum s x^2) / sqrt(alpha) * W`` with ``W`` a unit weighing matrix."""
    if D1.order != D2.order or D1.type != D2.type:
        raise ShapeError("designs differ in order or type")
    A, B, s = D1.parts, D2.parts, D1.type
    for k in range(D1.nvars):
        for l in range(k + 1, D1.nvars):
            if not (unit_gram(A[k], B[l]) + unit_gram(A[l], B[k])).is_zero():
                return UnitPairReport(False, check="cross_terms", detail=f"variables {k},{l}")
    G = unit_gram(A[0], B[0])
    for k in range(1, D1.nvars):
        Gk = unit_gram(A[k], B[k])
        if Gk.modulus != G.modulus or not np.array_equal(s[0] * Gk.reduced, s[k] * G.reduced):
            return UnitPairReport(False, check="proportional_terms", detail=f"variable {k}")
    w = _witness(G)
    if w is None:
        return UnitPairReport(False, check="magnitude", detail="entries are not one common multiple of roots")
    g, U = w
    alpha = Fraction(s[0], g) ** 2
    if alpha.denominator != 1 or not is_unit_weighing(U, alpha.numerator):
        return UnitPairReport(False, check="witness", detail=f"witness is not a unit weighing matrix of weight {alpha}")
    return UnitPairReport(True, U, alpha)


def is_unit_quasi_unbiased_pair(W1: UnitMatrix, W2: UnitMatrix, n: int, k: int, l: int, a: int) -> UnitPairReport:
    for W in (W1, W2):
        if W.order != n or not is_unit_weighing(W, k):
            return UnitPairReport(False, check="members", detail=f"input is not a unit W({n},{k})")
    w = _witness(unit_gram(W1, W2))
    if w is None or w[0] * w[0] != a:
        return UnitPairReport(False, check="entries", detail=f"product is not sqrt({a}) times a unit matrix")
    if not is_unit_weighing(w[1], l):
        return UnitPairReport(False, check="witness", detail=f"witness is not a unit W({n},{l})")
    return UnitPairReport(True, w[1])


@dataclass(frozen=True, eq=False)
class UnitFamily:
    members: tuple[UnitOrthogonalDesign, ...]
    alpha: int
    witnesses: dict = field(repr=False)
    target_size: int
    excluded: tuple = ()

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class UnitQuwFamily:
    members: tuple[UnitMatrix, ...]
    params: tuple[int, int, int, int]
    witnesses: dict = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.members)


def certify_unit_family(members: Sequence[UnitOrthogonalDesign], alpha: int,
                        target_size: int | None = None, excluded=()) -> UnitFamily:
    members = tuple(members)
    if not members:
        raise CertificationError("empty family")
    for D in members:
        certify_unit_od(D)
    wit = {}
    for i, j in itertools.combinations(range(len(members)), 2):
        rep = is_unit_unbiased_pair(members[i], members[j])
        if not rep or rep.alpha != alpha:
            raise CertificationError(f"members {i},{j} not unbiased with alpha {alpha}: {rep.check} {rep.detail}")
        wit[(i, j)] = rep.witness
    return UnitFamily(members, alpha, wit, len(members) if target_size is None else target_size, tuple(excluded))


def certify_unit_quw_family(members: Sequence[UnitMatrix], params: tuple[int, int, int, int]) -> UnitQuwFamily:
    members = tuple(members)
    wit = {}
    for i, j in itertools.combinations(range(len(members)), 2):
        rep = is_unit_quasi_unbiased_pair(members[i], members[j], *params)
        if not rep:
            raise CertificationError(f"members {i},{j} not quasi-unbiased: {rep.check} {rep.detail}")
        wit[(i, j)] = rep.witness
    return UnitQuwFamily(members, tuple(params), wit)


def unit_subset_substitution(F: UnitFamily, S: Sequence[int]) -> UnitQuwFamily:
    """Set the variables in ``S`` (0-based) to 1 and the rest to 0."""
    S = sorted(set(S))
    if not S:
        raise ValueError("S must be nonempty")
    D0 = F.members[0]
    ssum = sum(D0.type[v] for v in S)
    mats = []
    for D in F.members:
        exps = sum(np.where(D.parts[v].mask, D.parts[v].exps, 0) for v in S)
        mask = np.logical_or.reduce([D.parts[v].mask for v in S])
        mats.append(UnitMatrix(exps, mask, D.modulus))
    # member types already carry the factor sqrt(alpha)
    a = Fraction(ssum * ssum, F.alpha)
    if a.denominator != 1:
        raise CertificationError("subset sum is not a multiple of sqrt(alpha)")
    params = (D0.order, ssum, F.alpha, int(a))
    return certify_unit_quw_family(mats, params)


# ---- ring-based families over unit monomials ---------------------------------------

@dataclass(frozen=True, eq=False)
class UnitRingFamilyResult:
    family: UnitFamily
    members: tuple[UnitMatrix, ...]
    xs: tuple[int, ...]
    alphas: tuple[int, ...]
    substituted: dict = field(default_factory=dict)


def _unit_block_screen(W: UnitMatrix, m: int) -> bool:
    groups = W.mask.reshape(W.order, -1, m).sum(axis=2)
    return bool((groups <= 1).all())


def _as_unit(W) -> UnitMatrix:
    return W if isinstance(W, UnitMatrix) else UnitMatrix.from_signs(W)


def _as_unit_od(K) -> UnitOrthogonalDesign:
    return K if isinstance(K, UnitOrthogonalDesign) else UnitOrthogonalDesign.from_real(K)


def unit_ring_family(q: int, W, K, subsets: Sequence[Sequence[int]] = (), budget: int = 2000) -> UnitRingFamilyResult:
    """``m`` mutually unbiased unit designs of order ``mq`` and type ``k s``, ``alpha = k^2``.

    The grid comes from ``c_p`` powers over GF(q); unit-difference elements and
    multipliers are tried in lexicographic order until every member of
    ``W (x) (K_i1, ..., K_im)`` passes the block screen.
    """
    W, K = _as_unit(W), _as_unit_od(K)
    m = W.order
    if K.order != m:
        raise ShapeError("K must have the order of W")
    if m > q:
        raise ValueError("need m <= q")
    k = int(W.mask[0].sum())
    if not is_unit_weighing(W, k):
        raise CertificationError("W is not a unit weighing matrix")
    certify_unit_od(K)
    R = RingSpec.gf(q)
    best = None
    # distinct field elements always differ by a unit
    choices = itertools.product(itertools.combinations(range(q), m), repeat=2)
    for xs, al in itertools.islice(choices, budget):
        grid = unit_build_K(R, xs, al)
        mats = [unit_templated_tensor(W, row) for row in grid]
        passing = sum(_unit_block_screen(Wi, m) for Wi in mats)
        if best is None or passing > best[0]:
            best = (passing, xs, al, mats)
        if passing == m:
            break
    if best is None:
        raise SearchError("no grid choice available")
    _, xs, al, mats = best
    blocks = [unit_kron(UnitMatrix.identity(q), A) for A in K.parts]
    members, excluded = [], []
    for idx, Wi in enumerate(mats):
        if not _unit_block_screen(Wi, m):
            excluded.append((idx, "block screen"))
            continue
        members.append(UnitOrthogonalDesign(tuple(unit_matmul(Wi, B) for B in blocks),
                                            tuple(k * s for s in K.type)))
    fam = certify_unit_family(members, k * k, target_size=m, excluded=excluded)
    subs = {tuple(sorted(S)): unit_subset_substitution(fam, S) for S in subsets}
    return UnitRingFamilyResult(fam, tuple(mats), tuple(xs), tuple(al), subs)


# ---- Bush-type Butson Hadamard matrices ----------------------------------------------

def is_unit_bush_type(P: CycloMatrix, n: int) -> bool:
    """``J`` diagonal blocks and zero row and column sums in every other block."""
    N = P.reduced.shape[0]
    if N != n * n:
        raise ShapeError(f"expected order {n * n}")
    one = reduction_matrix(P.modulus)[0]
    B = P.reduced.reshape(n, n, n, n, -1).transpose(0, 2, 1, 3, 4)
    for a in range(n):
        if not (B[a, a] == one).all():
            return False
    off = ~np.eye(n, dtype=bool)
    return not B.sum(axis=3)[off].any() and not B.sum(axis=2)[off].any()


@dataclass(frozen=True, eq=False)
class ButsonBushFamily:
    q: int
    members: tuple[UnitMatrix, ...]
    products: dict = field(repr=False)


def butson_bush_family(q: int, max_q: int = 16) -> ButsonBushFamily:
    """``W_i = F_q (x) (phi(a_i a_1), ..., phi(a_i a_q))`` over GF(q) with the Fourier matrix."""
    if q > max_q:
        raise SearchError(f"q = {q} exceeds the cap {max_q}")
    R = RingSpec.gf(q)
    els = R.elements()
    grid = build_K(R, els, els)
    F = UnitMatrix.fourier(q)
    mats = [unit_templated_tensor(F, [_unsigned(Kx, q) for Kx in row]) for row in grid]
    fam = certify_unit_quw_family(mats, (q * q, q, q * q, 1))
    products = {}
    for i, j in itertools.combinations(range(q), 2):
        P = unit_gram(mats[i], mats[j])
        U = fam.witnesses[(i, j)]
        if not U.mask.all():
            raise CertificationError(f"W_{i + 1} W_{j + 1}^* has a zero entry")
        if U.modulus != q or not is_unit_weighing(U, q * q):
            raise CertificationError(f"W_{i + 1} W_{j + 1}^* is not a ({q * q},{q}) Butson Hadamard matrix")
        if not is_unit_bush_type(P, q):
            raise CertificationError(f"W_{i + 1} W_{j + 1}^* is not Bush-type")
        products[(i, j)] = U
    return ButsonBushFamily(q, tuple(mats), products)

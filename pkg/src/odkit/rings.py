"""Finite rings with unity: Z_m, GF(p^e) and Galois rings GR(p^s, p^{sm}).

Elements are enumerated once, in the mixed-radix order of their coordinate
vectors (coordinate 0 most significant), and all arithmetic runs through
eagerly built addition/multiplication tables.  For GF and GR the
coordinates are polynomial coefficients ``(c_0, ..., c_{e-1})``, so the
additive group is ``(Z_p)^e`` resp. ``(Z_{p^s})^m``.

The regular representation ``phi`` sends ``g`` to the permutation matrix of
``x -> x + g``; in the coordinate basis this is the Kronecker product of
powers of cyclic shifts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, CertificationError
from .exact import MonomialMatrix

DEFAULT_SEARCH_CAP = 4096


def factor_prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, e)`` with ``q = p**e``, raising for non prime powers."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    e, r = 0, q
    while r % p == 0:
        r //= p
        e += 1
    if r != 1:
        raise ValueError(f"{q} is not a prime power")
    return p, e


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


# -- polynomials over Z_n, coefficient lists low degree first ---------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a: Sequence[int], f: Sequence[int], n: int) -> list[int]:
    """Remainder of ``a`` modulo the monic polynomial ``f`` over Z_n."""
    a = [x % n for x in a]
    d = len(f) - 1
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c:
            for j in range(d + 1):
                a[i - d + j] = (a[i - d + j] - c * f[j]) % n
    return _trim(a[:d])


def _polymul(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    out = [0] * max(len(a) + len(b) - 1, 0)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % n
    return out


def _monic_polys(p: int, d: int):
    """Monic degree-``d`` polynomials over GF(p), in increasing base-p value
    read from the leading coefficient down."""
    for digits in itertools.product(range(p), repeat=d):
        yield list(reversed(digits)) + [1]


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg(f)/2."""
    d = len(f) - 1
    if d < 1:
        return False
    for k in range(1, d // 2 + 1):
        for g in _monic_polys(p, k):
            if not _polymod(f, g, p):
                return False
    return True


def least_irreducible(p: int, e: int) -> tuple[int, ...]:
    for f in _monic_polys(p, e):
        if is_irreducible(f, p):
            return tuple(f)
    raise ValueError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True, eq=False)
class RingSpec:
    """A finite commutative ring with unity and its additive decomposition."""

    kind: str
    params: tuple
    decomposition: tuple[int, ...]
    poly: tuple[int, ...] = ()
    add: np.ndarray = field(repr=False, default=None)
    mul: np.ndarray = field(repr=False, default=None)
    neg: np.ndarray = field(repr=False, default=None)

    # ---- constructors -----------------------------------------------------
    @classmethod
    def zm(cls, m: int) -> "RingSpec":
        if m < 1:
            raise ValueError("modulus must be positive")
        return cls._build("Z", (m,), (m,), (), lambda c: c[0], lambda a, b: ((a[0] * b[0]) % m,))

    @classmethod
    def gf(cls, q: int, poly: Sequence[int] | None = None) -> "RingSpec":
        p, e = factor_prime_power(q)
        f = tuple(poly) if poly is not None else (least_irreducible(p, e) if e > 1 else (0, 1))
        if len(f) != e + 1 or f[-1] != 1:
            raise ValueError("GF polynomial must be monic of degree e")
        if e > 1 and not is_irreducible(f, p):
            raise ValueError("GF polynomial is reducible")
        return cls._poly_ring("GF", (p, e), p, e, f)

    @classmethod
    def gr(cls, p: int, s: int, m: int, poly: Sequence[int] | None = None,
           max_lifts: int = 256) -> "RingSpec":
        """Galois ring Z_{p^s}[x]/(h) with h basic irreducible of degree m.

        Without ``poly`` the least irreducible polynomial over GF(p) is lifted
        coefficientwise; if ``x`` then fails to have order ``p^m - 1`` other
        lifts (coefficients shifted by multiples of ``p``) are tried.
        """
        if not is_prime(p) or s < 1 or m < 1:
            raise ValueError("need p prime and s, m >= 1")
        n = p ** s
        if poly is not None:
            cands = [tuple(poly)]
        else:
            base = least_irreducible(p, m) if m > 1 else (0, 1)
            shifts = itertools.product(range(p ** (s - 1)), repeat=m)
            cands = (tuple((c + p * d) % n for c, d in zip(base[:-1], sh)) + (1,)
                     for sh in itertools.islice(shifts, max_lifts))
        for h in cands:
            if len(h) != m + 1 or h[-1] != 1:
                raise ValueError("GR polynomial must be monic of degree m")
            if m > 1 and not is_irreducible([c % p for c in h], p):
                raise ValueError("polynomial is not basic irreducible")
            R = cls._poly_ring("GR", (p, s, m), n, m, h)
            if m == 1 or R.multiplicative_order(R.xi) == p ** m - 1:
                return R
        raise CertificationError("no lift with x of order p^m - 1 within budget")

    @classmethod
    def _poly_ring(cls, kind, params, n, d, f) -> "RingSpec":
        def mul(a, b):
            r = _polymod(_polymul(a, b, n), f, n)
            return tuple(r + [0] * (d - len(r)))

        return cls._build(kind, params, (n,) * d, tuple(f), None, mul)

    @classmethod
    def _build(cls, kind, params, decomposition, poly, _unused, mulfn) -> "RingSpec":
        size = math.prod(decomposition)
        if size > (1 << 16):
            raise BudgetExceeded(f"ring of size {size} exceeds table cap")
        coords = list(itertools.product(*(range(n) for n in decomposition)))
        index = {c: i for i, c in enumerate(coords)}
        radix = np.array(decomposition)
        C = np.array(coords, dtype=np.int64).reshape(size, len(decomposition))
        add = np.empty((size, size), dtype=np.int32)
        for i in range(size):
            s = (C[i] + C) % radix
            add[i] = [index[tuple(r)] for r in s]
        mul = np.empty((size, size), dtype=np.int32)
        for i in range(size):
            for j in range(i, size):
                mul[i, j] = mul[j, i] = index[tuple(int(x) for x in mulfn(coords[i], coords[j]))]
        neg = np.array([index[tuple(int(x) for x in (-C[i]) % radix)] for i in range(size)])
        for a in (add, mul, neg):
            a.setflags(write=False)
        R = cls(kind, params, tuple(decomposition), poly, add, mul, neg)
        object.__setattr__(R, "_coords", coords)
        object.__setattr__(R, "_index", index)
        return R

    # ---- element access ---------------------------------------------------
    @property
    def size(self) -> int:
        return self.add.shape[0]

    def __len__(self):
        return self.size

    def element(self, value) -> "RingElem":
        """Element from an index-free description: an int for Z_m, a
        coordinate tuple otherwise."""
        if isinstance(value, (int, np.integer)):
            if self.kind == "Z":
                return RingElem(self, int(value) % self.size)
            value = (int(value),) + (0,) * (len(self.decomposition) - 1)
        c = tuple(int(x) % n for x, n in zip(value, self.decomposition))
        return RingElem(self, self._index[c])

    def at(self, i: int) -> "RingElem":
        return RingElem(self, int(i))

    def elements(self) -> list["RingElem"]:
        return [RingElem(self, i) for i in range(self.size)]

    def coords(self, i: int) -> tuple[int, ...]:
        return self._coords[i]

    @property
    def zero(self) -> "RingElem":
        return RingElem(self, 0)

    @property
    def one(self) -> "RingElem":
        return self.element(1)

    @property
    def xi(self) -> "RingElem":
        """The class of ``x`` in a polynomial quotient ring."""
        if self.kind == "Z":
            raise ValueError("Z_m has no polynomial generator")
        d = len(self.decomposition)
        return self.element((0, 1) + (0,) * (d - 2)) if d > 1 else self.element((0,))

    def multiplicative_order(self, g: "RingElem") -> int | None:
        one = self.one.index
        x, k = g.index, 1
        while x != one:
            x = int(self.mul[x, g.index])
            k += 1
            if k > self.size:
                return None
        return k

    def units(self) -> np.ndarray:
        """Boolean mask of units (decided from the multiplication table)."""
        return (self.mul == self.one.index).any(axis=1)

    def __repr__(self):
        if self.kind == "Z":
            return f"Z_{self.params[0]}"
        if self.kind == "GF":
            return f"GF({self.size})"
        p, s, m = self.params
        return f"GR({p ** s},{self.size})"


@dataclass(frozen=True)
class RingElem:
    ring: RingSpec
    index: int

    def _other(self, o) -> int:
        if isinstance(o, RingElem):
            if o.ring is not self.ring:
                raise ValueError("elements of different rings")
            return o.index
        return self.ring.element(o).index

    def __add__(self, o):
        return RingElem(self.ring, int(self.ring.add[self.index, self._other(o)]))

    def __neg__(self):
        return RingElem(self.ring, int(self.ring.neg[self.index]))

    def __sub__(self, o):
        return self + (-RingElem(self.ring, self._other(o)))

    def __mul__(self, o):
        return RingElem(self.ring, int(self.ring.mul[self.index, self._other(o)]))

    __radd__ = __add__
    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ring.one
        for _ in range(k):
            out = out * self
        return out

    @property
    def coords(self) -> tuple[int, ...]:
        return self.ring.coords(self.index)

    def __repr__(self):
        return f"{self.ring!r}{self.coords}"


def is_unit(x: RingElem) -> bool:
    R = x.ring
    if R.kind == "Z":
        return math.gcd(x.index, R.size) == 1
    if R.kind == "GF":
        return x.index != 0
    return bool((R.mul[x.index] == R.one.index).any())


def _unit_diff_graph(R: RingSpec) -> np.ndarray:
    """adj[a, b] iff a - b is a unit."""
    units = R.units()
    diff = R.add[:, R.neg]  # diff[a, b] = a + (-b)
    return units[diff]


def unit_difference_family(R: RingSpec, m: int, cap: int = DEFAULT_SEARCH_CAP) -> list[RingElem] | None:
    """``m`` elements with all pairwise differences units, or ``None``.

    Exhaustive backtracking with the first element fixed to 0 (translation
    invariance), candidates tried in index order.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if R.size > cap:
        raise BudgetExceeded(f"{R!r} has {R.size} elements, above the search cap {cap}")
    adj = _unit_diff_graph(R)

    def extend(chosen, cands):
        if len(chosen) == m:
            return chosen
        if len(chosen) + len(cands) < m:
            return None
        for k, c in enumerate(cands):
            rest = [d for d in cands[k + 1:] if adj[c, d]]
            found = extend(chosen + [c], rest)
            if found:
                return found
        return None

    found = extend([0], [int(c) for c in np.flatnonzero(adj[0]) if c > 0])
    if found is None:
        return None
    fam = [R.at(i) for i in found]
    for a, b in itertools.combinations(fam, 2):
        if not is_unit(a - b):
            raise CertificationError("unit-difference family failed re-validation")
    return fam


def max_unit_difference_family(R: RingSpec, cap: int = DEFAULT_SEARCH_CAP) -> list[RingElem]:
    """Largest unit-difference family, by exhaustion (small rings only)."""
    best = [R.zero]
    m = 2
    while True:
        fam = unit_difference_family(R, m, cap)
        if fam is None:
            return best
        best, m = fam, m + 1


def phi_embed(R: RingSpec, g: RingElem) -> MonomialMatrix:
    """Permutation matrix of translation by ``g`` (row ``x`` has its 1 in column ``x + g``)."""
    cols = tuple(int(c) for c in R.add[:, g.index])
    return MonomialMatrix(cols, (1,) * R.size)


def build_K(R: RingSpec, xs: Sequence[RingElem], alphas: Sequence[RingElem]) -> list[list[MonomialMatrix]]:
    """Grid ``K[i][j] = phi(x_i * alpha_j)`` with its (0,1)-sum certificate."""
    if len({a.index for a in alphas}) != len(alphas):
        raise ValueError("alphas must be distinct")
    grid = [[phi_embed(R, x * a) for a in alphas] for x in xs]
    m = len(xs)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            S = sum((grid[i][l] @ grid[j][l].T).to_dense() for l in range(len(alphas)))
            if S.max() > 1:
                raise CertificationError(f"sum K[{i}]K[{j}]^T is not a (0,1)-matrix")
    return grid

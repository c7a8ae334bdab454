"""Exact integer matrix algebra.

Integer matrices are plain ``numpy.int64`` arrays.  Every product goes
through :func:`matmul`, which bounds the largest possible accumulated value
before computing and refuses to run if it could overflow.  When the bound
fits in the exactly-representable integer range of a float type the product
is delegated to BLAS (float32 below 2**24, float64 below 2**53); every
partial sum is then an integer inside that range, so the result is exact
regardless of summation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError

IntMatrix = np.ndarray

_F32_EXACT = 1 << 24
_F64_EXACT = 1 << 53
_I64_SAFE = (1 << 63) - 1


def as_int(M) -> IntMatrix:
    """Convert ``M`` to an int64 array, rejecting non-integral values."""
    arr = np.asarray(M)
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64, copy=False)
    if arr.dtype.kind == "f":
        out = arr.astype(np.int64)
        if not np.array_equal(out, arr):
            raise ValueError("matrix has non-integral entries")
        return out
    if arr.dtype == object:
        if any(abs(int(x)) > _I64_SAFE for x in arr.flat):
            raise OverflowError("entry exceeds 64-bit range")
        return arr.astype(np.int64)
    raise TypeError(f"cannot interpret dtype {arr.dtype} as integers")


def _maxabs(A: np.ndarray) -> int:
    return int(np.abs(A).max()) if A.size else 0


def matmul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    """Exact product ``A @ B`` with overflow detection."""
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ShapeError(f"cannot multiply {A.shape} by {B.shape}")
    bound = _maxabs(A) * _maxabs(B) * A.shape[1]
    if bound < _F32_EXACT:
        return (A.astype(np.float32) @ B.astype(np.float32)).astype(np.int64)
    if bound < _F64_EXACT:
        return (A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64)
    if bound <= _I64_SAFE:
        return A.astype(np.int64) @ B.astype(np.int64)
    raise OverflowError(f"product bound {bound} exceeds 64-bit range")


def gram(A: IntMatrix, B: IntMatrix | None = None) -> IntMatrix:
    """``A @ B.T`` (``A @ A.T`` when ``B`` is omitted)."""
    return matmul(A, (A if B is None else B).T)


def identity(n: int) -> IntMatrix:
    return np.eye(n, dtype=np.int64)


def ones(n: int, m: int | None = None) -> IntMatrix:
    return np.ones((n, n if m is None else m), dtype=np.int64)


def zeros(n: int, m: int | None = None) -> IntMatrix:
    return np.zeros((n, n if m is None else m), dtype=np.int64)


def kron(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    """Kronecker product in row-major block order: block (i, j) is ``A[i,j]*B``."""
    if _maxabs(A) * _maxabs(B) > _I64_SAFE:
        raise OverflowError("Kronecker product entry exceeds 64-bit range")
    return np.kron(as_int(A), as_int(B))


def direct_sum(*mats: IntMatrix) -> IntMatrix:
    """Block-diagonal matrix with the given blocks."""
    rows = sum(M.shape[0] for M in mats)
    cols = sum(M.shape[1] for M in mats)
    out = np.zeros((rows, cols), dtype=np.int64)
    r = c = 0
    for M in mats:
        out[r:r + M.shape[0], c:c + M.shape[1]] = M
        r += M.shape[0]
        c += M.shape[1]
    return out


def back_identity(n: int) -> IntMatrix:
    """Anti-diagonal permutation matrix of order ``n``."""
    if n < 1:
        raise ValueError("order must be positive")
    return np.fliplr(identity(n)).copy()


def circulant(first_row: Sequence[int]) -> IntMatrix:
    """Circulant matrix whose row ``i`` is ``first_row`` shifted right by ``i``."""
    row = np.asarray(first_row, dtype=np.int64)
    return np.array([np.roll(row, i) for i in range(len(row))], dtype=np.int64)


def templated_tensor(W: IntMatrix, Ks: Sequence[IntMatrix]) -> IntMatrix:
    """Block matrix with block ``(i, j)`` equal to ``W[i, j] * Ks[j]``.

    Block column ``j`` always uses ``Ks[j]``; with all ``Ks`` equal this is
    ``kron(W, K)``.
    """
    m = W.shape[0]
    if W.shape != (m, m) or len(Ks) != m:
        raise ShapeError("need a square W and one K per column of W")
    n = Ks[0].shape[0]
    if any(K.shape != (n, n) for K in Ks):
        raise ShapeError("all K matrices must share one square shape")
    out = np.zeros((m * n, m * n), dtype=np.int64)
    for i in range(m):
        for j in range(m):
            if W[i, j]:
                out[i * n:(i + 1) * n, j * n:(j + 1) * n] = W[i, j] * Ks[j]
    return out


def is_sign_matrix(M: IntMatrix, allow_zero: bool = True) -> bool:
    vals = (-1, 0, 1) if allow_zero else (-1, 1)
    return bool(np.isin(M, vals).all())


def _require_square(M: IntMatrix) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {M.shape}")


def is_weighing(M: IntMatrix, k: int) -> bool:
    """True iff ``M`` is a (0,±1) matrix with ``M M^T = k I``."""
    _require_square(M)
    if not is_sign_matrix(M):
        return False
    return bool(np.array_equal(gram(M), k * identity(M.shape[0])))


def is_hadamard(M: IntMatrix) -> bool:
    _require_square(M)
    return is_sign_matrix(M, allow_zero=False) and is_weighing(M, M.shape[0])


def sylvester(t: int) -> IntMatrix:
    """Sylvester Hadamard matrix of order ``2**t``."""
    H = np.array([[1]], dtype=np.int64)
    H2 = np.array([[1, 1], [1, -1]], dtype=np.int64)
    for _ in range(t):
        H = np.kron(H, H2)
    return H


@dataclass(frozen=True)
class MonomialMatrix:
    """Signed partial permutation matrix.

    ``cols[r]`` is the column of the nonzero in row ``r`` (``-1`` for a zero
    row) and ``signs[r]`` its sign.
    """

    cols: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.cols) != len(self.signs):
            raise ShapeError("cols and signs differ in length")
        used = [c for c in self.cols if c >= 0]
        if len(used) != len(set(used)):
            raise ValueError("two rows share a column")
        if any(s not in (-1, 1) for s, c in zip(self.signs, self.cols) if c >= 0):
            raise ValueError("signs must be +1 or -1")
        # zero rows carry sign +1 so that equality matches the dense form
        object.__setattr__(self, "signs", tuple(s if c >= 0 else 1 for s, c in zip(self.signs, self.cols)))

    @property
    def size(self) -> int:
        return len(self.cols)

    @classmethod
    def identity(cls, n: int) -> "MonomialMatrix":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def from_dense(cls, M: IntMatrix) -> "MonomialMatrix":
        _require_square(M)
        cols, signs = [], []
        for row in M:
            nz = np.flatnonzero(row)
            if len(nz) > 1 or (len(nz) == 1 and abs(row[nz[0]]) != 1):
                raise ValueError("not a signed monomial matrix")
            cols.append(int(nz[0]) if len(nz) else -1)
            signs.append(int(row[nz[0]]) if len(nz) else 1)
        return cls(tuple(cols), tuple(signs))

    def to_dense(self) -> IntMatrix:
        n = self.size
        out = np.zeros((n, n), dtype=np.int64)
        for r, (c, s) in enumerate(zip(self.cols, self.signs)):
            if c >= 0:
                out[r, c] = s
        return out

    def __matmul__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        if self.size != other.size:
            raise ShapeError("size mismatch")
        cols, signs = [], []
        for c, s in zip(self.cols, self.signs):
            if c < 0 or other.cols[c] < 0:
                cols.append(-1)
                signs.append(1)
            else:
                cols.append(other.cols[c])
                signs.append(s * other.signs[c])
        return MonomialMatrix(tuple(cols), tuple(signs))

    @property
    def T(self) -> "MonomialMatrix":
        n = self.size
        cols, signs = [-1] * n, [1] * n
        for r, (c, s) in enumerate(zip(self.cols, self.signs)):
            if c >= 0:
                cols[c] = r
                signs[c] = s
        return MonomialMatrix(tuple(cols), tuple(signs))

    def __pow__(self, e: int) -> "MonomialMatrix":
        if e < 0:
            return self.T ** (-e)
        out = MonomialMatrix.identity(self.size)
        base = self
        while e:
            if e & 1:
                out = out @ base
            base = base @ base
            e >>= 1
        return out

    def kron(self, other: "MonomialMatrix") -> "MonomialMatrix":
        m = other.size
        cols, signs = [], []
        for c1, s1 in zip(self.cols, self.signs):
            for c2, s2 in zip(other.cols, other.signs):
                if c1 < 0 or c2 < 0:
                    cols.append(-1)
                    signs.append(1)
                else:
                    cols.append(c1 * m + c2)
                    signs.append(s1 * s2)
        return MonomialMatrix(tuple(cols), tuple(signs))


def circulant_shift(h: int) -> MonomialMatrix:
    """The ``h x h`` cyclic shift with first row ``(0, 1, 0, ..., 0)``."""
    if h < 1:
        raise ValueError("h must be positive")
    return MonomialMatrix(tuple((r + 1) % h for r in range(h)), (1,) * h)


class PackedSignMatrix:
    """(0,±1) matrix stored as two packed bitplanes (positive, negative).

    Row inner products reduce to four popcounts per pair of rows.
    """

    def __init__(self, pos: np.ndarray, neg: np.ndarray, shape: tuple[int, int]):
        self.pos = pos
        self.neg = neg
        self.shape = shape

    @classmethod
    def from_dense(cls, M: IntMatrix) -> "PackedSignMatrix":
        if not is_sign_matrix(M):
            raise ValueError("entries must lie in {-1, 0, 1}")
        return cls(np.packbits(M == 1, axis=1), np.packbits(M == -1, axis=1), M.shape)

    def to_dense(self) -> IntMatrix:
        cols = self.shape[1]
        p = np.unpackbits(self.pos, axis=1, count=cols).astype(np.int64)
        n = np.unpackbits(self.neg, axis=1, count=cols).astype(np.int64)
        return p - n

    def gram(self, other: "PackedSignMatrix | None" = None, chunk: int = 64) -> IntMatrix:
        """``self @ other.T`` computed on the bitplanes."""
        other = self if other is None else other
        if self.shape[1] != other.shape[1]:
            raise ShapeError("column counts differ")
        out = np.empty((self.shape[0], other.shape[0]), dtype=np.int64)

        def pc(x, y):
            return np.bitwise_count(x[:, None, :] & y[None, :, :]).sum(axis=2, dtype=np.int64)

        for r in range(0, self.shape[0], chunk):
            ap, an = self.pos[r:r + chunk], self.neg[r:r + chunk]
            out[r:r + chunk] = pc(ap, other.pos) + pc(an, other.neg) - pc(ap, other.neg) - pc(an, other.pos)
        return out

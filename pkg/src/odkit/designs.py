"""Orthogonal designs as stacks of (0,±1) coefficient matrices.

A design ``D = sum_i x_i A_i`` of order ``n`` in ``u`` variables is stored as
an int array of shape ``(u, n, n)``.  ``D D^T = (sum_i s_i x_i^2) I`` holds
exactly when

* the supports of the ``A_i`` are pairwise disjoint,
* ``A_i A_i^T = s_i I`` for every ``i``,
* ``A_i A_j^T + A_j A_i^T = 0`` for every ``i != j``,

and :func:`verify_od` checks exactly these, in this order, reporting the
lexicographically first failing pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import CertificationError, PlugInError, ShapeError
from .exact import IntMatrix, as_int, gram, identity, is_weighing, kron, matmul


@dataclass(frozen=True, eq=False)
class OrthogonalDesign:
    coeffs: np.ndarray
    type: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        c = as_int(self.coeffs)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ShapeError("coefficients must have shape (u, n, n)")
        if len(self.type) != c.shape[0]:
            raise ShapeError("type length differs from number of coefficient matrices")
        if any(s <= 0 for s in self.type):
            raise ValueError("type entries must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "type", tuple(int(s) for s in self.type))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i + 1}" for i in range(c.shape[0])))

    @property
    def order(self) -> int:
        return self.coeffs.shape[1]

    @property
    def nvars(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def from_entries(cls, E, type: Sequence[int] | None = None, labels=()) -> "OrthogonalDesign":
        """Build from a matrix of signed 1-based variable indices (0 = empty)."""
        E = as_int(E)
        u = int(np.abs(E).max()) if type is None else len(type)
        coeffs = np.zeros((u,) + E.shape, dtype=np.int64)
        for i in range(u):
            coeffs[i] = (E == i + 1).astype(np.int64) - (E == -(i + 1))
        if type is None:
            type = [int(np.abs(coeffs[i][0]).sum()) for i in range(u)]
        return cls(coeffs, tuple(type), tuple(labels))

    def entries(self) -> IntMatrix:
        """Signed 1-based variable index matrix; needs disjoint supports."""
        if (np.abs(self.coeffs).sum(axis=0) > 1).any():
            raise ValueError("supports overlap; no single-variable entry matrix")
        idx = np.arange(1, self.nvars + 1).reshape(-1, 1, 1)
        return (self.coeffs * idx).sum(axis=0)

    def evaluate(self, values: Sequence[int]) -> IntMatrix:
        """Integer matrix obtained by substituting ``values`` for the variables."""
        v = np.asarray(values, dtype=np.int64).reshape(-1, 1, 1)
        return (self.coeffs * v).sum(axis=0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OrthogonalDesign)
            and self.type == other.type
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.type, self.coeffs.tobytes()))

    def __repr__(self):
        return f"OD({self.order};{','.join(map(str, self.type))})"


@dataclass(frozen=True)
class ODReport:
    """Outcome of :func:`verify_od`; truthy iff every check passed."""

    ok: bool
    check: str = ""
    pair: tuple[int, int] | None = None
    detail: str = ""
    checks: tuple[str, ...] = field(default=())

    def __bool__(self):
        return self.ok


def verify_od(D: OrthogonalDesign) -> ODReport:
    A = D.coeffs
    u, n = D.nvars, D.order
    done = []
    if not np.isin(A, (-1, 0, 1)).all():
        i = int(np.flatnonzero(~np.isin(A, (-1, 0, 1)).reshape(u, -1).any(axis=1))[0])
        return ODReport(False, "entries", (i, i), "coefficient outside {0,±1}")
    done.append("entries")
    S = np.abs(A)
    for i in range(u):
        for j in range(i + 1, u):
            if (S[i] & S[j]).any():
                return ODReport(False, "disjoint_supports", (i, j), "supports overlap", tuple(done))
    done.append("disjoint_supports")
    I = identity(n)
    for i in range(u):
        if not np.array_equal(gram(A[i]), D.type[i] * I):
            return ODReport(False, "diagonal_gram", (i, i), f"A{i + 1} A{i + 1}^T != {D.type[i]} I", tuple(done))
    done.append("diagonal_gram")
    for i in range(u):
        for j in range(i + 1, u):
            P = gram(A[i], A[j])
            if (P + P.T).any():
                return ODReport(False, "anticommutation", (i, j), "A_i A_j^T + A_j A_i^T != 0", tuple(done))
    done.append("anticommutation")
    return ODReport(True, checks=tuple(done))


def certify_od(D: OrthogonalDesign) -> OrthogonalDesign:
    """Return ``D`` unchanged, raising if it is not a valid design."""
    rep = verify_od(D)
    if not rep:
        raise CertificationError(f"{D!r} failed {rep.check} at {rep.pair}: {rep.detail}")
    return D


@dataclass(frozen=True)
class Merge:
    """Substitution target: replace a variable by ``sign * x_target``."""

    target: int
    sign: int = 1


Target = Union[int, Merge, np.ndarray]


def substitute(D: OrthogonalDesign, assignment: Mapping[int, Target]):
    """Apply scalar and merge substitutions (0-based variable indices).

    If every variable receives a scalar the result is a weighing matrix of
    weight ``sum(s_i for x_i = ±1)``.  Otherwise the result is a design:
    unassigned variables are kept, 0 drops a variable and :class:`Merge`
    folds it into another.  Outputs are re-verified.
    """
    for tgt in assignment.values():
        if isinstance(tgt, np.ndarray):
            raise TypeError("matrix targets belong to plug_in")
    u = D.nvars
    if any(not 0 <= v < u for v in assignment):
        raise IndexError("assignment names a variable outside the design")
    if len(assignment) == u and all(isinstance(t, (int, np.integer)) for t in assignment.values()):
        vals = [int(assignment[i]) for i in range(u)]
        if any(v not in (-1, 0, 1) for v in vals):
            raise ValueError("scalar targets must be 0, 1 or -1")
        M = D.evaluate(vals)
        k = sum(s for s, v in zip(D.type, vals) if v)
        if not is_weighing(M, k):
            raise CertificationError("substituted matrix is not a weighing matrix")
        return M

    merged_into = {}
    for v, tgt in assignment.items():
        if isinstance(tgt, Merge):
            if tgt.target == v:
                raise ValueError(f"cannot merge x{v + 1} into itself")
            if tgt.sign not in (-1, 1):
                raise ValueError("merge sign must be ±1")
            t = assignment.get(tgt.target)
            if t is not None:
                raise ValueError(f"merge target x{tgt.target + 1} is itself substituted")
            merged_into[v] = tgt
        elif int(tgt) != 0:
            raise ValueError("a design result only admits 0 or Merge targets")
    kept = [i for i in range(u) if i not in assignment]
    if not kept:
        raise ValueError("assignment leaves no variables")
    coeffs, typ, labels = [], [], []
    for i in kept:
        c = D.coeffs[i].copy()
        s = D.type[i]
        for v, m in merged_into.items():
            if m.target == i:
                c = c + m.sign * D.coeffs[v]
                s += D.type[v]
        coeffs.append(c)
        typ.append(s)
        labels.append(D.labels[i])
    return certify_od(OrthogonalDesign(np.array(coeffs), tuple(typ), tuple(labels)))


def merge_groups(D: OrthogonalDesign, groups: Sequence[Sequence[int]]) -> OrthogonalDesign:
    """Collapse each group of variables into one; variables in no group are dropped."""
    assignment: dict[int, Target] = {}
    seen = set()
    for g in groups:
        if not g:
            raise ValueError("empty merge group")
        for v in g[1:]:
            assignment[v] = Merge(g[0])
        seen.update(g)
    for v in range(D.nvars):
        if v not in seen:
            assignment[v] = 0
    out = substitute(D, assignment)
    # restore the caller's group order
    firsts = [g[0] for g in groups]
    order = sorted(range(len(firsts)), key=lambda k: firsts[k])
    inv = np.argsort(order)
    return OrthogonalDesign(out.coeffs[inv], tuple(out.type[k] for k in inv),
                            tuple(out.labels[k] for k in inv))


def check_amicable(Bs: Sequence[IntMatrix]) -> None:
    """Raise unless ``B_i B_j^T == B_j B_i^T`` for all ``i < j``."""
    for i in range(len(Bs)):
        for j in range(i + 1, len(Bs)):
            if not np.array_equal(gram(Bs[i], Bs[j]), gram(Bs[j], Bs[i])):
                raise PlugInError(f"plug-in matrices {i + 1} and {j + 1} are not amicable")


def check_commuting(Bs: Sequence[IntMatrix]) -> None:
    """Raise unless ``B_i B_j == B_j B_i`` for all ``i < j``."""
    for i in range(len(Bs)):
        for j in range(i + 1, len(Bs)):
            if not np.array_equal(matmul(Bs[i], Bs[j]), matmul(Bs[j], Bs[i])):
                raise PlugInError(f"matrices {i + 1} and {j + 1} do not commute")


def sum_property(weights: Sequence[int], Bs: Sequence[IntMatrix]) -> int:
    """Return ``l`` with ``sum_i w_i B_i B_i^T = l I``, raising if there is none."""
    w = Bs[0].shape[0]
    total = sum(int(s) * gram(B) for s, B in zip(weights, Bs))
    ell = int(total[0, 0])
    if ell <= 0 or not np.array_equal(total, ell * identity(w)):
        raise PlugInError("plug-in matrices violate the weighted sum property")
    return ell


def plug_in(D: OrthogonalDesign, Bs: Sequence[IntMatrix]) -> IntMatrix:
    """``sum_i A_i (x) B_i`` after validating amicability and the sum property.

    The sum property is weighted by the design's type; the output is
    certified to satisfy ``M M^T = l I``.
    """
    if len(Bs) != D.nvars:
        raise ShapeError("need one plug-in matrix per variable")
    Bs = [as_int(B) for B in Bs]
    w = Bs[0].shape
    if any(B.shape != w or w[0] != w[1] for B in Bs):
        raise ShapeError("plug-in matrices must share one square order")
    check_amicable(Bs)
    ell = sum_property(D.type, Bs)
    M = sum(kron(A, B) for A, B in zip(D.coeffs, Bs))
    if not np.array_equal(gram(M), ell * identity(M.shape[0])):
        raise CertificationError("plug-in output fails M M^T = l I")
    return M


def od_transpose(D: OrthogonalDesign) -> OrthogonalDesign:
    return OrthogonalDesign(np.transpose(D.coeffs, (0, 2, 1)), D.type, D.labels)


def permute(D: OrthogonalDesign, rows: Sequence[int], cols: Sequence[int]) -> OrthogonalDesign:
    return OrthogonalDesign(D.coeffs[:, rows][:, :, cols], D.type, D.labels)


def negate_variable(D: OrthogonalDesign, i: int) -> OrthogonalDesign:
    c = D.coeffs.copy()
    c[i] = -c[i]
    return OrthogonalDesign(c, D.type, D.labels)


def left_multiply(P: IntMatrix, D: OrthogonalDesign, type=None) -> OrthogonalDesign:
    """``P D`` coefficientwise; ``type`` defaults to the input type."""
    return OrthogonalDesign(np.array([matmul(P, A) for A in D.coeffs]),
                            D.type if type is None else tuple(type), D.labels)


def od_kron(D: OrthogonalDesign, W: IntMatrix, weight: int) -> OrthogonalDesign:
    """``D (x) W`` for a weighing matrix ``W`` of the given weight."""
    return OrthogonalDesign(np.array([kron(A, W) for A in D.coeffs]),
                            tuple(weight * s for s in D.type), D.labels)


def od_direct_sum(D1: OrthogonalDesign, D2: OrthogonalDesign) -> OrthogonalDesign:
    if D1.type != D2.type:
        raise ShapeError("direct sum needs equal types")
    n1, n2 = D1.order, D2.order
    c = np.zeros((D1.nvars, n1 + n2, n1 + n2), dtype=np.int64)
    c[:, :n1, :n1] = D1.coeffs
    c[:, n1:, n1:] = D2.coeffs
    return OrthogonalDesign(c, D1.type, D1.labels)

"""Text formats for matrices and designs, and the certificate store.

Four matrix kinds share one layout: an optional ``# odkit-format 1`` line,
a header, an optional ``type`` line, then one whitespace-separated row per
line.

    W n k        tokens 0 + -
    OD n u       type s1..su; tokens 0 +i -i         (i is 1-based)
    UW n k m     tokens 0 e<j>                        (zeta_m^j)
    UOD n u m    type s1..su; tokens 0 e<j>*x<i> +i

``INT r c`` holds plain integer tables such as eigenmatrices.
"""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .designs import OrthogonalDesign
from .errors import MatrixFormatError
from .unit import UnitMatrix, UnitOrthogonalDesign

FORMAT_VERSION = 1
FORMAT_LINE = f"# odkit-format {FORMAT_VERSION}"
SUFFIX = {"W": ".w", "OD": ".od", "UW": ".uw", "UOD": ".uod", "INT": ".int"}


@dataclass(frozen=True, eq=False)
class WeighingFile:
    matrix: np.ndarray
    weight: int

    def __eq__(self, other):
        return (isinstance(other, WeighingFile) and self.weight == other.weight
                and np.array_equal(self.matrix, other.matrix))


@dataclass(frozen=True, eq=False)
class UnitWeighingFile:
    matrix: UnitMatrix
    weight: int

    def __eq__(self, other):
        return isinstance(other, UnitWeighingFile) and self.weight == other.weight and self.matrix == other.matrix


@dataclass(frozen=True, eq=False)
class IntTable:
    values: np.ndarray

    def __eq__(self, other):
        return isinstance(other, IntTable) and np.array_equal(self.values, other.values)


MatrixObject = Union[WeighingFile, OrthogonalDesign, UnitWeighingFile, UnitOrthogonalDesign, IntTable]


def kind_of(obj: MatrixObject) -> str:
    for cls, kind in ((WeighingFile, "W"), (OrthogonalDesign, "OD"), (UnitWeighingFile, "UW"),
                      (UnitOrthogonalDesign, "UOD"), (IntTable, "INT")):
        if isinstance(obj, cls):
            return kind
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ---- rendering --------------------------------------------------------------------

def _rows(grid) -> list[str]:
    return [" ".join(row) for row in grid]


def render_matrix(obj: MatrixObject) -> str:
    kind = kind_of(obj)
    if kind == "W":
        M = obj.matrix
        n = M.shape[0]
        head = [f"W {n} {obj.weight}"]
        sym = {0: "0", 1: "+", -1: "-"}
        body = _rows([[sym[int(x)] for x in row] for row in M])
    elif kind == "OD":
        E = obj.entries()
        head = [f"OD {obj.order} {obj.nvars}", "type " + " ".join(map(str, obj.type))]
        body = _rows([["0" if x == 0 else f"{'+' if x > 0 else '-'}{abs(int(x))}" for x in row] for row in E])
    elif kind == "UW":
        U = obj.matrix
        head = [f"UW {U.order} {obj.weight} {U.modulus}"]
        body = _rows([[f"e{int(e)}" if k else "0" for e, k in zip(er, kr)]
                      for er, kr in zip(U.exps, U.mask)])
    elif kind == "UOD":
        n, m = obj.order, obj.modulus
        grid = [["0"] * n for _ in range(n)]
        for v, P in enumerate(obj.parts, start=1):
            for r, c in zip(*np.nonzero(P.mask)):
                e = int(P.exps[r, c])
                grid[r][c] = f"+{v}" if e == 0 else f"e{e}*x{v}"
        head = [f"UOD {n} {obj.nvars} {m}", "type " + " ".join(map(str, obj.type))]
        body = _rows(grid)
    else:
        V = obj.values
        head = [f"INT {V.shape[0]} {V.shape[1]}"]
        body = _rows([[str(int(x)) for x in row] for row in V])
    return "\n".join([FORMAT_LINE] + head + body) + "\n"


# ---- parsing ----------------------------------------------------------------------

_OD_TOKEN = re.compile(r"^([+-])([1-9][0-9]*)$")
_UW_TOKEN = re.compile(r"^e([0-9]+)$")
_UOD_TOKEN = re.compile(r"^(?:e([0-9]+)\*x([1-9][0-9]*)|\+([1-9][0-9]*))$")
_INT_TOKEN = re.compile(r"^-?[0-9]+$")


def _ints(tokens, line, names):
    if len(tokens) != len(names):
        raise MatrixFormatError(f"header needs {len(names)} fields ({' '.join(names)})", line)
    out = []
    for col, (tok, name) in enumerate(zip(tokens, names), start=2):
        if not tok.isdigit() or int(tok) < 1:
            raise MatrixFormatError(f"{name} must be a positive integer, got {tok!r}", line, col)
        out.append(int(tok))
    return out


def parse_matrix(text: str) -> MatrixObject:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            m = re.match(r"#\s*odkit-format\s+(\S+)", s)
            if m and m.group(1) != str(FORMAT_VERSION):
                raise MatrixFormatError(f"unsupported format version {m.group(1)}", no)
            continue
        lines.append((no, s.split()))
    if not lines:
        raise MatrixFormatError("empty input")
    no, head = lines[0]
    kind = head[0]
    if kind == "W":
        n, k = _ints(head[1:], no, ("n", "k"))
        rows_start = 1
    elif kind in ("OD", "UOD"):
        names = ("n", "u") if kind == "OD" else ("n", "u", "m")
        vals = _ints(head[1:], no, names)
        n, u = vals[0], vals[1]
        if len(lines) < 2 or lines[1][1][0] != "type":
            raise MatrixFormatError("missing type line", no + 1)
        tno, ttoks = lines[1]
        type_ = _ints(ttoks[1:], tno, tuple(f"s{i + 1}" for i in range(u)))
        rows_start = 2
    elif kind == "UW":
        n, k, m = _ints(head[1:], no, ("n", "k", "m"))
        rows_start = 1
    elif kind == "INT":
        if len(head) != 3 or not all(t.isdigit() for t in head[1:]):
            raise MatrixFormatError("header needs 2 fields (rows cols)", no)
        n, ncols = int(head[1]), int(head[2])
        rows_start = 1
    else:
        raise MatrixFormatError(f"unknown kind {kind!r}", no, 1)
    width = ncols if kind == "INT" else n
    body = lines[rows_start:]
    if len(body) != n:
        where = body[n][0] if len(body) > n else None
        raise MatrixFormatError(f"expected {n} rows, found {len(body)}", where)
    for lno, toks in body:
        if len(toks) != width:
            raise MatrixFormatError(f"expected {width} tokens, found {len(toks)}", lno)

    if kind == "W":
        sym = {"0": 0, "+": 1, "-": -1}
        M = np.zeros((n, n), dtype=np.int64)
        for r, (lno, toks) in enumerate(body):
            for c, tok in enumerate(toks):
                if tok not in sym:
                    raise MatrixFormatError(f"bad token {tok!r}", lno, c + 1)
                M[r, c] = sym[tok]
        return WeighingFile(M, k)
    if kind == "OD":
        E = np.zeros((n, n), dtype=np.int64)
        for r, (lno, toks) in enumerate(body):
            for c, tok in enumerate(toks):
                if tok == "0":
                    continue
                mt = _OD_TOKEN.match(tok)
                if not mt:
                    raise MatrixFormatError(f"bad token {tok!r}", lno, c + 1)
                v = int(mt.group(2))
                if v > u:
                    raise MatrixFormatError(f"variable {v} out of range 1..{u}", lno, c + 1)
                E[r, c] = v if mt.group(1) == "+" else -v
        coeffs = np.array([(E == v).astype(np.int64) - (E == -v) for v in range(1, u + 1)])
        return OrthogonalDesign(coeffs, tuple(type_))
    if kind == "UW":
        exps = np.zeros((n, n), dtype=np.int64)
        mask = np.zeros((n, n), dtype=bool)
        for r, (lno, toks) in enumerate(body):
            for c, tok in enumerate(toks):
                if tok == "0":
                    continue
                mt = _UW_TOKEN.match(tok)
                if not mt or int(mt.group(1)) >= m:
                    raise MatrixFormatError(f"bad token {tok!r} (exponents lie in 0..{m - 1})", lno, c + 1)
                exps[r, c], mask[r, c] = int(mt.group(1)), True
        return UnitWeighingFile(UnitMatrix(exps, mask, m), k)
    if kind == "UOD":
        m = vals[2]
        exps = np.zeros((u, n, n), dtype=np.int64)
        mask = np.zeros((u, n, n), dtype=bool)
        for r, (lno, toks) in enumerate(body):
            for c, tok in enumerate(toks):
                if tok == "0":
                    continue
                mt = _UOD_TOKEN.match(tok)
                if not mt:
                    raise MatrixFormatError(f"bad token {tok!r}", lno, c + 1)
                e, v = (int(mt.group(1)), int(mt.group(2))) if mt.group(2) else (0, int(mt.group(3)))
                if v > u or e >= m:
                    raise MatrixFormatError(f"token {tok!r} out of range", lno, c + 1)
                exps[v - 1, r, c], mask[v - 1, r, c] = e, True
        return UnitOrthogonalDesign(tuple(UnitMatrix(exps[v], mask[v], m) for v in range(u)), tuple(type_))
    V = np.zeros((n, ncols), dtype=np.int64)
    for r, (lno, toks) in enumerate(body):
        for c, tok in enumerate(toks):
            if not _INT_TOKEN.match(tok):
                raise MatrixFormatError(f"bad token {tok!r}", lno, c + 1)
            V[r, c] = int(tok)
    return IntTable(V)


def header_lines(kind: str) -> int:
    """Lines before the first matrix row in rendered output."""
    return {"W": 2, "UW": 2, "INT": 2, "OD": 3, "UOD": 3}[kind]


# ---- files and certificates ---------------------------------------------------------

def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix(path: Path, obj: MatrixObject) -> str:
    """Write ``obj`` and return the digest of its text."""
    text = render_matrix(obj)
    atomic_write(path, text)
    return digest(text)


def read_matrix(path: Path) -> MatrixObject:
    return parse_matrix(Path(path).read_text())


@dataclass
class Certificate:
    kind: str
    params: dict
    checks: list[tuple[str, bool]]
    files: dict  # name -> sha256
    version: str

    def render(self) -> str:
        out = [FORMAT_LINE, "certificate: odkit", f"kind: {self.kind}", f"version: {self.version}"]
        out += [f"param.{k}: {v}" for k, v in self.params.items()]
        out += [f"check.{name}: {'pass' if ok else 'fail'}" for name, ok in self.checks]
        out += [f"file.{name}: sha256 {h}" for name, h in self.files.items()]
        return "\n".join(out) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Certificate":
        kind, version, params, checks, files = None, None, {}, [], {}
        for no, raw in enumerate(text.splitlines(), start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            key, sep, val = s.partition(": ")
            if not sep:
                raise MatrixFormatError(f"expected 'key: value', got {s!r}", no)
            if key == "kind":
                kind = val
            elif key == "version":
                version = val
            elif key.startswith("param."):
                params[key[6:]] = val
            elif key.startswith("check."):
                checks.append((key[6:], val == "pass"))
            elif key.startswith("file."):
                algo, _, h = val.partition(" ")
                if algo != "sha256":
                    raise MatrixFormatError(f"unknown digest {algo!r}", no)
                files[key[5:]] = h
            elif key != "certificate":
                raise MatrixFormatError(f"unknown key {key!r}", no)
        if kind is None or version is None:
            raise MatrixFormatError("certificate lacks kind or version")
        return cls(kind, params, checks, files, version)

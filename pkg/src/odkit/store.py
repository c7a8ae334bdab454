"""Certificate store: emit verified objects to a directory and re-verify them.

A certificate is written only after its checker passes on the in-memory
objects, and ``report`` runs the very same checker on the files read back
from disk.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import sympy

from . import __version__
from .designs import verify_od
from .errors import MatrixFormatError, OdkitError
from .exact import gram
from .scheme import build_scheme, eigenmatrices, printed_eigenmatrices, scheme_family
from .fileio import (SUFFIX, Certificate, UnitWeighingFile, WeighingFile, atomic_write,
                     digest, kind_of, parse_matrix, render_matrix)
from .unbiased import QuwParams, check_bounds, is_quasi_unbiased_pair, is_unbiased_pair
from .unit import (is_unit_bush_type, is_unit_quasi_unbiased_pair, is_unit_unbiased_pair, is_unit_weighing,
                   unit_gram, verify_unit_od)

CERT_NAME = "certificate.txt"


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


class CertificationFailed(OdkitError):
    def __init__(self, kind: str, checks: list[Check]):
        self.kind = kind
        self.checks = checks
        bad = [c for c in checks if not c.ok]
        super().__init__(f"{kind}: " + "; ".join(f"{c.name}: {c.detail}" for c in bad))

    def report(self) -> str:
        lines = ["status: fail", f"kind: {self.kind}"]
        lines += [f"check.{c.name}: {'pass' if c.ok else 'fail'}" + (f" ({c.detail})" if c.detail and not c.ok else "")
                  for c in self.checks]
        return "\n".join(lines) + "\n"


# ---- single objects ------------------------------------------------------------------

def _first_off(G: np.ndarray, target: np.ndarray) -> str:
    r, c = map(int, np.argwhere(G != target)[0])
    return f"rows {r + 1} and {c + 1}"


def check_weighing(obj: WeighingFile) -> list[Check]:
    M, k = obj.matrix, obj.weight
    if not np.isin(M, (-1, 0, 1)).all():
        return [Check("entries", False, "entries outside {0,±1}")]
    G = gram(M)
    T = k * np.eye(M.shape[0], dtype=np.int64)
    ok = np.array_equal(G, T)
    return [Check("entries", True), Check("gram", ok, "" if ok else f"W W^T != {k}I at {_first_off(G, T)}")]


def check_od(obj) -> list[Check]:
    rep = verify_od(obj)
    out = [Check(name, True) for name in rep.checks]
    if not rep:
        a, b = rep.pair
        out.append(Check(rep.check, False, f"{rep.detail} (variables {a + 1}, {b + 1})"))
    return out


def check_unit_weighing(obj: UnitWeighingFile) -> list[Check]:
    ok = is_unit_weighing(obj.matrix, obj.weight)
    detail = ""
    if not ok:
        G = unit_gram(obj.matrix).reduced
        T = np.zeros_like(G)
        n = G.shape[0]
        T[np.arange(n), np.arange(n), 0] = obj.weight
        bad = np.argwhere((G != T).any(axis=2))[0]
        detail = f"W W^* != {obj.weight}I at rows {bad[0] + 1} and {bad[1] + 1}"
    return [Check("gram", ok, detail)]


def check_unit_od(obj) -> list[Check]:
    rep = verify_unit_od(obj)
    out = [Check(name, True) for name in rep.checks]
    if not rep:
        a, b = rep.pair
        out.append(Check(rep.check, False, f"{rep.detail} (variables {a + 1}, {b + 1})"))
    return out


SINGLE = {"W": check_weighing, "OD": check_od, "UW": check_unit_weighing, "UOD": check_unit_od}


def _members(objs: dict) -> list:
    return [objs[k] for k in sorted(objs) if k.startswith("member-")]


def _each(members, fn) -> list[Check]:
    out = []
    for i, M in enumerate(members, start=1):
        for c in fn(M):
            if not c.ok:
                return out + [Check(f"member{i}.{c.name}", False, c.detail)]
    out.append(Check("members", True))
    return out


# ---- families ------------------------------------------------------------------------

def check_od_family(params: dict, objs: dict) -> list[Check]:
    D = _members(objs)
    alpha = int(params["alpha"])
    out = _each(D, check_od)
    if not out[-1].ok:
        return out
    for i, j in itertools.combinations(range(len(D)), 2):
        rep = is_unbiased_pair(D[i], D[j])
        if not rep or rep.alpha != alpha:
            return out + [Check("pairs", False, f"members {i + 1},{j + 1}: {rep.check or 'alpha'} {rep.detail}")]
    out.append(Check("pairs", True))
    b = check_bounds(D[0].order, alpha, len(D))
    out.append(Check("size_bounds", b["ok"], "" if b["ok"] else str(b)))
    return out


def check_quw_family(params: dict, objs: dict) -> list[Check]:
    W = _members(objs)
    p = QuwParams(*(int(params[x]) for x in ("n", "k", "l", "a")))
    out = _each(W, check_weighing)
    if not out[-1].ok:
        return out
    if any(M.weight != p.k or M.matrix.shape[0] != p.n for M in W):
        return out + [Check("params", False, "member order or weight differs from the parameters")]
    for i, j in itertools.combinations(range(len(W)), 2):
        rep = is_quasi_unbiased_pair(W[i].matrix, W[j].matrix, p, check_members=False)
        if not rep:
            return out + [Check("pairs", False, f"members {i + 1},{j + 1}: {rep.check} {rep.detail}")]
    return out + [Check("pairs", True)]


def check_unit_od_family(params: dict, objs: dict) -> list[Check]:
    D = _members(objs)
    alpha = int(params["alpha"])
    out = _each(D, check_unit_od)
    if not out[-1].ok:
        return out
    for i, j in itertools.combinations(range(len(D)), 2):
        rep = is_unit_unbiased_pair(D[i], D[j])
        if not rep or rep.alpha != alpha:
            return out + [Check("pairs", False, f"members {i + 1},{j + 1}: {rep.check or 'alpha'} {rep.detail}")]
    return out + [Check("pairs", True)]


def check_unit_quw_family(params: dict, objs: dict) -> list[Check]:
    W = _members(objs)
    p = tuple(int(params[x]) for x in ("n", "k", "l", "a"))
    out = _each(W, check_unit_weighing)
    if not out[-1].ok:
        return out
    for i, j in itertools.combinations(range(len(W)), 2):
        rep = is_unit_quasi_unbiased_pair(W[i].matrix, W[j].matrix, *p)
        if not rep:
            return out + [Check("pairs", False, f"members {i + 1},{j + 1}: {rep.check} {rep.detail}")]
    return out + [Check("pairs", True)]


def check_butson_bush(params: dict, objs: dict) -> list[Check]:
    q = int(params["q"])
    out = check_unit_quw_family({"n": q * q, "k": q, "l": q * q, "a": 1}, objs)
    if not all(c.ok for c in out):
        return out
    W = [M.matrix for M in _members(objs)]
    for i, j in itertools.combinations(range(len(W)), 2):
        P = unit_gram(W[i], W[j])
        form = P.monomial_form()
        if form is None or not (form[0] == 1).all():
            return out + [Check("butson", False, f"product {i + 1},{j + 1} has an entry that is not a root of unity")]
        if not is_unit_bush_type(P, q):
            return out + [Check("bush_type", False, f"product {i + 1},{j + 1}")]
    return out + [Check("butson", True), Check("bush_type", True)]


def check_scheme(params: dict, objs: dict) -> list[Check]:
    t = int(params["t"])
    idx = [int(x) - 1 for x in params["members"].split(",")]
    F = scheme_family(t, indices=idx)
    W = _members(objs)
    same = len(W) == len(F.members) and all(np.array_equal(a.matrix, b) for a, b in zip(W, F.members))
    out = [Check("members", same, "" if same else "stored members differ from the construction")]
    if not same:
        return out
    S = build_scheme(F)
    out.append(Check("axioms", True))
    if "P" in objs:
        E = eigenmatrices(S)
        P = np.array(E.P.tolist(), dtype=np.int64)
        Q = np.array(E.Q.tolist(), dtype=np.int64)
        ok = np.array_equal(objs["P"].values, P) and np.array_equal(objs["Q"].values, Q)
        out.append(Check("eigenmatrices", ok, "" if ok else "stored P or Q differ"))
        X = S.nvertices
        out.append(Check("PQ", E.P * E.Q == X * sympy.eye(E.P.shape[0])))
        P0, Q0 = printed_eigenmatrices(t, F.f)
        ok = E.P == P0 and E.Q == Q0
        out.append(Check("printed_tables", ok, "" if ok else "differs from the symbolic tables"))
    return out


FAMILY: dict[str, Callable[[dict, dict], list[Check]]] = {
    "od-family": check_od_family,
    "quw-family": check_quw_family,
    "unit-od-family": check_unit_od_family,
    "unit-quw-family": check_unit_quw_family,
    "butson-bush-family": check_butson_bush,
    "scheme": check_scheme,
}


def run_checks(kind: str, params: dict, objs: dict) -> list[Check]:
    if kind in SINGLE:
        (obj,) = objs.values()
        return SINGLE[kind](obj)
    if kind not in FAMILY:
        raise ValueError(f"unknown certificate kind {kind!r}")
    return FAMILY[kind]({k: str(v) for k, v in params.items()}, objs)


# ---- emit and report -----------------------------------------------------------------

def emit(outdir: Path, kind: str, params: dict, objs: dict) -> Path:
    """Check ``objs``, then write them and a certificate into ``outdir``."""
    checks = run_checks(kind, params, objs)
    if not checks or not all(c.ok for c in checks):
        raise CertificationFailed(kind, checks)
    outdir = Path(outdir)
    files = {}
    for name in sorted(objs):
        obj = objs[name]
        fname = name + SUFFIX[kind_of(obj)]
        text = render_matrix(obj)
        atomic_write(outdir / fname, text)
        files[fname] = digest(text)
    cert = Certificate(kind, {k: str(v) for k, v in params.items()}, [(c.name, c.ok) for c in checks],
                       files, __version__)
    path = outdir / CERT_NAME
    atomic_write(path, cert.render())
    return path


def verify_certificate(path: Path) -> list[Check]:
    path = Path(path)
    try:
        cert = Certificate.parse(path.read_text())
    except MatrixFormatError as exc:
        return [Check("certificate", False, str(exc))]
    objs, out = {}, []
    for fname, h in cert.files.items():
        f = path.parent / fname
        if not f.exists():
            return [Check("files", False, f"{fname} is missing")]
        text = f.read_text()
        if digest(text) != h:
            return [Check("digest", False, f"{fname} does not match its sha256")]
        try:
            objs[fname.rsplit(".", 1)[0]] = parse_matrix(text)
        except MatrixFormatError as exc:
            return [Check("parse", False, f"{fname}: {exc}")]
    out.append(Check("digests", True))
    try:
        checks = run_checks(cert.kind, cert.params, objs)
    except (OdkitError, ValueError) as exc:
        return out + [Check("recheck", False, str(exc))]
    recorded = dict(cert.checks)
    for c in checks:
        if c.name in recorded and recorded[c.name] != c.ok:
            out.append(Check("consistency", False, f"check {c.name} disagrees with the certificate"))
    return out + checks


def find_certificates(root: Path) -> list[Path]:
    return sorted(Path(root).rglob(CERT_NAME))


def report(root: Path) -> tuple[bool, list[str]]:
    """Re-verify every certificate below ``root``."""
    certs = find_certificates(root)
    if not certs:
        return False, [f"no certificates under {root}"]
    ok_all, lines = True, []
    for c in certs:
        checks = verify_certificate(c)
        ok = all(x.ok for x in checks)
        ok_all &= ok
        bad = "; ".join(f"{x.name}: {x.detail}" for x in checks if not x.ok)
        lines.append(f"{'PASS' if ok else 'FAIL'} {c.parent}" + (f" ({bad})" if bad else ""))
    return ok_all, lines

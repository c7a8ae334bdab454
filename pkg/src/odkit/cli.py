"""Command-line entry point: ``odkit construct|verify|family|scheme|search|report``.

Every command writes its objects and a certificate under the output
directory (``--out``, else ``$ODKIT_OUT``, else ``./odkit-out``).  The exit
status is 0 exactly when a certificate was written; certification failures
exit 1 with a report on standard error, usage and input errors exit 2.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .constructions import base_od, goethals_seidel_pair, od_with_type, weighing_power2, williamson
from .designs import OrthogonalDesign, plug_in
from .errors import MatrixFormatError, OdkitError
from .exact import sylvester
from .fileio import IntTable, UnitWeighingFile, WeighingFile, kind_of, read_matrix
from .scheme import build_scheme, eigenmatrices, maximality_certificate, scheme_family
from .store import CertificationFailed, emit, report
from .unbiased import asymptotic_pipeline, gs_plugin_family, ring_family, williamson_plugin_family
from .unit import UnitMatrix, UnitOrthogonalDesign, butson_bush_family, unit_ring_family


class UsageError(Exception):
    pass


def _log2(n: int, what: str) -> int:
    t = n.bit_length() - 1
    if n < 1 or 1 << t != n:
        raise UsageError(f"{what} must be a power of 2")
    return t


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _od_spec(spec: str) -> OrthogonalDesign:
    """``base:t<k>``, ``type:<t>:<s1,s2,..>`` or a path to an OD file."""
    if spec.startswith("base:t"):
        return base_od(int(spec[6:]))
    if spec.startswith("type:"):
        _, t, parts = spec.split(":")
        return od_with_type(int(t), _ints(parts))
    obj = read_matrix(Path(spec))
    if not isinstance(obj, OrthogonalDesign):
        raise UsageError(f"{spec} does not hold an OD")
    return obj


def _members(mats, wrap) -> dict:
    return {f"member-{i:02d}": wrap(M) for i, M in enumerate(mats, start=1)}


def _quw_objs(Q) -> tuple[dict, dict]:
    n, k, l, a = Q.params.astuple()
    return {"n": n, "k": k, "l": l, "a": a, "size": Q.size}, _members(Q.members, lambda M: WeighingFile(M, k))


def _emit(out: Path, kind: str, params: dict, objs: dict) -> Path:
    path = emit(out, kind, params, objs)
    print(f"certificate: {path}")
    for k, v in params.items():
        print(f"  {k}: {v}")
    return path


# ---- construct ---------------------------------------------------------------------

def cmd_construct(args, cfg, out: Path) -> None:
    what = args.what
    if what == "od":
        t = _log2(args.order, "--order")
        D = od_with_type(t, _ints(args.type))
        _emit(out / f"od-{args.order}-{'-'.join(map(str, D.type))}", "OD", {}, {"design": D})
    elif what == "weighing":
        t = _log2(args.order, "--order")
        W = weighing_power2(t, args.weight)
        _emit(out / f"weighing-{args.order}-{args.weight}", "W", {}, {"matrix": WeighingFile(W, args.weight)})
    elif what == "hadamard":
        t = _log2(args.order, "--order")
        _emit(out / f"hadamard-{args.order}", "W", {}, {"matrix": WeighingFile(sylvester(t), args.order)})
    elif what == "fourier":
        q = args.q
        _emit(out / f"fourier-{q}", "UW", {}, {"matrix": UnitWeighingFile(UnitMatrix.fourier(q), q)})


# ---- verify ------------------------------------------------------------------------

def cmd_verify(args, cfg, out: Path) -> int:
    status = 0
    for f in args.files:
        path = Path(f)
        try:
            obj = read_matrix(path)
        except MatrixFormatError as exc:
            print(f"status: fail\nfile: {path}\nerror: {exc}", file=sys.stderr)
            status = 1
            continue
        kind = kind_of(obj)
        if kind == "INT":
            print(f"status: fail\nfile: {path}\nerror: integer tables carry no certificate", file=sys.stderr)
            status = 1
            continue
        try:
            _emit(out / "verify" / path.stem, kind, {}, {path.stem: obj})
        except CertificationFailed as exc:
            print(f"file: {path}\n" + exc.report(), file=sys.stderr, end="")
            status = 1
    return status


# ---- family ------------------------------------------------------------------------

def _weighing_arg(args) -> np.ndarray:
    if args.weighing:
        obj = read_matrix(Path(args.weighing))
        if not isinstance(obj, WeighingFile):
            raise UsageError(f"{args.weighing} does not hold a W matrix")
        return obj.matrix
    if args.weight is None:
        raise UsageError("give --weight or --weighing")
    return weighing_power2(_log2(args.m, "--m"), args.weight)


def cmd_family(args, cfg, out: Path) -> None:
    which = args.which
    if which == "ring":
        W = _weighing_arg(args)
        if W.shape[0] != args.m:
            raise UsageError("weighing matrix order differs from --m")
        K = _od_spec(args.od)
        subsets = [[v - 1 for v in _ints(s)] for s in args.subset]
        r = ring_family(args.q, W, K, subsets, budget=cfg["search.ring.budget"])
        F = r.family
        base = out / f"ring-q{args.q}-m{args.m}-k{int(W[0] @ W[0])}"
        params = {"alpha": F.alpha, "size": F.size, "target_size": F.target_size,
                  "order": F.order, "type": ",".join(map(str, F.type))}
        if F.excluded:
            params["excluded"] = ",".join(str(i + 1) for i, _ in F.excluded)
        _emit(base, "od-family", params, _members(F.members, lambda D: D))
        for S, Q in r.substituted.items():
            p, objs = _quw_objs(Q)
            _emit(base / f"subset-{'-'.join(str(v + 1) for v in S)}", "quw-family", p, objs)
    elif which == "unit-ring":
        W = UnitMatrix.fourier(args.m) if args.fourier else UnitMatrix.from_signs(_weighing_arg(args))
        K = (UnitOrthogonalDesign((UnitMatrix.identity(args.m, W.modulus),), (1,)) if args.od == "trivial"
             else _od_spec(args.od))
        subsets = [[v - 1 for v in _ints(s)] for s in args.subset]
        r = unit_ring_family(args.q, W, K, subsets, budget=cfg["search.ring.budget"])
        F = r.family
        base = out / f"unit-ring-q{args.q}-m{args.m}"
        _emit(base, "unit-od-family", {"alpha": F.alpha, "size": F.size, "target_size": F.target_size},
              _members(F.members, lambda D: D))
        for S, Q in r.substituted.items():
            n, k, l, a = Q.params
            _emit(base / f"subset-{'-'.join(str(v + 1) for v in S)}", "unit-quw-family",
                  {"n": n, "k": k, "l": l, "a": a}, _members(Q.members, lambda M: UnitWeighingFile(M, k)))
    elif which == "williamson":
        Q = williamson_plugin_family(args.n, max_n=cfg["search.williamson.max_n"])
        p, objs = _quw_objs(Q)
        _emit(out / f"williamson-{args.n}", "quw-family", p, objs)
    elif which == "gs":
        Q = gs_plugin_family(args.p, max_q=cfg["search.gs.max_q"])
        p, objs = _quw_objs(Q)
        _emit(out / f"gs-{args.p}", "quw-family", p, objs)
    elif which == "asymptotic":
        Q = asymptotic_pipeline(args.q, args.t, _ints(args.type) if args.type else None)
        p, objs = _quw_objs(Q)
        _emit(out / f"asymptotic-q{args.q}", "quw-family", p, objs)
    elif which == "butson":
        B = butson_bush_family(args.q, max_q=cfg["search.butson.max_q"])
        _emit(out / f"butson-{args.q}", "butson-bush-family", {"q": args.q},
              _members(B.members, lambda M: UnitWeighingFile(M, args.q)))


# ---- scheme ------------------------------------------------------------------------

def cmd_scheme(args, cfg, out: Path) -> None:
    idx = [i - 1 for i in _ints(args.members)] if args.members else None
    F = scheme_family(args.t, args.f if idx is None else None, idx)
    members = ",".join(str(i + 1) for i in F.indices)
    tag = f"f{F.f}" if idx is None else "m" + "-".join(str(i + 1) for i in idx)
    base = out / f"scheme-t{args.t}-{tag}"
    objs = _members(F.members, lambda M: WeighingFile(M, 2 ** args.t))
    if args.emit_eigenmatrices:
        E = eigenmatrices(build_scheme(F))
        objs["P"] = IntTable(np.array(E.P.tolist(), dtype=np.int64))
        objs["Q"] = IntTable(np.array(E.Q.tolist(), dtype=np.int64))
    _emit(base, "scheme", {"t": args.t, "f": F.f, "members": members}, objs)
    if args.emit_eigenmatrices:
        for name in ("P", "Q"):
            print(f"{name}:")
            for row in objs[name].values:
                print("  " + " ".join(str(int(x)) for x in row))
    if args.maximality:
        r = maximality_certificate(args.t, F.indices)
        print(f"maximality: {'maximal' if r.maximal else 'extension found'} ({r.candidates} candidates)")


# ---- search ------------------------------------------------------------------------

def cmd_search(args, cfg, out: Path) -> None:
    what = args.what
    if what == "gs":
        R, S = goethals_seidel_pair(args.p, max_q=cfg["search.gs.max_q"])
        Rf, Sf = R[0].tolist(), S[0].tolist()
        print(f"R first row: {Rf}\nS first row: {Sf}")
        # the pair certifies through the Hadamard matrix it yields
        Q = gs_plugin_family(args.p, max_q=cfg["search.gs.max_q"])
        p, objs = _quw_objs(Q)
        _emit(out / f"search-gs-{args.p}", "quw-family", p, objs)
    elif what == "williamson":
        A, B, C, D = williamson(args.n, max_n=cfg["search.williamson.max_n"])
        for name, X in zip("ABCD", (A, B, C, D)):
            print(f"{name} first row: {X[0].tolist()}")
        H = _williamson_hadamard(A, B, C, D)
        _emit(out / f"search-williamson-{args.n}", "W", {}, {"hadamard": WeighingFile(H, 4 * args.n)})
    elif what == "od":
        t = _log2(args.order, "--order")
        D = od_with_type(t, _ints(args.type))
        _emit(out / f"search-od-{args.order}-{'-'.join(map(str, D.type))}", "OD", {}, {"design": D})


def _williamson_hadamard(A, B, C, D) -> np.ndarray:
    return plug_in(base_od(2), [A, B, C, D])


# ---- main --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default $ODKIT_OUT or ./odkit-out)")
    common.add_argument("--config", help="key=value file with search budgets")

    p = argparse.ArgumentParser(prog="odkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"odkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[common], help="build one matrix or design")
    c.add_argument("what", choices=["od", "weighing", "hadamard", "fourier"])
    c.add_argument("--order", type=int)
    c.add_argument("--type", help="comma-separated type, e.g. 1,1,2")
    c.add_argument("--weight", type=int)
    c.add_argument("--q", type=int)

    v = sub.add_parser("verify", parents=[common], help="verify matrix files and certify them")
    v.add_argument("files", nargs="+")

    f = sub.add_parser("family", parents=[common], help="build and certify an unbiased family")
    f.add_argument("which", choices=["ring", "unit-ring", "williamson", "gs", "asymptotic", "butson"])
    f.add_argument("--q", type=int)
    f.add_argument("--m", type=int)
    f.add_argument("--weight", type=int)
    f.add_argument("--weighing", help="file holding the W(m,k) to use")
    f.add_argument("--fourier", action="store_true", help="use the Fourier matrix of order m")
    f.add_argument("--od", default="base:t1", help="base:t<k>, type:<t>:<parts>, trivial, or a file")
    f.add_argument("--subset", action="append", default=[], help="1-based variables set to 1")
    f.add_argument("--n", type=int)
    f.add_argument("--p", type=int)
    f.add_argument("--t", type=int)
    f.add_argument("--type")

    s = sub.add_parser("scheme", parents=[common], help="association scheme of the power-of-two family")
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--f", type=int)
    s.add_argument("--members", help="1-based member indices instead of --f")
    s.add_argument("--emit-eigenmatrices", action="store_true")
    s.add_argument("--maximality", action="store_true")

    se = sub.add_parser("search", parents=[common], help="run a bounded search")
    se.add_argument("what", choices=["gs", "williamson", "od"])
    se.add_argument("--p", type=int)
    se.add_argument("--n", type=int)
    se.add_argument("--order", type=int)
    se.add_argument("--type")

    r = sub.add_parser("report", parents=[common], help="re-verify every certificate in a directory")
    r.add_argument("directory", nargs="?")
    return p


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))


REQUIRED = {
    ("construct", "od"): ("order", "type"),
    ("construct", "weighing"): ("order", "weight"),
    ("construct", "hadamard"): ("order",),
    ("construct", "fourier"): ("q",),
    ("family", "ring"): ("q", "m"),
    ("family", "unit-ring"): ("q", "m"),
    ("family", "williamson"): ("n",),
    ("family", "gs"): ("p",),
    ("family", "asymptotic"): ("q",),
    ("family", "butson"): ("q",),
    ("search", "gs"): ("p",),
    ("search", "williamson"): ("n",),
    ("search", "od"): ("order", "type"),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out or os.environ.get("ODKIT_OUT") or "odkit-out")
    try:
        cfg = load_config(args.config)
        sel = getattr(args, "what", None) or getattr(args, "which", None)
        _need(args, *REQUIRED.get((args.command, sel), ()))
        if args.command == "construct":
            cmd_construct(args, cfg, out)
        elif args.command == "verify":
            return cmd_verify(args, cfg, out)
        elif args.command == "family":
            cmd_family(args, cfg, out)
        elif args.command == "scheme":
            if args.f is None and args.members is None:
                raise UsageError("give --f or --members")
            cmd_scheme(args, cfg, out)
        elif args.command == "search":
            cmd_search(args, cfg, out)
        elif args.command == "report":
            ok, lines = report(Path(args.directory) if args.directory else out)
            print("\n".join(lines))
            return 0 if ok else 1
    except CertificationFailed as exc:
        print(exc.report(), file=sys.stderr, end="")
        return 1
    except (UsageError, MatrixFormatError, ValueError) as exc:
        print(f"status: fail\nerror: {exc}", file=sys.stderr)
        return 2
    except OdkitError as exc:
        print(f"status: fail\nerror: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

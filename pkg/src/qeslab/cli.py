"""``qeslab`` command-line workbench.

Exit codes: 0 success or certified, 1 negative verdict or oracle mismatch,
2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from .diffop import DegreeProfile, MatrixDiffOp
from .errors import CountMismatch, QESError
from .models import (
    FAMILIES,
    OffDiag,
    build,
    hyper_qes_params,
    params_from_dict,
    params_to_dict,
    tomllib,
    trig_qes_params,
)
from .numkernel import multiset_distance
from .qescert import candidate_basis, certify, closure_check
from .recurrence import degree_estimate, find_qes_energies, qes_determinant, truncation_tail
from .spectrum import algebraic_spectrum
from .sweep import critical, scan

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2
CLOSURE_LIMIT = 1e-8
ORACLE_LIMIT = 1e-6


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _cpair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# --- parameter assembly ------------------------------------------------------------

# flag dest -> params field, per family
_FLAG_FIELDS = {
    "sextic": {"m": "m", "p2": "p2", "kappa0": "kappa0"},
    "trig": {"n": "n", "m": "m", "rho": "rho", "c": "c", "c_tilde": "c_tilde", "a": "a",
             "wtype": "wtype", "offdiag": "offdiag"},
    "hyper": {"n": "n", "N": "N", "rho": "rho", "c": "c", "c_tilde": "c_tilde"},
    "quartic": {"n": "n", "a": "a", "b": "b", "d": "d", "wtilde": "w_tilde", "lam": "lam"},
}
_DEFAULTS = {
    "sextic": {"m": 2, "p2": 1.0, "kappa0": 1.0},
    "trig": {"n": 1, "m": 1.0, "rho": 0.3, "c": 1.0, "wtype": "i"},
    "hyper": {"n": 1, "N": 0.0, "rho": 0.5, "c": 1.0, "c_tilde": 0.0},
    "quartic": {"n": 2, "a": 1.0, "b": 1.0, "d": 0.0, "w_tilde": 0.5, "lam": 1.0},
}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc


def _merge(family: str, args) -> dict:
    doc = dict(_DEFAULTS[family])
    cfg = _load_config(getattr(args, "config", None))
    cfg.pop("family", None)
    for key in list(cfg):
        # config complex fields may come split as name_re/name_im
        if key.endswith(("_re", "_im")):
            base = key[:-3]
            z = complex(doc.get(base, 0.0)) if base in doc else 0j
            part = float(cfg.pop(key))
            doc[base] = complex(part, z.imag) if key.endswith("_re") else complex(z.real, part)
    doc.update(cfg)
    for dest, fld in _FLAG_FIELDS[family].items():
        v = getattr(args, dest, None)
        if v is not None:
            doc[fld] = v
    return doc


def params_from_args(family: str, args):
    """Build a params object from defaults, ``--config`` and explicit flags (in that order)."""
    doc = _merge(family, args)
    try:
        if family == "sextic":
            m = float(doc["m"])
            if m != int(m) or m < 1:
                raise UsageError("sextic --m must be a positive integer")
            doc["m"] = int(m)
            return params_from_dict(doc, "sextic")
        if family == "quartic":
            doc["n"] = int(doc["n"])
            return params_from_dict(doc, "quartic")
        if family == "trig":
            if "m_tilde" in doc and "c_tilde" in doc:
                p = params_from_dict(doc, "trig")
            else:
                p = trig_qes_params(int(doc["n"]), float(doc["m"]), float(doc["rho"]),
                                    complex(doc["c"]), doc["wtype"], float(doc.get("a", 0.0)),
                                    complex(doc.get("c_tilde", 0.0)))
                if "offdiag" in doc:
                    p = dataclasses.replace(p, offdiag=OffDiag(doc["offdiag"]))
            if getattr(args, "m_tilde_override", None) is not None:
                p = dataclasses.replace(p, m_tilde=args.m_tilde_override)
            return p
        if family == "hyper":
            if "d_tilde" in doc:
                return params_from_dict(doc, "hyper")
            return hyper_qes_params(int(doc["n"]), float(doc["N"]), float(doc["rho"]),
                                    complex(doc["c"]), complex(doc.get("c_tilde", 0.0)))
    except UsageError:
        raise
    except (TypeError, ValueError, KeyError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid {family} parameters: {exc}") from exc
    raise UsageError(f"unknown family {family!r}")


def operator_from_args(args):
    """Return ``(op, profile, params_or_None)`` for the selected family."""
    if args.family == "op":
        if not args.op_file or args.profile is None:
            raise UsageError("family 'op' needs --op-file and --profile D1 D2")
        try:
            with open(args.op_file) as fh:
                op = MatrixDiffOp.from_json(fh.read())
            prof = DegreeProfile(*args.profile)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        return op, prof, None
    p = params_from_args(args.family, args)
    op, prof = build(p)
    return op, prof, p


# --- output --------------------------------------------------------------------------


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _fmt(args, default: str = "json") -> str:
    return args.format or default


# --- subcommands ------------------------------------------------------------------


def cmd_certify(args) -> int:
    op, prof, p = operator_from_args(args)
    cert = certify(op, prof, args.tol)
    try:
        closure = closure_check(op, candidate_basis(cert, prof))
    except QESError:
        closure = math.nan
    out = {"family": args.family, "profile": [prof.d1, prof.d2], **cert.to_dict(),
           "closure_residual": closure}
    if p is not None:
        out["params"] = _jsonable(params_to_dict(p))
    if _fmt(args) == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("verdict", "rank_M1", "residual_cond_i", "residual_cond_ii_M0",
                    "residual_cond_ii_transpose", "closure_residual"))
        w.writerow((cert.verdict.value, cert.rank_M1, cert.residual_cond_i,
                    cert.residual_cond_ii_M0, cert.residual_cond_ii_transpose, closure))
        _emit(args, buf.getvalue())
    else:
        _emit(args, _json(out))
    return EXIT_OK if cert.certified else EXIT_NEGATIVE


def cmd_spectrum(args) -> int:
    op, prof, _ = operator_from_args(args)
    cert = certify(op, prof, args.tol)
    if not cert.certified:
        print(f"qeslab: operator not certified ({cert.verdict.value})", file=sys.stderr)
        return EXIT_NEGATIVE
    res = algebraic_spectrum(op, cert, prof, args.realness_tol)
    if _fmt(args) == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("re", "im"))
        for e in res.eigenvalues:
            w.writerow((repr(float(e.real)), repr(float(e.imag))))
        _emit(args, buf.getvalue())
    else:
        _emit(args, _json(res.to_dict()))
    return EXIT_OK


def cmd_scan(args) -> int:
    res = scan(
        args.n or 2, args.wtype or "i",
        (args.m_min, args.m_max), args.m_steps,
        (args.rho_min, args.rho_max), args.rho_steps,
        c=args.c if args.c is not None else 1.0,
        tol=args.tol, realness_tol=args.realness_tol, workers=args.workers,
    )
    if _fmt(args, "csv") == "csv":
        _emit(args, res.to_csv())
    else:
        _emit(args, _json(res.to_dict()))
    bad = [r for r in res.rows if r.real_count >= 0 and not r.closure_residual < CLOSURE_LIMIT]
    return EXIT_NEGATIVE if bad else EXIT_OK


def cmd_critical(args) -> int:
    Ms = [args.m] if args.m is not None else np.linspace(args.m_min, args.m_max, args.m_steps)
    curve = critical(
        args.n or 2, Ms, args.wtype or "i",
        (args.rho_min, args.rho_max), args.rho_steps,
        c=args.c if args.c is not None else 1.0,
        tol=args.tol, realness_tol=args.realness_tol, workers=args.workers,
    )
    _emit(args, curve.to_csv() if _fmt(args) == "csv" else _json(curve.to_dict()))
    return EXIT_OK


def cmd_recur(args) -> int:
    p = params_from_args("quartic", args)
    box = tuple(args.box) if args.box else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CountMismatch)
        energies = find_qes_energies(p, box)
    op, prof = build(p)
    spec = algebraic_spectrum(op, certify(op, prof, args.tol), prof, args.realness_tol)
    if len(energies) == len(spec.eigenvalues):
        distance = multiset_distance(energies, spec.eigenvalues)
    else:
        distance = math.inf
    match = distance < ORACLE_LIMIT
    out = {
        "energies": [_cpair(e) for e in energies],
        "matrix_energies": [_cpair(e) for e in spec.eigenvalues],
        "max_distance": None if math.isinf(distance) else distance,
        "oracle_match": bool(match),
        "degree_estimate": degree_estimate(p),
        "truncation_tail": max((truncation_tail(p, e) for e in energies), default=None),
        "warnings": [str(w.message) for w in caught],
    }
    if args.det_samples:
        re_min, re_max, im_min, im_max = box or (-10.0, 10.0, -10.0, 10.0)
        X, Y = np.meshgrid(np.linspace(re_min, re_max, 41), np.linspace(im_min, im_max, 41))
        dets = qes_determinant(p, (X + 1j * Y).ravel())
        with open(args.det_samples, "w", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("E_re", "E_im", "det_re", "det_im"))
            for e, d in zip((X + 1j * Y).ravel(), dets):
                w.writerow((repr(e.real), repr(e.imag), repr(d.real), repr(d.imag)))
        out["det_samples"] = args.det_samples
    _emit(args, _json(out))
    return EXIT_OK if match else EXIT_NEGATIVE


def cmd_models_list(args) -> int:
    out = {
        name: [f.name for f in dataclasses.fields(cls)] for name, cls in FAMILIES.items()
    }
    _emit(args, _json(out))
    return EXIT_OK


def _jsonable(doc: dict) -> dict:
    return {k: (v if isinstance(v, (int, float, str, bool)) or v is None else str(v))
            for k, v in doc.items()}


# --- parser --------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    sp.add_argument("--out", help="output file (default stdout)")
    sp.add_argument("--tol", type=float, default=1e-9, help="certification tolerance")
    sp.add_argument("--realness-tol", type=float, default=1e-8,
                    help="|Im E| <= tol * (1 + |Re E|) counts as real")
    sp.add_argument("--config", help="TOML file with model parameters; flags override it")


def _model_flags(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("model parameters")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=float, help="sextic m, or trig coupling M")
    g.add_argument("--p2", type=float)
    g.add_argument("--kappa0", type=float)
    g.add_argument("--wtype", choices=["i", "ii", "iii", "iv"])
    g.add_argument("--offdiag", choices=["sinxcosx", "cos2x_plus_d", "cosx", "sinx"])
    g.add_argument("--rho", type=float)
    g.add_argument("--c", type=parse_complex)
    g.add_argument("--c-tilde", type=parse_complex)
    g.add_argument("--m-tilde-override", type=float,
                   help="replace the solved trig M~ (for de-certification experiments)")
    g.add_argument("--N", type=float, help="hyperbolic N = (M - 1)/2")
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--d", type=float)
    g.add_argument("--wtilde", type=float)
    g.add_argument("--lambda", dest="lam", type=parse_complex)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qeslab", description="QES matrix operator workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("certify", cmd_certify, "test a model or operator for an invariant space"),
        ("spectrum", cmd_spectrum, "algebraic eigenvalues of a certified model"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("family", choices=[*FAMILIES, "op"])
        sp.add_argument("--op-file", help="operator JSON (family 'op')")
        sp.add_argument("--profile", type=int, nargs=2, metavar=("D1", "D2"))
        _common(sp)
        _model_flags(sp)
        sp.set_defaults(func=fn)

    for name, fn in (("scan", cmd_scan), ("critical", cmd_critical)):
        sp = sub.add_parser(name, help=f"trigonometric-family {name} over the (M, rho) plane")
        _common(sp)
        sp.add_argument("--n", type=int, default=2)
        sp.add_argument("--wtype", choices=["i", "ii", "iii", "iv"], default="i")
        sp.add_argument("--c", type=parse_complex)
        sp.add_argument("--m", type=float, help="single M value (critical only)")
        sp.add_argument("--m-min", type=float, default=0.0)
        sp.add_argument("--m-max", type=float, default=3.0)
        sp.add_argument("--m-steps", type=int, default=31 if name == "scan" else 7)
        sp.add_argument("--rho-min", type=float, default=0.02 if name == "scan" else 0.01)
        sp.add_argument("--rho-max", type=float, default=2.0)
        sp.add_argument("--rho-steps", type=int, default=100 if name == "scan" else 200)
        sp.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1))
        sp.set_defaults(func=fn)

    sp = sub.add_parser("recur", help="quartic recurrence energies vs matrix representation")
    _common(sp)
    _model_flags(sp)
    sp.add_argument("--box", type=float, nargs=4, metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    sp.add_argument("--det-samples", help="write a CSV of determinant samples here")
    sp.set_defaults(func=cmd_recur)

    sp = sub.add_parser("models-list", help="list model families and their fields")
    _common(sp)
    sp.set_defaults(func=cmd_models_list)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qeslab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QESError as exc:
        print(f"qeslab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())

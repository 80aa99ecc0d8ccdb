"""Command-line interface.

Subcommands: ``classify``, ``scan``, ``choi``, ``compose``, ``ppt2``,
``oracle``, ``twirl``.  Exit codes: 0 success, 2 validation error (including
malformed JSON, reported with line and column), 1 internal error.  Floats are
printed with 17 significant digits.  ``EQUICHAN_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .channels import (
    DiagonalParams,
    ProductParams,
    UnitaryParams,
    params_from_json,
    params_to_json,
    twirl,
)
from .choi import (
    choi_du_reduced,
    choi_generic,
    cluster_spectrum,
    product_choi_eigs,
)
from .classify import class_report
from .compose import compose, power, ppt2_check, sample_ppt_points
from .errors import EquichanError
from .linalg import Tolerance, hermitian_eigenvalues, matrix_from_json, matrix_to_json
from .oracle import region_scan, rows_to_csv, scan_header, scan_spec_from_json, schwarz_falsify

SEED_ENV = "EQUICHAN_SEED"


class _JSONError(Exception):
    def __init__(self, source: str, err: json.JSONDecodeError):
        super().__init__(f"malformed JSON in {source}: line {err.lineno} column {err.colno}: {err.msg}")


# ---------------------------------------------------------------- output


def _num(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x + 0.0, ".17g")  # + 0.0 folds -0.0 into 0.0


def dumps(obj, indent: int | None = None, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    nl = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{nl}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj)
        if flat or indent is None:
            return "[" + ", ".join(dumps(v, None) for v in obj) + "]"
        items = [f"{nl}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _read_json(path: str):
    if path == "-":
        text, source = sys.stdin.read(), "<stdin>"
    else:
        with open(path, encoding="utf-8") as fh:
            text, source = fh.read(), path
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise _JSONError(source, err) from None


# ---------------------------------------------------------------- inputs


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            s = int(env, 0)
        except ValueError:
            raise EquichanError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    else:
        s = args.seed
    if s < 0 or s >= 2**64:
        raise EquichanError("seed must lie in [0, 2^64)")
    return s


def _tol(args) -> Tolerance:
    return Tolerance(eig_zero=args.eig_zero, herm_sym=args.herm_sym)


def _complex(re, im) -> complex | float:
    return float(re) if not im else complex(re, im)


def _params(args):
    """Params from ``--params`` or from the family shorthand flags."""
    if getattr(args, "params", None):
        return params_from_json(_read_json(args.params))
    fam = (args.family or "").upper()
    if not fam:
        raise EquichanError("give --params FILE or --family with its parameters")
    lam = None if args.lam is None else _complex(args.lam, args.lam_im)
    if fam == "U":
        if args.n is None or args.lam is None:
            raise EquichanError("--family U needs --n and --lambda")
        return UnitaryParams(args.n, _complex(args.sigma, args.sigma_im), lam)
    if fam == "DU2":
        if args.c12 is None or args.c21 is None or args.lam is None:
            raise EquichanError("--family DU2 needs --c12, --c21 and --lambda")
        return DiagonalParams.du2(args.c12, args.c21, lam)
    if fam == "DU3S":
        if args.p is None or args.lam is None:
            raise EquichanError("--family DU3S needs --p and --lambda")
        return DiagonalParams.du3_symmetric(args.p, lam)
    if fam in ("PROD", "PRODUCT"):
        if args.n1 is None or args.n2 is None:
            raise EquichanError("--family PROD needs --n1 and --n2")
        return ProductParams(args.n1, args.n2, args.l00, args.l01, args.l10, args.l11)
    if fam == "DU":
        raise EquichanError("general DU maps must be given with --params FILE")
    raise EquichanError(f"unknown family {args.family!r}")


def _add_params(p: argparse.ArgumentParser, required_family: bool = False) -> None:
    g = p.add_argument_group("parameters")
    g.add_argument("--params", help="params JSON file ('-' for stdin)")
    g.add_argument("--family", help="U, DU2, DU3S or PROD (shorthand flags below)", required=required_family)
    g.add_argument("--n", type=int)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--sigma-im", type=float, default=0.0)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--lambda-im", dest="lam_im", type=float, default=0.0)
    g.add_argument("--c12", type=float)
    g.add_argument("--c21", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--n1", type=int)
    g.add_argument("--n2", type=int)
    g.add_argument("--l00", type=float, default=1.0)
    g.add_argument("--l01", type=float, default=0.0)
    g.add_argument("--l10", type=float, default=0.0)
    g.add_argument("--l11", type=float, default=0.0)


# ---------------------------------------------------------------- commands


def cmd_classify(args) -> int:
    report = class_report(_params(args), _tol(args))
    with _output(args.out) as fh:
        fh.write(dumps(report, indent=2) + "\n")
    return 0


def cmd_scan(args) -> int:
    obj = _read_json(args.spec)
    if isinstance(obj, dict):
        if args.workers is not None:
            obj["workers"] = args.workers
        if os.environ.get(SEED_ENV, "").strip() or args.seed_given:
            obj["seed"] = _seed(args)
    spec = scan_spec_from_json(obj)
    rows = region_scan(spec)
    with _output(args.out) as fh:
        fh.write(rows_to_csv(rows, scan_header(spec)))
    return 0


def _spectra_rows(p, tol: Tolerance):
    C = choi_generic(p)
    rows = []
    analytic = None
    if isinstance(p, UnitaryParams) and p.sigma == 1:
        lam = complex(p.lam)
        if lam.imag == 0:
            n = p.n
            analytic = [(n * lam.real + (1 - lam.real) / n, 1), ((1 - lam.real) / n, n * n - 1)]
    elif isinstance(p, DiagonalParams):
        offs, red = choi_du_reduced(p)
        if np.allclose(red, red.conj().T) and not np.any(np.imag(offs)):
            ev = np.concatenate([np.real(offs), hermitian_eigenvalues(red, tol)])
            analytic = cluster_spectrum(ev)
    elif isinstance(p, ProductParams):
        spec = product_choi_eigs(p)
        if all(complex(v).imag == 0 for v, _ in spec):
            merged = cluster_spectrum(spec.expanded())
            analytic = merged
    if analytic is not None:
        merged = cluster_spectrum(np.concatenate([np.full(m, float(np.real(v))) for v, m in analytic]))
        rows += [(v, m, "analytic") for v, m in merged]
    try:
        num = hermitian_eigenvalues(C.matrix, tol)
        rows += [(v, m, "numeric") for v, m in cluster_spectrum(num)]
    except EquichanError:
        pass  # non-Hermitian Choi matrix: no real spectrum to report
    return C, rows


def cmd_choi(args) -> int:
    p = _params(args)
    C, rows = _spectra_rows(p, _tol(args))
    doc = {"dim_in": C.dim_in, "dim_out": C.dim_out, **matrix_to_json(C.matrix)}
    csv_text = "eigenvalue,multiplicity,source\n" + "".join(f"{_num(v)},{m},{s}\n" for v, m, s in rows)
    if args.out in (None, "-") and args.spectra in (None, "-"):
        sys.stdout.write(dumps(doc) + "\n\n" + csv_text)
        return 0
    with _output(args.out) as fh:
        fh.write(dumps(doc) + "\n")
    with _output(args.spectra) as fh:
        fh.write(csv_text)
    return 0


def cmd_compose(args) -> int:
    p = params_from_json(_read_json(args.params))
    if args.with_params and args.power is not None:
        raise EquichanError("use either --with or --power")
    if args.with_params:
        out = compose(p, params_from_json(_read_json(args.with_params)))
    elif args.power is not None:
        out = power(p, args.power)
    else:
        raise EquichanError("compose needs --with FILE or --power K")
    with _output(args.out) as fh:
        fh.write(dumps(params_to_json(out)) + "\n")
    return 0


def cmd_ppt2(args) -> int:
    tol = _tol(args)
    if args.samples:
        fam = (args.family or "").upper()
        if fam == "PROD":
            if (args.n1, args.n2) not in ((2, 2), (2, 3)):
                raise EquichanError("--samples with PROD needs --n1 2 --n2 2 or --n2 3")
            cls = f"PROD{args.n1}{args.n2}"
        elif fam in ("U", "DU2", "DU3S"):
            cls = fam
        else:
            raise EquichanError("--samples needs --family U, DU2, DU3S or PROD")
        pts = sample_ppt_points(cls, args.samples, _seed(args), n=args.n or 2)
    else:
        pts = [_params(args)]
    with _output(args.out) as fh:
        for p in pts:
            fh.write(dumps(ppt2_check(p, tol).to_json()) + "\n")
    return 0


def cmd_oracle(args) -> int:
    p = _params(args)
    w = schwarz_falsify(p, budget=args.budget, seed=_seed(args), tol=_tol(args), refine=args.refine)
    with _output(args.out) as fh:
        fh.write(("none" if w is None else dumps(w.to_json())) + "\n")
    return 0


def cmd_twirl(args) -> int:
    obj = _read_json(args.choi)
    M = matrix_from_json(obj)
    fam = args.family.upper()
    if fam in ("PROD", "PRODUCT"):
        if args.n1 is None or args.n2 is None:
            raise EquichanError("--family PROD needs --n1 and --n2")
        dims = (args.n1, args.n2)
    else:
        dims = args.n if args.n is not None else int(round(math.sqrt(M.shape[0])))
    p, res = twirl(M, fam, dims)
    with _output(args.out) as fh:
        fh.write(dumps({"params": params_to_json(p), "residual": res}) + "\n")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equichan", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eig-zero", type=float, default=1e-9, help="PSD eigenvalue tolerance")
    common.add_argument("--herm-sym", type=float, default=1e-9, help="Hermiticity tolerance")
    common.add_argument("--out", help="output path (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="region verdicts for one channel")
    _add_params(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan", parents=[common], help="grid scan to CSV")
    p.add_argument("--spec", required=True, help="scan spec JSON ('-' for stdin)")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("choi", parents=[common], help="Choi matrix and spectra")
    _add_params(p)
    p.add_argument("--spectra", help="spectra CSV path")
    p.set_defaults(func=cmd_choi)

    p = sub.add_parser("compose", parents=[common], help="compose or power parameters")
    p.add_argument("--params", required=True)
    p.add_argument("--with", dest="with_params", help="params applied first")
    p.add_argument("--power", type=int)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("ppt2", parents=[common], help="PPT-squared check (JSONL)")
    _add_params(p)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ppt2)

    p = sub.add_parser("oracle", parents=[common], help="single-point Schwarz falsification")
    _add_params(p)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("twirl", parents=[common], help="project a Choi matrix onto a family")
    p.add_argument("--choi", required=True, help="matrix JSON file")
    p.add_argument("--family", required=True, help="U, DU or PROD")
    p.add_argument("--n", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.set_defaults(func=cmd_twirl)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "scan":
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = 0
    try:
        return args.func(args)
    except (_JSONError, EquichanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()

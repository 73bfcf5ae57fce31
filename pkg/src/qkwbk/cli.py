"""The ``wbk`` command line tool.

Verbs: dim, edges, bound, derive, solve, verify, classify, report.
Output is deterministic (sorted ids, no timestamps); all file I/O is UTF-8
JSON except LaTeX output.  The environment variable WBK_DB overrides the
identity database path.

Exit status: 0 on success, 1 on verification failure, 2 on usage errors,
3 on domain errors (malformed input, out-of-range parameters, poles).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .qfield import DomainError, MalformedInputError, PoleError, RationalFn, rf
from .reps import (BUNDLES, Bundle, bundle, bundle_dim, edges,
                   relative_dim_constant, weyl_dim, weyl_dim_generic)
from .operators import OpSymbol
from . import engine
from .engine import (DerivationError, database_load, derive_composite,
                     scalar_solve, verify_all)
from .spectra import bounds_table, minimal_eigenvalue, special_eigenvalues
from .stability import (IncompleteInputError, SingularConstructionError,
                        SpectralBound, SpectralInput, classify_wolf,
                        load_wolf_table, theorem_a)
from .report import Report, ReportEntry

#: (k, a, b) rows of the summary bounds table
BOUND_ROWS = [(1, 1, 0), (2, 0, 0), (0, 1, 1), (0, 2, 0), (2, 1, 1),
              (2, 2, 0), (1, 2, 1), (1, 3, 0), (3, 1, 0), (3, 2, 1), (2, 2, 2)]


def _load_db():
    return database_load(os.environ.get("WBK_DB"))


def _parse_weight(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip() != "")
    except ValueError:
        raise MalformedInputError(f"weight must be comma-separated integers, got {text!r}")


def _parse_lambda(text: str) -> RationalFn | None:
    """An eigenvalue as a multiple of scal: a name or a rational function of n."""
    named = {"mu": "1/(4*n)", "lambda1": "(n+1)/(2*n*(n+2))",
             "lambda2": "1/(2*n)", "lambda3": "1/(2*(n+2))"}
    if text == "symbolic":
        return None
    return rf(named.get(text, text))


def cmd_dim(args) -> int:
    if args.weight is not None:
        w = _parse_weight(args.weight)
        if args.n is None:
            print(weyl_dim_generic(w))
        else:
            print(weyl_dim(w, args.n))
        return 0
    if args.bundle is None:
        raise MalformedInputError("dim requires --weight or --bundle")
    b = bundle(args.bundle)
    print(bundle_dim(b, args.n))
    return 0


def cmd_edges(args) -> int:
    b = bundle(args.bundle, args.n)
    for e in edges(b):
        target = e.target.alias or str(e.target)
        flag = "commuting" if e.commuting else "non-commuting"
        print(f"D[{e.N:+d},{e.nu:+d}] -> {target:14s} w_nu = {e.conformal_weight}  "
              f"coeff = {e.universal_coeff}  reldim = {relative_dim_constant(e)}  [{flag}]")
    return 0


def cmd_bound(args) -> int:
    value = minimal_eigenvalue(args.k, args.a, args.b, args.n)
    if value.is_zero():
        print("0")
        return 0
    text = value.factored_str() if args.n is None else str(value.evaluate(args.n))
    print("scal" + text[1:] if text.startswith("1/") else f"scal*{text}")
    return 0


def cmd_derive(args) -> int:
    db = _load_db()
    rank = None if args.symbolic or args.n is None else args.n
    ident = derive_composite(db, args.identity, rank=rank)
    for sym in ident.expr.symbols():
        print(f"{sym}: {ident.expr.coeff(sym)}")
    if ident.assumptions:
        listed = ", ".join(str(s) for s in sorted(ident.assumptions, key=OpSymbol.sort_key))
        print(f"# assuming {listed} = 0")
    print(f"# valid for n >= {ident.n_min}; {ident.provenance}")
    return 0


def cmd_solve(args) -> int:
    db = _load_db()
    assume = [s for s in (args.assume.split(",") if args.assume else []) if s]
    lam = _parse_lambda(args.lam) if args.lam else None
    sol = scalar_solve(db, args.bundle, assume=assume, lam=lam, rank=args.n)
    for sym in sorted(sol.values, key=OpSymbol.sort_key):
        print(f"{sym} = {sol.values[sym]}")
    if sol.excluded:
        print(f"# excluded specializations: n in {sol.excluded}")
    print(f"# rows used: {', '.join(sol.used)}")
    return 0


def _verify_report(db, args) -> Report:
    lo, hi = (int(x) for x in args.n_range.split(":"))
    ids = None if args.all or not args.identities else sorted(args.identities)
    vrep = verify_all(db, lo, hi, ids=ids)
    entries = []
    for e in vrep.entries:
        bundle_name = ""
        if e.id in db:
            bundle_name = db[e.id].expr.bundle.alias or ""
        entries.append(ReportEntry(e.id, e.status, e.expected, e.actual,
                                   e.provenance, bundle_name))
    n = args.n if getattr(args, "n", None) else None
    return Report(entries, bounds_table(BOUND_ROWS, n), (lo, hi))


def cmd_verify(args) -> int:
    db = _load_db()
    report = _verify_report(db, args)
    if args.format == "json":
        sys.stdout.write(report.to_json())
    elif args.format == "latex":
        sys.stdout.write(report.to_latex())
    else:
        sys.stdout.write(report.to_markdown())
    return 0 if report.all_pass else 1


def _spectral_input_from_json(payload: dict) -> SpectralInput:
    bound_raw = payload["lambda_min_functions"]
    if bound_raw == "above_lambda2":
        se = special_eigenvalues(int(payload["n"])).at(int(payload["n"]))
        bound = SpectralBound(se["lambda2"], exact=False)
    elif isinstance(bound_raw, dict):
        bound = SpectralBound(Fraction(bound_raw["value"]), bool(bound_raw.get("exact", True)))
    else:
        bound = SpectralBound(Fraction(bound_raw), True)
    dims_raw = payload.get("eigenvalue_dims")
    dims = None if dims_raw is None else {Fraction(k): int(v) for k, v in dims_raw.items()}
    return SpectralInput(
        n=int(payload["n"]),
        lambda_min_functions=bound,
        eigenvalue_dims=dims,
        dim_sym2hsym2e_at_lambda1=int(payload.get("dim_sym2hsym2e_at_lambda1", 0)),
        dim_he_at_lambda1=int(payload.get("dim_he_at_lambda1", 0)),
        iso_dim=int(payload.get("iso_dim", 0)),
        name=payload.get("name", "input"),
    )


def cmd_classify(args) -> int:
    if args.input:
        if args.input == "-":
            payload = json.load(sys.stdin)
        else:
            with open(args.input, encoding="utf-8") as fh:
                payload = json.load(fh)
        reports = [theorem_a(_spectral_input_from_json(p))
                   for p in (payload if isinstance(payload, list) else [payload])]
    else:
        reports = classify_wolf(load_wolf_table(args.wolf_table))
    out = [r.as_dict() for r in sorted(reports, key=lambda r: (r.name, r.n))]
    sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_report(args) -> int:
    db = _load_db()
    report = _verify_report(db, args)
    text = report.to_latex() if args.format == "latex" else report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wbk",
        description="Exact Weitzenboeck-calculus workbench for quaternion-Kaehler bundles")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("dim", help="dimension of a weight or bundle")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--weight", type=str, default=None, help="comma-separated parts, e.g. 2,1")
    p.add_argument("--bundle", type=str, default=None,
                   help="bundle alias: " + ", ".join(sorted(BUNDLES)))
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("edges", help="gradient edges of a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("bound", help="minimal eigenvalue of Sym^k H x L(a,b)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("derive", help="re-derive a database identity")
    p.add_argument("identity")
    p.add_argument("--symbolic", action="store_true", default=False)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("solve", help="scalar eigensection solve on a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--assume", type=str, default="",
                   help="comma-separated vanishing symbols, e.g. B[+1,+2],B[+1,-1]")
    p.add_argument("--lambda", dest="lam", type=str, default="symbolic",
                   help="eigenvalue as multiple of scal: symbolic | mu | lambda1..3 | expr")
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="verify identities over a range of n")
    p.add_argument("identities", nargs="*", default=[])
    p.add_argument("--all", action="store_true", default=False)
    p.add_argument("--n-range", type=str, default="2:32")
    p.add_argument("--format", choices=("json", "latex", "markdown"), default="json")
    p.add_argument("--n", type=int, default=None, help="evaluate the bounds table at n")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="stability classification")
    p.add_argument("--input", type=str, default=None,
                   help="spectral-input JSON file, or - for stdin; default: shipped table")
    p.add_argument("--wolf-table", type=str, default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="full verification report")
    p.add_argument("--format", choices=("json", "latex"), default="latex")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--n-range", type=str, default="2:32")
    p.add_argument("--all", action="store_true", default=True)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_report, identities=[])

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, MalformedInputError, PoleError, DerivationError,
            IncompleteInputError, SingularConstructionError, KeyError,
            ZeroDivisionError, OSError, json.JSONDecodeError) as exc:
        print(f"wbk: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

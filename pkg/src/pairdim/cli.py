"""Command-line front end.  Every successful run emits one certificate."""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Sequence

from pairdim import __version__
from pairdim.acfqe import check_char, qe
from pairdim.dim2 import almost_internal_witness, dichotomy, dim
from pairdim.errors import PairDimError, UnsupportedFragment
from pairdim.formula import DEFAULT_MAX_CLAUSES, free_vars, parse, parse_term, read_trans_header
from pairdim.oracle import sample_check
from pairdim.pairnf import normalize
from pairdim.poly import Polynomial
from pairdim.pregeo import FiniteClosureSystem, check_axioms, linear_instance

SCHEMA_VERSION = 1


def _names(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(n.strip() for n in text.split(",") if n.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--char", type=int, default=0, help="characteristic: 0 or a prime")
    common.add_argument("--trans", default="", help="comma-separated transcendental constants")
    common.add_argument("--out", default="-", help="output path (default: stdout)")
    common.add_argument("--max-clauses", type=int, default=DEFAULT_MAX_CLAUSES)
    common.add_argument("--format", choices=("json", "text"), default="json")

    ap = argparse.ArgumentParser(prog="pairdim", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, help_ in [("parse", "parse and echo a formula"),
                        ("qe", "eliminate quantifiers (ring language only)"),
                        ("normalize", "pair normal form")]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("formula")

    p = sub.add_parser("dim", parents=[common], help="dimension of a definable set")
    p.add_argument("formula")
    p.add_argument("--vars", default=None,
                   help="coordinate order (default: free variables minus transcendentals, sorted)")

    p = sub.add_parser("dichotomy", parents=[common], help="small or co-small subset of K")
    p.add_argument("formula")
    p.add_argument("--var", default=None, help="the coordinate (default: the unique free variable)")

    p = sub.add_parser("witness", parents=[common], help="almost-internality witness")
    p.add_argument("polynomial")
    p.add_argument("--z", default="z", help="the field variable")
    p.add_argument("--u", default="", help="comma-separated small variables")
    p.add_argument("--param", action="append", default=[], metavar="NAME=TERM",
                   help="parameter value (repeatable)")

    p = sub.add_parser("pregeo-check", parents=[common], help="check pregeometry axioms")
    p.add_argument("spec", help='JSON: {"prime": p, "vectors": [[...], ...]} or a path to one')

    p = sub.add_parser("check", parents=[common], help="sample formula against its normal form")
    p.add_argument("formula")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return ap


def _certificate(kind: str, text: str, args, trans, payload) -> dict:
    return {
        "kind": kind,
        "input": text,
        "char": args.char,
        "transcendentals": list(trans),
        "payload": payload,
        "engineVersion": __version__,
        "schemaVersion": SCHEMA_VERSION,
    }


def _read_formula(args):
    header, body = read_trans_header(args.formula)
    trans = tuple(dict.fromkeys(header + _names(args.trans)))
    return parse(body, trans), trans


def _nf_json(nf) -> dict:
    return {
        "formula": str(nf),
        "disjuncts": [
            {"positive": str(d.positive), "negatives": [str(n) for n in d.negatives]}
            for d in nf.disjuncts
        ],
    }


def cmd_parse(args):
    f, trans = _read_formula(args)
    return _certificate("parse", args.formula, args, trans, {"formula": str(f)}), str(f)


def cmd_qe(args):
    f, trans = _read_formula(args)
    g = qe(f, args.char, args.max_clauses)
    return _certificate("qe", args.formula, args, trans, {"formula": str(g)}), str(g)


def cmd_normalize(args):
    f, trans = _read_formula(args)
    nf = normalize(f, args.char, args.max_clauses)
    return _certificate("normalForm", args.formula, args, trans, _nf_json(nf)), str(nf)


def cmd_dim(args):
    f, trans = _read_formula(args)
    variables = _names(args.vars) if args.vars else tuple(sorted(free_vars(f) - set(trans)))
    nf = normalize(f, args.char, args.max_clauses)
    cert = dim(nf, variables, args.char, trans, args.max_clauses)
    payload = {"dimension": cert.to_json()["dimension"], "variables": list(variables),
               "normalForm": str(nf), "trace": cert.to_json()}
    return _certificate("dim", args.formula, args, trans, payload), str(payload["dimension"])


def cmd_dichotomy(args):
    f, trans = _read_formula(args)
    coords = sorted(free_vars(f) - set(trans))
    z = args.var or (coords[0] if len(coords) == 1 else None)
    if z is None:
        raise PairDimError(f"need exactly one coordinate (or --var), found {coords}")
    nf = normalize(f, args.char, args.max_clauses)
    res = dichotomy(nf, z, args.char, trans, args.max_clauses)
    payload = {"label": res.label.value, "variable": z, "normalForm": str(nf),
               "smallFormula": str(res.small_formula),
               "complement": str(res.complement),
               "complementSmallFormula": str(res.complement_small_formula)}
    return _certificate("dichotomy", args.formula, args, trans, payload), res.label.value


def cmd_witness(args):
    trans = _names(args.trans)
    p = parse_term(args.polynomial)
    params = {}
    for item in args.param:
        name, _, term = item.partition("=")
        params[name.strip()] = parse_term(term)
    w = almost_internal_witness(p, args.z, _names(args.u), params, args.char)
    text = f"{w.relation}  (at most {w.bound} per small tuple)"
    payload = dict(w.to_json(), params={k: str(v) for k, v in sorted(params.items())})
    return _certificate("witness", args.polynomial, args, trans, payload), text


def cmd_pregeo(args):
    raw = args.spec
    if not raw.lstrip().startswith("{"):
        with open(raw, encoding="utf-8") as fh:
            raw = fh.read()
    spec = json.loads(raw)
    if "vectors" in spec:
        sys_ = linear_instance([tuple(v) for v in spec["vectors"]], int(spec.get("prime", 2)))
    else:
        table = {frozenset(k): frozenset(v) for k, v in spec["closure"]}
        sys_ = FiniteClosureSystem(tuple(spec["ground"]), lambda a: table.get(a, a))
    rep = check_axioms(sys_).to_json()
    text = "\n".join(f"{k}: {'pass' if v['pass'] else 'FAIL ' + str(v['witness'])}"
                     for k, v in rep.items())
    return _certificate("pregeoCheck", args.spec, args, (), rep), text


def _assignments(names, trans, count, seed):
    rng = random.Random(seed)
    pool = [Polynomial.const(Fraction(n, d)) for n in range(-3, 4) for d in (1, 2)]
    pool += [Polynomial.var(t) + c for t in trans for c in (0, 1)]
    return [{n: rng.choice(pool) for n in names} for _ in range(count)]


def cmd_check(args):
    f, trans = _read_formula(args)
    nf = normalize(f, args.char, args.max_clauses)
    names = sorted(free_vars(f) - set(trans))
    report = sample_check(nf.to_formula(), f, _assignments(names, trans, args.samples, args.seed),
                          args.char, trans)
    payload = dict(report.to_json(), normalForm=str(nf))
    text = f"{report.agreements}/{report.total} agree"
    return _certificate("checkReport", args.formula, args, trans, payload), text


COMMANDS = {
    "parse": cmd_parse, "qe": cmd_qe, "normalize": cmd_normalize, "dim": cmd_dim,
    "dichotomy": cmd_dichotomy, "witness": cmd_witness, "pregeo-check": cmd_pregeo,
    "check": cmd_check,
}


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Run a command; returns the exit code and the emitted text."""
    args = build_parser().parse_args(argv)
    try:
        args.char = check_char(args.char)
        cert, text = COMMANDS[args.command](args)
    except UnsupportedFragment as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return 2, ""
    except (PairDimError, ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1, ""
    out = json.dumps(cert, sort_keys=True, indent=2) + "\n" if args.format == "json" else text + "\n"
    if args.out == "-":
        sys.stdout.write(out)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    return 0, out


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())

"""zident command line.

Exit codes: 0 success / PASS, 1 FAIL, 2 usage or parse error, 3 precision failure.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from importlib import resources
from typing import Sequence

from . import __version__
from .constexpr import GRAMMAR, ConstExprError, eval_const_expr, expand, linear_form_str, parse_const_expr
from .holonomic import DiffOp, Recurrence, ode_annihilates, rec_check, rec_to_ode
from .iterint import DivergentWordError, format_word, gl_combo_eval, gl_eval_detail, load_gl_combo, parse_word, shuffle
from .mpfloat import PrecisionContext, PrecisionError
from .relations import NoRelationFound, certify, discover, load_basis, load_identity
from .sums import DEFAULT_TERMS_MAX, SeriesSpec, eval_series, term_source

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3
DEFAULT_DIGITS = 60


class UsageError(Exception):
    pass


def _digits(text: str) -> tuple[int, int | None]:
    """"N" or "L,H"."""
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--digits expects N or L,H, got {text!r}") from None
    if len(parts) == 1:
        return parts[0], None
    if len(parts) == 2:
        return parts[0], parts[1]
    raise argparse.ArgumentTypeError(f"--digits expects N or L,H, got {text!r}")


def _load(path: str) -> dict:
    """Read a JSON file; bare names fall back to the bundled fixtures."""
    if not os.path.exists(path) and os.sep not in path:
        ref = resources.files("zident") / "data" / path
        if ref.is_file():
            return json.loads(ref.read_text())
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}: invalid JSON ({err})") from None


def _series_from(data: dict, base: str = "") -> SeriesSpec:
    # accept a bare SeriesSpec, an identity file, or a file naming its series
    if "terms" in data:
        return SeriesSpec.from_json(data)
    series = data.get("series")
    if isinstance(series, dict):
        return SeriesSpec.from_json(series)
    if isinstance(series, str):
        near = os.path.join(os.path.dirname(base), series)
        return _series_from(_load(near if os.path.exists(near) else series))
    raise UsageError("file contains no series")


def _ctx(args) -> PrecisionContext:
    digits = args.digits[0] if args.digits else DEFAULT_DIGITS
    return PrecisionContext(digits)


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval_series(args) -> int:
    spec = _series_from(_load(args.series))
    res = eval_series(spec, _ctx(args), terms_max=args.terms_max)
    _emit(
        args,
        {"value": res.value.digits_str(), "digits": res.value.precision, "terms_used": res.terms_used, "tail_bound": str(res.tail_bound)},
        f"{res.value.digits_str()}\nterms used: {res.terms_used}, tail bound: {res.tail_bound}",
    )
    return EXIT_OK


def cmd_eval_const(args) -> int:
    e = parse_const_expr(args.expr)
    v = eval_const_expr(e, _ctx(args))
    payload = {"value": v.digits_str(), "digits": v.precision}
    human = v.digits_str()
    if args.expand:
        form = linear_form_str(expand(e))
        payload["expanded"] = form
        human += f"\n= {form}"
    _emit(args, payload, human)
    return EXIT_OK


def cmd_discover(args) -> int:
    spec = _series_from(_load(args.series))
    basis = load_basis(_load(args.basis))
    try:
        res = discover(spec, basis, _ctx(args), max_height=args.max_height)
    except NoRelationFound as err:
        _emit(args, {"result": "NO_RELATION", "norm_bound": f"{err.bound:.6g}"}, str(err))
        return EXIT_FAIL
    lines = [f"{b.name}: {c}" for b, c in zip(res.basis, (str(c) for c in res.coefficients))]
    lines.append(f"rhs: {res.to_json()['rhs']}")
    lines.append(f"residual: {res.residual} ({res.certified_digits} digits certified)")
    _emit(args, res.to_json(), "\n".join(lines))
    return EXIT_OK


def cmd_certify(args) -> int:
    spec, rhs = load_identity(_load(args.identity))
    low, high = args.digits or (50, 100)
    if high is None:
        high = 2 * low
    rep = certify(spec, rhs, low, high)
    data = rep.to_json()
    human = (
        f"{data['result']}\n"
        f"residual at {low} digits: {data['residual_low']} ({rep.terms_used_low} terms)\n"
        f"residual at {high} digits: {data['residual_high']} ({rep.terms_used_high} terms)\n"
        f"threshold: {data['threshold']}"
    )
    _emit(args, data, human)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _source_for(data: dict, path: str, args):
    spec = _series_from(_load(args.series)) if args.series else _series_from(data, path)
    return term_source(spec, int(data.get("index_shift", 0)))


def cmd_rec_check(args) -> int:
    data = _load(args.rec)
    rec = Recurrence.from_json(data)
    f = _source_for(data, args.rec, args)
    k_max = args.kmax if args.kmax is not None else rec.offset + rec.order + 99
    res = rec_check(rec, f, k_max)
    ks = res.checked
    payload = {"holds": res.holds, "first_failure": res.first_failure, "checked": [ks.start, ks.stop - 1]}
    human = f"{'PASS' if res.holds else 'FAIL'}: checked k = {ks.start}..{ks.stop - 1}"
    if not res.holds:
        human += f", first failure at k = {res.first_failure}"
    _emit(args, payload, human)
    return EXIT_OK if res.holds else EXIT_FAIL


def cmd_ode_check(args) -> int:
    if bool(args.ode) == bool(args.from_rec):
        raise UsageError("ode-check needs exactly one of --ode or --from-rec")
    data = _load(args.ode or args.from_rec)
    f = _source_for(data, args.ode or args.from_rec, args)
    if args.ode:
        op = DiffOp.from_json(data)
    else:
        op = rec_to_ode(Recurrence.from_json(data), f)
    res = ode_annihilates(op, f, args.nmax)
    payload = {
        "annihilates": res.annihilates,
        "first_nonzero": res.first_nonzero,
        "order": op.order,
        "max_degree": op.max_degree,
        "checked_powers": len(res.residuals),
    }
    if args.from_rec:
        payload["operator"] = op.to_json()
    human = f"{'PASS' if res.annihilates else 'FAIL'}: order {op.order}, degree {op.max_degree}, x^0..x^{len(res.residuals) - 1}"
    if not res.annihilates:
        human += f", first nonzero residual at x^{res.first_nonzero}"
    _emit(args, payload, human)
    return EXIT_OK if res.annihilates else EXIT_FAIL


def cmd_shuffle(args) -> int:
    u = parse_word(args.u, args.alphabet)
    v = parse_word(args.v, args.alphabet)
    ws = shuffle(u, v)
    _emit(args, {"alphabet": args.alphabet, "terms": ws.to_json()}, str(ws))
    return EXIT_OK


def cmd_gl_eval(args) -> int:
    if bool(args.word) == bool(args.combo):
        raise UsageError("gl-eval needs exactly one of WORD or --combo")
    ctx = _ctx(args)
    if args.word:
        w = parse_word(args.word, "g")
        v, tail = gl_eval_detail(w, ctx)
        _emit(args, {"word": format_word(w), "value": v.digits_str(), "digits": v.precision}, v.digits_str())
    else:
        terms, constant = load_gl_combo(_load(args.combo))
        v = gl_combo_eval(terms, constant, ctx)
        _emit(args, {"terms": len(terms), "value": v.digits_str(), "digits": v.precision}, v.digits_str())
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--digits",
        type=_digits,
        default=None,
        metavar="N|L,H",
        help=f"target decimal digits (default {DEFAULT_DIGITS}); certify takes L,H (default 50,100)",
    )
    common.add_argument("--json", action="store_true", help="emit JSON (sorted keys) instead of text")
    common.add_argument("--terms-max", type=int, default=DEFAULT_TERMS_MAX, metavar="N", help="cap on series terms")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (for property harnesses)")

    p = argparse.ArgumentParser(
        prog="zident",
        description="Evaluate, discover and certify closed forms of central-binomial series.",
        epilog="Constant expressions:\n" + GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, fn, help_):
        sp = sub.add_parser(
            name,
            parents=[common],
            help=help_,
            description=help_,
            epilog="Constant expressions:\n" + GRAMMAR,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sp.set_defaults(func=fn)
        return sp

    sp = add("eval-series", cmd_eval_series, "evaluate sum_k (sum_j a_j H_k^(h_j)/k^c_j) / C(2k,k)")
    sp.add_argument("--series", required=True, metavar="FILE", help="series or identity JSON")

    sp = add("eval-const", cmd_eval_const, "evaluate a constant expression")
    sp.add_argument("expr", help="e.g. '-45/8*zeta(7)+13/3*zeta(2)*zeta(5)'")
    sp.add_argument("--expand", action="store_true", help="also print the exact normal form")

    sp = add("discover", cmd_discover, "find rational basis coefficients for a series by PSLQ")
    sp.add_argument("--series", required=True, metavar="FILE")
    sp.add_argument("--basis", required=True, metavar="FILE")
    sp.add_argument("--max-height", type=int, default=None, metavar="H")

    sp = add("certify", cmd_certify, "check an identity numerically at two precisions")
    sp.add_argument("--identity", required=True, metavar="FILE")

    sp = add("rec-check", cmd_rec_check, "check a recurrence exactly against series summands")
    sp.add_argument("--rec", required=True, metavar="FILE")
    sp.add_argument("--series", metavar="FILE", help="overrides the series named in the recurrence file")
    sp.add_argument("--kmax", type=int, default=None, help="last index (default: 100 indices)")

    sp = add("ode-check", cmd_ode_check, "check that an operator annihilates a truncated generating series")
    sp.add_argument("--ode", metavar="FILE")
    sp.add_argument("--from-rec", metavar="FILE", help="convert this recurrence to an operator first")
    sp.add_argument("--series", metavar="FILE")
    sp.add_argument("--nmax", type=int, default=60)

    sp = add("shuffle", cmd_shuffle, "shuffle product of two words")
    sp.add_argument("--alphabet", choices=("g", "c"), default="c")
    sp.add_argument("u")
    sp.add_argument("v")

    sp = add("gl-eval", cmd_gl_eval, "evaluate G-words over {1/t, sqrt(t)sqrt(4-t)} at 1")
    sp.add_argument("word", nargs="?", help="e.g. 'a,0,a'")
    sp.add_argument("--combo", metavar="FILE", help="linear combination JSON")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code == 0 else EXIT_USAGE
    if args.seed is not None:
        random.seed(args.seed)
    try:
        return args.func(args)
    except PrecisionError as err:
        print(f"zident: precision failure: {err}", file=sys.stderr)
        return EXIT_PRECISION
    except ConstExprError as err:
        print(f"zident: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError, KeyError, TypeError, DivergentWordError) as err:
        print(f"zident: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Machine output (JSON or CSV) goes to stdout and diagnostics to stderr. The
default format is ``human`` when stdout is a terminal and ``json``
otherwise (``csv`` for ``table``). Exit codes: 0 when every checked property
holds, 1 on a property failure, 2 on bad usage or input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .exactnum import parse_rational, render_rational, to_decimal_string
from .harness import CSV_HEADER, convergence_table, sample_lottery
from .optimal import (
    check_dual_certificate,
    dual_certificate,
    is_dominated_fosd,
    r_optimal_rule,
    r_pareto_bounds_check,
)
from .payments import (
    NotImplementableError,
    payments_recursive,
    payments_subset_formula,
    payments_two_step,
    run_mechanism,
)
from .rules import RankingRule, TwoStepRule, ValuationProfile, is_implementable
from .verify import DEFAULT_GRID, GridSpec, check_expost_ir, check_satisfactory, parse_grid_spec

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path!r} is not valid JSON: {exc}") from exc


def _load_rule(path: str) -> RankingRule:
    try:
        return RankingRule.from_json(_load_json(path, "rule"))
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid rule in {path!r}: {exc}") from exc


def _load_profile(path: str) -> ValuationProfile:
    try:
        return ValuationProfile.from_json(_load_json(path, "profile"))
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid profile in {path!r}: {exc}") from exc


def _csv_text(rows: list) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _flat_rows(data: dict, prefix: str = "") -> list:
    rows = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows += _flat_rows(value, name + ".")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                rows += _flat_rows(item, f"{name}[{i}].")
        elif isinstance(value, list):
            rows.append([name, ";".join(str(x) for x in value)])
        else:
            rows.append([name, "" if value is None else value])
    return rows


def _human(data, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(data, dict):
        for key, value in data.items():
            if isinstance(value, (dict, list)) and value and not all(isinstance(x, (str, int, bool)) for x in value):
                lines.append(f"{pad}{key}:")
                lines.append(_human(value, indent + 1))
            elif isinstance(value, list):
                lines.append(f"{pad}{key}: " + ", ".join(str(x) for x in value))
            else:
                lines.append(f"{pad}{key}: {value}")
    elif isinstance(data, list):
        for item in data:
            lines.append(_human(item, indent))
    else:
        lines.append(f"{pad}{data}")
    return "\n".join(lines)


def _emit(data: dict, fmt: str, out, csv_rows=None) -> None:
    if fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=False) + "\n")
    elif fmt == "csv":
        out.write(_csv_text(csv_rows if csv_rows is not None else [["key", "value"]] + _flat_rows(data)))
    else:
        out.write(_human(data) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_optimal(args, out) -> int:
    if args.n < 3:
        raise InputError("--n must be at least 3")
    prefer = None
    if args.ell_tie is not None:
        if args.n == 8:
            prefer = args.ell_tie
        else:
            print(f"note: --ell-tie only applies at n=8; ignored for n={args.n}", file=sys.stderr)
    report = r_optimal_rule(args.n, prefer)
    _emit(report.to_json(), args.format, out)
    return EXIT_OK


def _method_payments(rule: RankingRule, v: ValuationProfile, method: str) -> dict:
    results = {}
    if method in ("subset", "all"):
        results["subset"] = payments_subset_formula(rule, v)
    if method in ("recursive", "all"):
        results["recursive"] = payments_recursive(rule, v)
    if method in ("two-step", "all"):
        two_step = TwoStepRule.from_rule(rule)
        applicable = two_step is not None and v.is_distinct_positive()
        if applicable:
            results["two-step"] = payments_two_step(two_step, v)
        elif method == "two-step":
            raise InputError("the two-step closed form needs a two-step rule and distinct positive values")
    return results


def cmd_price(args, out) -> int:
    rule = _load_rule(args.rule)
    v = _load_profile(args.profile)
    if rule.n != v.n:
        raise InputError(f"rule has {rule.n} ranks but profile has {v.n} agents")
    ok, residual = is_implementable(rule)
    if not ok:
        raise InputError(f"rule is not satisfactorily implementable (residual {render_rational(residual)})")
    outcome = run_mechanism(rule, v)
    results = _method_payments(rule, v, args.method)
    vectors = list(results.values())
    agree = all(vec == vectors[0] for vec in vectors)
    data = outcome.to_json()
    data["payments"] = [render_rational(x) for x in vectors[0]]
    alloc = outcome.allocation
    data["utilities"] = [render_rational(x * f - p) for x, f, p in zip(v.values, alloc, vectors[0])]
    if args.method == "all":
        data["methods"] = {k: [render_rational(x) for x in vec] for k, vec in results.items()}
        data["methods_agree"] = agree
    if args.sample is not None:
        winner = sample_lottery(outcome, args.sample)
        data["sampled_winner"] = None if winner is None else winner + 1  # 1-based, like the CSV rows
    rows = [["agent", "value", "allocation", "payment", "utility"]]
    for i in range(v.n):
        rows.append([i + 1, render_rational(v.values[i]), data["allocation"][i], data["payments"][i], data["utilities"][i]])
    _emit(data, args.format, out, rows)
    if not agree:
        print("error: payment methods disagree", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args, out) -> int:
    rule = _load_rule(args.rule)
    if args.random is not None:
        if args.grid is not None:
            raise InputError("use either --grid or --random, not both")
        grid = GridSpec("random", count=args.random, denom=args.denom, seed=args.seed)
        if args.random < 1 or args.denom < 1:
            raise InputError("--random and --denom must be positive")
    else:
        try:
            grid = parse_grid_spec(args.grid, seed=args.seed) if args.grid else DEFAULT_GRID
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if args.ir:
        ok, residual = is_implementable(rule)
        if not ok:
            raise InputError(f"ex-post IR needs an implementable rule (residual {render_rational(residual)})")
        report = check_expost_ir(rule, grid)
    else:
        report = check_satisfactory(rule, grid, dsic_sample=args.dsic_sample)
    data = report.to_json()
    rows = [["check", "passed", "checked", "residual", "counterexample"]]
    for c in data["checks"]:
        cex = "" if c["counterexample"] is None else ";".join(c["counterexample"])
        rows.append([c["name"], c["passed"], c["checked"], c["residual"] or "", cex])
    _emit(data, args.format, out, rows)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_table(args, out) -> int:
    lo, hi = getattr(args, "from"), args.to
    if not 3 <= lo <= hi:
        raise InputError("need 3 <= --from <= --to")
    rows = convergence_table(lo, hi)
    data = {"rows": [r.to_json() for r in rows]}
    csv_rows = [CSV_HEADER.split(",")] + [
        [r.n, r.ell, r.top_binomial, render_rational(r.pi1), r.pi1_percent] for r in rows
    ]
    if args.format == "human":
        out.write("  n  ell  C(n-2,ell-1)  pi1             %\n")
        for r in rows:
            out.write(f"{r.n:>3}  {r.ell:>3}  {r.top_binomial:>12}  {render_rational(r.pi1):<14}  {r.pi1_percent}\n")
    else:
        _emit(data, args.format, out, csv_rows)
    return EXIT_OK


def cmd_check(args, out) -> int:
    try:
        pi = [parse_rational(x.strip()) for x in args.pi.split(",")]
        rule = RankingRule(pi)
    except ValueError as exc:
        raise InputError(f"invalid --pi: {exc}") from exc
    ok, residual = is_implementable(rule)
    data = {"n": rule.n, "pi": [render_rational(x) for x in rule.pi], "implementable": ok, "residual": render_rational(residual)}
    _emit(data, args.format, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(args, out) -> int:
    if args.n < 3:
        raise InputError("--n must be at least 3")
    cert = dual_certificate(args.n)
    result = check_dual_certificate(cert)
    feasible = result["theta_nonnegative"] and result["constraints_satisfied"]
    data = cert.to_json()
    data.update(
        {
            "dual_feasible": feasible,
            "primal_feasible": result["primal_feasible"],
            "primal_value": render_rational(result["primal_value"]),
            "dual_value": render_rational(result["dual_value"]),
            "strong_duality": result["gap_closed"],
            "z_decimal": to_decimal_string(cert.z, 6),
        }
    )
    _emit(data, args.format, out)
    return EXIT_OK if feasible and result["gap_closed"] else EXIT_FAIL


def cmd_pareto(args, out) -> int:
    rule = _load_rule(args.rule)
    ok, residual = is_implementable(rule)
    if not ok:
        raise InputError(f"rule is not implementable (residual {render_rational(residual)})")
    if rule.prefix[-1] != 1:
        raise InputError("r-Pareto checks need a rule whose probabilities sum to one")
    dominated, witness = is_dominated_fosd(rule)
    data = {
        "pi": [render_rational(x) for x in rule.pi],
        "dominated": dominated,
        "witness": None if witness is None else [render_rational(x) for x in witness.pi],
    }
    if not dominated:
        data["pi1_bounds_hold"] = r_pareto_bounds_check(rule)
    _emit(data, args.format, out)
    if dominated or not data.get("pi1_bounds_hold", True):
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "human"), default=None, help="output format")

    parser = argparse.ArgumentParser(
        prog="rankmech",
        description="Exact budget-balanced, DSIC, symmetric ranking mechanisms.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimal", parents=[common], help="build the r-optimal rule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell-tie", type=int, choices=(2, 4), default=None, help="step length to use at n=8")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("price", parents=[common], help="allocation, payments and utilities at a profile")
    p.add_argument("--rule", required=True, help='rule JSON file {"n": .., "pi": [..]}')
    p.add_argument("--profile", required=True, help='profile JSON file {"values": [..]}')
    p.add_argument("--method", choices=("subset", "two-step", "recursive", "all"), default="subset")
    p.add_argument("--sample", type=int, default=None, metavar="SEED", help="also draw a winner with this seed")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("verify", parents=[common], help="sweep the satisfactory properties")
    p.add_argument("--rule", required=True)
    p.add_argument("--grid", default=None, help="'values=0,1/3,2/3,1;exhaustive' or 'random=500;denom=64'")
    p.add_argument("--random", type=int, default=None, metavar="COUNT")
    p.add_argument("--denom", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ir", action="store_true", help="check ex-post individual rationality instead")
    p.add_argument("--dsic-sample", type=int, default=None, metavar="K", help="DSIC sweep on K base profiles")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", parents=[common], help="convergence table of the top-rank probability")
    p.add_argument("--from", type=int, required=True)
    p.add_argument("--to", type=int, required=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("check", parents=[common], help="implementability of a probability vector")
    p.add_argument("--pi", required=True, help="comma-separated rationals, e.g. 3/4,1/4,0,0")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify", parents=[common], help="dual certificate for the ranking LP")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("pareto", parents=[common], help="FOSD domination and top-probability bounds")
    p.add_argument("--rule", required=True)
    p.set_defaults(func=cmd_pareto)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.format is None:
        tty = hasattr(out, "isatty") and out.isatty()
        args.format = "human" if tty else ("csv" if args.command == "table" else "json")
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotImplementableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

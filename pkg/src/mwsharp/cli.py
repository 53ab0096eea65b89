"""Command line interface.

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import harness
from .a1solver import a1_bruteforce, a1_exact, certificate_value
from .exactnum import format_rat, parse_number, rat_to_float
from .matrixbridge import lemma21_check
from .operators import levelset_measure, weak_norm
from .weight import StepWeight, build_weight

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3


class InvalidInput(Exception):
    pass


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=1, default=str) + "\n"


def _load_weight(path) -> StepWeight:
    try:
        return StepWeight.load(path)
    except (OSError, KeyError, ValueError) as exc:
        raise InvalidInput(f"cannot load weight from {path}: {exc}") from exc


def _notice_small(N):
    if N <= harness.ASYMPTOTIC_N:
        print(f"note: N={N} <= {harness.ASYMPTOTIC_N}; the asymptotic properties are only expected "
              "to stabilize for larger N", file=sys.stderr)


def cmd_build_weight(args):
    w = build_weight(args.n)
    _notice_small(args.n)
    _emit(args, json.dumps(w.to_dict(), indent=1) + "\n")
    return EXIT_OK


def cmd_a1(args):
    w = _load_weight(args.weight)
    cert = a1_exact(w, args.window)
    out = cert.to_dict()
    out["recomputed"] = format_rat(certificate_value(w, cert))
    status = EXIT_OK
    if args.oracle_samples:
        orc = a1_bruteforce(w, args.oracle_samples, args.seed)
        out["oracle"] = {"max_interval": format_rat(orc.value), "sliver_limit": format_rat(orc.sliver_limit),
                         "intervals": orc.intervals}
        if orc.value > cert.value:
            status = EXIT_VERIFY
    _emit(args, _json(out))
    return status


def cmd_weaknorm(args):
    w = _load_weight(args.weight)
    res = weak_norm(w, args.operator)
    out = res.to_dict()
    status = EXIT_OK
    if args.alpha_audit:
        rng = random.Random(args.seed)
        bad = 0
        for _ in range(args.alpha_audit):
            alpha = Fraction(rng.randrange(1, 2**20), 2**18)
            mu = levelset_measure(w, args.operator, alpha)
            if args.operator == "M":
                bad += alpha * mu > res.value
            else:
                bad += float(alpha) * mu[0] > res.value + res.abs_error
        out["alpha_audit"] = {"samples": args.alpha_audit, "violations": bad}
        if bad:
            status = EXIT_VERIFY
    _emit(args, _json(out))
    return status


def cmd_levelset(args):
    w = _load_weight(args.weight)
    try:
        alpha = parse_number(args.alpha)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    if alpha <= 0:
        raise InvalidInput("alpha must be positive")
    mu = levelset_measure(w, args.operator, alpha)
    if args.operator == "M":
        out = {"alpha": format_rat(alpha), "measure": format_rat(mu), "measure_float": rat_to_float(mu)}
    else:
        out = {"alpha": format_rat(alpha), "measure": mu[0], "abs_error": mu[1]}
    _emit(args, _json(out))
    return EXIT_OK


def cmd_lemma21(args):
    w = _load_weight(args.weight)
    rng = random.Random(args.seed)
    T = w.period
    pts = []
    while len(pts) < args.samples:
        x = Fraction(rng.randrange(-(2**40), 2**40), 2**40) * 3 * T + Fraction(1, 3)
        q, r = divmod(x, T)
        if r not in w.breakpoints() and x not in (0, 1):
            pts.append(x)
    rep = lemma21_check(w, args.n, pts)
    _emit(args, _json(rep))
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


def cmd_verify(args):
    rep = harness.verify_theorem(args.n, seed=args.seed)
    _notice_small(args.n)
    _emit(args, _json(rep))
    return EXIT_OK if rep["pass"] else EXIT_VERIFY


def cmd_sweep(args):
    ops = tuple(args.operators.split(","))
    timings = not args.no_timings
    writer = harness.records_to_json if args.format == "json" else harness.records_to_csv
    try:
        recs = harness.sweep(args.n_min, args.n_max, ops, threads=args.threads, time_budget=args.time_budget)
    except harness.ResourceLimit as lim:
        _emit(args, writer(lim.records, timings, truncated_at=lim.at_n))
        return EXIT_RESOURCE
    _emit(args, writer(recs, timings))
    bad = [r.N for r in recs if r.lambda_M is not None and r.lambda_M < r.superlevel]
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_fit(args):
    recs = harness.load_records(args.records)
    recs = [r for r in recs if (args.n_min is None or r.N >= args.n_min)]
    fit = harness.fit_exponent(recs, args.x, args.y)
    ratios = harness.theorem_a_ratio(recs)
    out = {"fit": fit.__dict__, "theorem_a": ratios}
    if args.format == "csv":
        text = "slope,intercept,r_squared,x,y,points\n"
        text += f"{fit.slope!r},{fit.intercept!r},{fit.r_squared!r},{fit.x_name},{fit.y_name},{fit.points}\n"
        _emit(args, text)
    else:
        _emit(args, _json(out))
    return EXIT_OK


def cmd_plot_data(args):
    recs = harness.load_records(args.records)
    _emit(args, harness.plot_data(recs, args.y))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0, help="seed for oracle sampling")

    p = argparse.ArgumentParser(prog="mwsharp", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build-weight", parents=[common], help="construct the extremal weight")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_build_weight)

    s = sub.add_parser("a1", parents=[common], help="exact A1 constant with certificate")
    s.add_argument("--weight", required=True)
    s.add_argument("--window", type=int, default=3)
    s.add_argument("--oracle-samples", type=int, default=0)
    s.set_defaults(func=cmd_a1)

    s = sub.add_parser("weaknorm", parents=[common], help="weak-type quasinorm of w*|T chi_[0,1]|")
    s.add_argument("--weight", required=True)
    s.add_argument("--operator", choices=["M", "H"], required=True)
    s.add_argument("--alpha-audit", type=int, default=0)
    s.set_defaults(func=cmd_weaknorm)

    s = sub.add_parser("levelset", parents=[common], help="measure of {w*|T chi_[0,1]| > alpha}")
    s.add_argument("--weight", required=True)
    s.add_argument("--operator", choices=["M", "H"], default="M")
    s.add_argument("--alpha", required=True, help="p/q or m/2^e")
    s.set_defaults(func=cmd_levelset)

    s = sub.add_parser("lemma21", parents=[common], help="scalar/matrix reduction check")
    s.add_argument("--weight", required=True)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_lemma21)

    s = sub.add_parser("verify", parents=[common], help="verification report for one N")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="per-N records")
    s.add_argument("--n-min", type=int, default=10)
    s.add_argument("--n-max", type=int, default=24)
    s.add_argument("--operators", default="M,H")
    s.add_argument("--time-budget", type=float, default=None, help="seconds")
    s.add_argument("--no-timings", action="store_true", help="blank the timing columns (reproducible output)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", parents=[common], help="log-log exponent fit over sweep records")
    s.add_argument("--records", required=True)
    s.add_argument("--x", default="a1")
    s.add_argument("--y", default="lambda_M")
    s.add_argument("--n-min", type=int, default=None)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("plot-data", parents=[common], help="two-column (log a1, log lambda) text")
    s.add_argument("--records", required=True)
    s.add_argument("--y", default="lambda_M")
    s.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (InvalidInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

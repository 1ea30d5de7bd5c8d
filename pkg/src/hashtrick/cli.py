"""Command line interface.

Subcommands: bounds (closed forms), exact (enumeration oracles),
experiment (the Monte Carlo grid), analyze (re-analysis of persisted
results), verify (the self-check suite). Exact rational outputs are
printed as numerator/denominator strings so nothing is rounded. Exit
codes: 0 success, 1 verification failure, 2 invalid parameters or input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import _kernels
from .bounds import (
    DEFAULT_LOWER_D,
    DEFAULT_SCALE,
    DEFAULT_UPPER_C,
    TradeoffQuery,
    evaluate_tradeoff,
    moment_bound,
)
from .experiment import (
    DEFAULT_DELTA_VALUES,
    DEFAULT_SEED,
    GridSpec,
    ResultsFormatError,
    analyze_results,
    read_results,
    run_grid,
    write_border,
    write_ratios,
)
from .oracle import (
    BudgetExceeded,
    DEFAULT_BUDGET,
    ExactVector,
    count_eulerian_graphs,
    exact_failure_probability,
    exact_moment_bruteforce,
    exact_moment_sequences,
)
from .verify import run_all

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

RESULTS_FILE = "results.csv"
RATIOS_FILE = "ratios.csv"
BORDER_FILE = "border.csv"
REPORT_FILE = "verify.json"


def _parse_int(text: str) -> int:
    """Integer in decimal or 0x hex."""
    return int(text, 0)


def _parse_number(text: str) -> Fraction:
    """Exact rational from '2^-3', '0.125', '1/8' or plain integers."""
    body = text.strip()
    if "^" in body:
        base, _, exp = body.partition("^")
        return Fraction(base) ** int(exp)
    return Fraction(body)


def _parse_number_list(text: str) -> list[Fraction]:
    return [_parse_number(part) for part in text.split(",") if part.strip()]


def _parse_int_list(text: str) -> list[int]:
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        value = _parse_number(part)
        if value.denominator != 1:
            raise ValueError(f"expected an integer, got {part!r}")
        values.append(int(value))
    return values


def _rational_json(value: Fraction) -> dict[str, str]:
    return {"numerator": str(value.numerator), "denominator": str(value.denominator)}


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("HASHTRICK_SEED")
    if env:
        return int(env, 0)
    return DEFAULT_SEED


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_bounds(args) -> int:
    payload: dict = {}
    if args.r is not None:
        value = moment_bound(args.m, args.r, args.k if args.k is not None else args.m * args.r)
        payload["moment_bound"] = value
        payload["m"], payload["r"] = args.m, args.r
        payload["k"] = args.k if args.k is not None else args.m * args.r
    if args.eps is not None or args.delta is not None:
        if args.eps is None or args.delta is None:
            raise ValueError("tradeoff evaluation needs both --eps and --delta")
        query = TradeoffQuery(
            m=args.m, eps=float(_parse_number(args.eps)),
            delta=float(_parse_number(args.delta)),
            upper_c=args.upper_c, lower_d=args.lower_d, scale=args.scale,
        )
        result = evaluate_tradeoff(query)
        payload.update({
            "m": args.m,
            "eps": query.eps,
            "delta": query.delta,
            "upper_c": query.upper_c,
            "lower_d": query.lower_d,
            "scale": query.scale,
        })
        payload.update(result.to_json())
    if not payload:
        raise ValueError("nothing to compute: pass --eps/--delta and/or --r")
    _emit(payload)
    return EXIT_OK


def cmd_exact(args) -> int:
    budget = args.budget
    if args.mode == "delta":
        if args.m is None or args.k is None or args.eps is None:
            raise ValueError("mode delta needs --m, --k and --eps")
        value = exact_failure_probability(args.m, args.k, _parse_number(args.eps), budget)
        _emit({
            "mode": "delta", "m": args.m, "k": args.k, "eps": str(_parse_number(args.eps)),
            "value": _rational_json(value),
        })
    elif args.mode in ("moment-bf", "moment-seq"):
        if args.m is None or args.k is None or args.r is None:
            raise ValueError(f"mode {args.mode} needs --m, --k and --r")
        x = ExactVector.unit_flat(args.k)
        fn = exact_moment_bruteforce if args.mode == "moment-bf" else exact_moment_sequences
        value = fn(args.m, x, args.r, budget)
        _emit({
            "mode": args.mode, "m": args.m, "k": args.k, "r": args.r,
            "vector": "unit_flat", "value": _rational_json(value),
        })
    elif args.mode == "euler-count":
        if args.alpha is None or args.beta is None or args.r is None:
            raise ValueError("mode euler-count needs --alpha, --beta and --r")
        result = count_eulerian_graphs(args.alpha, args.beta, args.r, budget)
        _emit({
            "mode": "euler-count", "alpha": args.alpha, "beta": args.beta, "r": args.r,
            "exact_count": str(result.exact_count),
            "estimate": _rational_json(result.estimate),
            "log2_ratio_per_r": result.log2_ratio_per_r,
        })
    else:
        raise ValueError(f"unknown mode {args.mode!r}")
    return EXIT_OK


def _prepare_out_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise ValueError(f"output directory {path!r} is not writable")


def cmd_experiment(args) -> int:
    seed = _resolve_seed(args)
    spec_kwargs: dict = {"master_seed": seed}
    if args.m:
        spec_kwargs["m_values"] = tuple(_parse_int_list(args.m))
    if args.k:
        spec_kwargs["k_values"] = tuple(_parse_int_list(args.k))
    if args.eps:
        spec_kwargs["eps_values"] = tuple(sorted(_parse_number_list(args.eps)))
    if args.trials is not None:
        spec_kwargs["trials"] = args.trials
    spec = GridSpec(**spec_kwargs)
    _prepare_out_dir(args.out)
    out_path = os.path.join(args.out, RESULTS_FILE)
    stats = run_grid(spec, out_path, jobs=args.jobs)
    backend = "python" if _kernels.get_backend() is _kernels.pure else "compiled"
    print(
        f"wrote {len(stats)} rows ({len(spec.cells())} cells) to {out_path} "
        f"[seed={seed}, trials={spec.trials}, backend={backend}]"
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    results_path = os.path.join(args.out, RESULTS_FILE)
    _meta, stats = read_results(results_path)
    if args.delta:
        deltas = sorted(_parse_number_list(args.delta))
    else:
        deltas = list(DEFAULT_DELTA_VALUES)
    _estimates, ratios, border = analyze_results(stats, deltas)
    ratios_path = os.path.join(args.out, RATIOS_FILE)
    border_path = os.path.join(args.out, BORDER_FILE)
    write_ratios(ratios_path, ratios)
    write_border(border_path, border)
    defined = [rec.ratio for rec in ratios]
    summary = ""
    if defined:
        summary = (f"; ratio min={min(defined):.4f} max={max(defined):.4f} "
                   f"over {len(defined)} windowed points")
    print(f"wrote {ratios_path} and {border_path}{summary}")
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    report = run_all(budget=args.budget, trials=args.trials, seed=seed)
    for check in report.checks:
        line = f"{check.status.upper():5s} {check.name}"
        if check.detail:
            line += f": {check.detail}"
        print(line)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(report.to_json(), handle, indent=2)
            handle.write("\n")
        print(f"report written to {args.report}")
    if report.passed:
        print("verification passed")
        return EXIT_OK
    print("verification FAILED", file=sys.stderr)
    return EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hashtrick",
        description="Feature hashing: bounds, exact oracles, experiments, analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    p_bounds.add_argument("--m", type=_parse_int, required=True)
    p_bounds.add_argument("--eps", type=str, default=None)
    p_bounds.add_argument("--delta", type=str, default=None)
    p_bounds.add_argument("--r", type=_parse_int, default=None)
    p_bounds.add_argument("--k", type=_parse_int, default=None)
    p_bounds.add_argument("--C", dest="upper_c", type=float, default=DEFAULT_UPPER_C)
    p_bounds.add_argument("--D", dest="lower_d", type=float, default=DEFAULT_LOWER_D)
    p_bounds.add_argument("--scale", type=float, default=DEFAULT_SCALE)
    p_bounds.set_defaults(func=cmd_bounds)

    p_exact = sub.add_parser("exact", help="run an exact enumeration oracle")
    p_exact.add_argument("--mode", required=True,
                         choices=["delta", "moment-bf", "moment-seq", "euler-count"])
    p_exact.add_argument("--m", type=_parse_int, default=None)
    p_exact.add_argument("--k", type=_parse_int, default=None)
    p_exact.add_argument("--eps", type=str, default=None)
    p_exact.add_argument("--r", type=_parse_int, default=None)
    p_exact.add_argument("--alpha", type=_parse_int, default=None)
    p_exact.add_argument("--beta", type=_parse_int, default=None)
    p_exact.add_argument("--budget", type=_parse_int, default=DEFAULT_BUDGET)
    p_exact.set_defaults(func=cmd_exact)

    p_exp = sub.add_parser("experiment", help="run the Monte Carlo grid")
    p_exp.add_argument("--m", type=str, default=None, help="comma list, e.g. 64,128 or 2^6,2^7")
    p_exp.add_argument("--k", type=str, default=None)
    p_exp.add_argument("--eps", type=str, default=None, help="comma list, e.g. 2^-3,2^-2")
    p_exp.add_argument("--trials", type=_parse_int, default=None)
    p_exp.add_argument("--seed", type=_parse_int, default=None,
                       help="64-bit seed, decimal or 0x hex (env HASHTRICK_SEED)")
    p_exp.add_argument("--out", type=str, default="results")
    p_exp.add_argument("--jobs", type=_parse_int, default=1)
    p_exp.set_defaults(func=cmd_experiment)

    p_an = sub.add_parser("analyze", help="recompute analyses from persisted results")
    p_an.add_argument("--out", type=str, default="results",
                      help="directory holding results.csv; analyses are written next to it")
    p_an.add_argument("--delta", type=str, default=None, help="comma list, e.g. 2^-8,2^-4")
    p_an.set_defaults(func=cmd_analyze)

    p_ver = sub.add_parser("verify", help="run the verification suite")
    p_ver.add_argument("--budget", type=_parse_int, default=DEFAULT_BUDGET)
    p_ver.add_argument("--trials", type=_parse_int, default=1 << 13)
    p_ver.add_argument("--seed", type=_parse_int, default=None)
    p_ver.add_argument("--report", type=str, default=None)
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ResultsFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

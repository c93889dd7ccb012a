"""Command line interface.

Exit codes: 0 on success, 1 when a verification suite reports failures,
2 on usage errors.  Output for a fixed command line and seed is
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .asets import asets_to_json
from .combinatorics import MultiIndex
from .numeric import SUITE_NAMES, reports_to_json, run_suite
from .symbolic import expand_chain, expand_tangent, render

DEFAULT_SEED = 1729


def _env_int(parser: argparse.ArgumentParser, name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        parser.error(f"{name} must be an integer, got {raw!r}")


def _alpha_arg(parser: argparse.ArgumentParser, args: argparse.Namespace) -> MultiIndex:
    if args.alpha is not None and args.order is not None:
        parser.error("give --alpha or --order, not both")
    if args.alpha is not None:
        if not args.alpha or any(c not in "01" for c in args.alpha):
            parser.error(f"--alpha must be a nonempty bitstring, got {args.alpha!r}")
        return MultiIndex.from_string(args.alpha)
    if args.order is not None:
        if args.order < 1:
            parser.error("--order must be at least 1")
        return MultiIndex.ones(args.order)
    parser.error("one of --alpha or --order is required")


def _emit(text: str, output: str | None) -> None:
    if output is None:
        print(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _formula_command(args: argparse.Namespace, parser: argparse.ArgumentParser, expand) -> int:
    alpha = _alpha_arg(parser, args)
    expr = expand(alpha)
    text = render(expr, args.format)
    if args.format == "latex":
        text = "\\[\n" + text + "\n\\]"
    _emit(text, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltachain",
        description="Symbolic and exact-numeric engine for higher-order finite "
        "differences of composed maps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_alpha(p: argparse.ArgumentParser) -> None:
        p.add_argument("--alpha", help="binary multi-index as a bitstring, e.g. 101")
        p.add_argument("--order", type=int, help="shorthand for the all-ones multi-index of this length")

    p_expand = sub.add_parser("expand", help="difference expansion of a map applied over a cuboid")
    add_alpha(p_expand)
    p_expand.add_argument("--format", choices=("text", "latex", "json"), default="text")
    p_expand.add_argument("--output", help="write to this file instead of stdout")

    p_chain = sub.add_parser("chain", help="difference expansion of a composite f(g(x))")
    add_alpha(p_chain)
    p_chain.add_argument("--format", choices=("text", "latex", "json"), default="text")
    p_chain.add_argument("--output", help="write to this file instead of stdout")

    p_asets = sub.add_parser("asets", help="dump the per-partition index-set families")
    add_alpha(p_asets)
    p_asets.add_argument("--validate", action="store_true", help="include per-condition results")
    p_asets.add_argument("--output", help="write to this file instead of stdout")

    p_verify = sub.add_parser("verify", help="run numeric verification suites")
    p_verify.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p_verify.add_argument("--seed", type=int, help=f"root seed (default {DEFAULT_SEED}, or DELTACHAIN_SEED)")
    p_verify.add_argument("--trials", type=int, help="trial count per check (default per suite, or DELTACHAIN_TRIALS)")
    p_verify.add_argument("--kmax", type=int, help="largest cube dimension where the suite sweeps dimensions")
    p_verify.add_argument("--alpha", help="restrict scaling or smooth-chain checks to this bitstring")
    p_verify.add_argument("--eps-pow-min", type=int, default=3, help="smallest j in the scale grid 2**-j")
    p_verify.add_argument("--eps-pow-max", type=int, default=10, help="largest j in the scale grid 2**-j")
    p_verify.add_argument("--output", help="write the JSON report to this file instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "expand":
        return _formula_command(args, parser, expand_tangent)
    if args.command == "chain":
        return _formula_command(args, parser, expand_chain)

    if args.command == "asets":
        alpha = _alpha_arg(parser, args)
        _emit(asets_to_json(alpha, include_validation=args.validate), args.output)
        return 0

    if args.command == "verify":
        seed = args.seed
        if seed is None:
            seed = _env_int(parser, "DELTACHAIN_SEED")
        if seed is None:
            seed = DEFAULT_SEED
        trials = args.trials
        if trials is None:
            trials = _env_int(parser, "DELTACHAIN_TRIALS")
        if trials is not None and trials < 1:
            parser.error("--trials must be at least 1")
        if args.kmax is not None and args.kmax < 1:
            parser.error("--kmax must be at least 1")
        alpha = None
        if args.alpha is not None:
            if not args.alpha or any(c not in "01" for c in args.alpha):
                parser.error(f"--alpha must be a nonempty bitstring, got {args.alpha!r}")
            alpha = MultiIndex.from_string(args.alpha)
        if args.eps_pow_min < 1 or args.eps_pow_max < args.eps_pow_min:
            parser.error("need 1 <= eps-pow-min <= eps-pow-max")
        eps_exponents = tuple(range(args.eps_pow_min, args.eps_pow_max + 1))

        reports = run_suite(args.suite, seed, trials=trials, kmax=args.kmax, alpha=alpha, eps_exponents=eps_exponents)
        passed = all(r.passed for r in reports)
        payload = {
            "suite": args.suite,
            "seed": seed,
            "passed": passed,
            "reports": json.loads(reports_to_json(reports)),
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.output)
        return 0 if passed else 1

    parser.error(f"unknown command {args.command!r}")


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())

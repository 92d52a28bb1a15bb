"""Command-line driver.

    xplab growth --sizes 4,8,16,32 --eps constant --out report.csv [--json report.json]
    xplab verify --seed 42 --trials 100
    xplab besov --fn eta --extent 64pi --points 16384 [--json out.json]

Exit codes: 0 success, 1 suite failure, 2 configuration error.
``XPLAB_THREADS`` caps the growth worker pool (default: hardware count).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .experiment import (
    EPSILON_SCHEDULES,
    ExperimentConfig,
    cmd_besov,
    cmd_growth,
    cmd_verify,
)

_EPS_ALIASES = {
    "constant": "constant",
    "1/n": "one_over_size",
    "one_over_size": "one_over_size",
    "1/loglog": "one_over_loglog",
    "one_over_loglog": "one_over_loglog",
}


def _parse_sizes(text: str) -> tuple:
    try:
        sizes = tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("need at least one size")
    return sizes


def _parse_extent(text: str) -> float:
    token = text.strip().lower()
    try:
        if token.endswith("pi"):
            return float(token[:-2] or "1") * math.pi
        return float(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad extent {text!r}; use e.g. 64pi or 201.06")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xplab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    growth = sub.add_parser("growth", help="run the trace-norm growth experiment")
    growth.add_argument("--sizes", type=_parse_sizes, required=True,
                        help="comma-separated instance sizes, ascending")
    growth.add_argument("--eps", default="constant", choices=sorted(_EPS_ALIASES),
                        help="epsilon schedule")
    growth.add_argument("--out", default=None, help="CSV output path")
    growth.add_argument("--json", dest="json_path", default=None, help="JSON output path")
    growth.add_argument("--besov-max-size", type=int, default=64,
                        help="largest size for which the Besov estimate is computed")
    growth.add_argument("--sup-step", type=float, default=math.pi / 8,
                        help="grid step of the sup-norm scan")

    verify = sub.add_parser("verify", help="run the randomized identity suites")
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--trials", type=int, default=100)

    besov = sub.add_parser("besov", help="Besov estimate of a named function")
    besov.add_argument("--fn", required=True,
                       help="eta | psi | phi_tri:<n> | f3:<n>")
    besov.add_argument("--extent", type=_parse_extent, default=64 * math.pi,
                       help="half-width of the 1-D sampling grid (e.g. 64pi)")
    besov.add_argument("--points", type=int, default=2**14,
                       help="1-D sample count (power of two)")
    besov.add_argument("--json", dest="json_path", default=None, help="JSON output path")
    return parser


def _run_growth(args) -> int:
    config = ExperimentConfig(
        sizes=args.sizes,
        epsilon_schedule=_EPS_ALIASES[args.eps],
        sup_step=args.sup_step,
        besov_max_size=args.besov_max_size,
    )
    try:
        config.validate()
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = cmd_growth(config, csv_path=args.out, json_path=args.json_path)
    for row in report.rows:
        besov = "-" if row.besov_estimate is None else f"{row.besov_estimate:.6f}"
        print(
            f"n={row.n:<5d} s1_diff={row.s1_diff_norm:.6f} pert={row.perturbation_s1:.6f} "
            f"sup={row.sup_norm:.6f} besov={besov} ratio={row.ratio:.6f}"
        )
    print(f"fit: ratio ~ {report.fit_a:.4f} + {report.fit_b:.4f} ln n  (r^2 = {report.fit_r2:.6f})")
    return 0


def _run_verify(args) -> int:
    try:
        summary = cmd_verify(seed=args.seed, trials=args.trials)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for line in summary.lines():
        print(line)
    if summary.all_passed:
        print("all suites passed")
        return 0
    print("suite failure", file=sys.stderr)
    return 1


def _run_besov(args) -> int:
    try:
        report = cmd_besov(args.fn, extent=args.extent, points=args.points)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "growth":
        return _run_growth(args)
    if args.command == "verify":
        return _run_verify(args)
    return _run_besov(args)


if __name__ == "__main__":
    sys.exit(main())

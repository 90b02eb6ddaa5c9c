"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 check failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

import numpy as np

from .errors import InputError, NonSimpleEigenvalueOne, NumericalError
from .fiber import build_bc, fiber_of, reduce_zero_loci
from .fixed_points import fixed_point_set
from .scenario import load_scenario, simulate
from .simplex import build_cubic_matrix
from .spectral import eigen_all, predict_limit, steps_to_tolerance
from .verify import format_lines, load_suite, load_suite_file, run_suite

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_NUMERIC = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _load(args):
    sc = load_scenario(args.scenario)
    if args.max_iters is not None:
        sc.run.max_iters = args.max_iters
    if args.tol is not None:
        sc.run.conv_tol = args.tol
    return sc


def cmd_simulate(args):
    sc = _load(args)
    report = simulate(sc.coefficients(), sc.initial_state(), sc.run)
    if args.format == "csv":
        return report.to_csv(), EXIT_OK
    return _dump({"name": sc.name, **report.to_json()}), EXIT_OK


def cmd_predict(args):
    sc = _load(args)
    A, x0 = sc.coefficients(), sc.initial_state()
    try:
        pred = predict_limit(A, x0)
    except NonSimpleEigenvalueOne as exc:
        out = {"name": sc.name, "refused": True, "reason": str(exc),
               "frozen_loci": exc.frozen_loci, "fallback": "simulate"}
        return _dump(out), EXIT_NUMERIC
    return _dump({"name": sc.name, "refused": False, **pred.to_json()}), EXIT_OK


def cmd_spectrum(args):
    sc = _load(args)
    A, x0 = sc.coefficients(), sc.initial_state()
    fiber, u = fiber_of(x0)
    A_red, f_red, _, keep = reduce_zero_loci(A, fiber, u)
    out = {"name": sc.name, "c": fiber.c.tolist(), "kept_loci": keep.tolist()}
    if A_red is None:
        out["note"] = "single surviving locus: W is the identity on this fiber"
        return _dump(out), EXIT_OK
    B = build_bc(A_red, f_red)
    summary = eigen_all(B)
    cols = B.column_sums
    out.update(
        B=B.B.tolist(),
        column_sums=cols.tolist(),
        left_stochastic=bool(B.B.min() >= 0.0 and np.all(np.abs(cols - 1.0) <= 1e-14)),
        frozen_loci=[int(keep[i]) for i in A_red.frozen_loci],
        spectrum=summary.to_json(),
        convergence_estimate=steps_to_tolerance(summary.spectral_gap, sc.run.conv_tol),
    )
    return _dump(out), EXIT_OK


def cmd_fixed_points(args):
    sc = _load(args)
    A, x0 = sc.coefficients(), sc.initial_state()
    fiber, _ = fiber_of(x0)
    fps = fixed_point_set(A, fiber)
    return _dump({"name": sc.name, **fps.to_json()}), EXIT_OK


def cmd_cubic(args):
    sc = _load(args)
    cub = build_cubic_matrix(sc.coefficients())
    return _dump({"name": sc.name, "m": sc.m, "levels": cub.to_json()}), EXIT_OK


def default_suite() -> dict:
    return json.loads(resources.files("lociqso").joinpath("data/default_suite.json").read_text())


def cmd_verify(args):
    if args.scenario:
        seed, checks, entries = load_suite_file(args.scenario, args.seed)
    else:
        seed, checks, entries = load_suite(default_suite(), args.seed)
    report = run_suite(seed, checks, entries)
    text = "\n".join(format_lines(report)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(_dump(report))
        args.out = None
    s = report["summary"]
    code = EXIT_CHECK if s["failed"] else EXIT_INPUT if s["input_errors"] else EXIT_OK
    return text, code


COMMANDS = {
    "simulate": cmd_simulate,
    "predict": cmd_predict,
    "spectrum": cmd_spectrum,
    "fixed-points": cmd_fixed_points,
    "cubic": cmd_cubic,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lociqso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=name != "verify",
                       help="scenario JSON (suite JSON for verify; default: shipped suite)")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, help="override the suite seed (verify)")
        p.add_argument("--max-iters", type=int)
        p.add_argument("--tol", type=float)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format == "csv" and args.command != "simulate":
        print("error: --format csv is only available for simulate", file=sys.stderr)
        return EXIT_INPUT
    if args.max_iters is not None and args.max_iters < 1 or args.tol is not None and not args.tol > 0:
        print("error: --max-iters must be >= 1 and --tol > 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        text, code = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

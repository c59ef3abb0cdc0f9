"""Command-line front end.

Subcommands: ``gen``, ``error``, ``discrepancy``, ``convergence`` and
``verify``.  Every option may also come from a JSON file given with
``--config``; keys are the option names with dashes replaced by
underscores, and options given on the command line win.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numerical-consistency error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys

import numpy as np

from . import csvio
from .discrepancy import QUADRATURE_GRID, RmsRecord, discrepancy, log_ratio, rms_l2_experiment
from .errors import (EXACT_MAX_N, ErrorReport, fit_loglog, replicate_prefix_values,
                     rms_wce_monte_carlo, rms_wce_series, rms_wce_sq_exact, summarize,
                     theory_bound_korobov, theory_bound_sobolev, wce_sq_korobov,
                     wce_sq_korobov_exact, wce_sq_sobolev)
from .exceptions import NumericalConsistencyError, QMCError
from .halton import HaltonSpec, halton_block
from .padic import sample_shift, shared_precision
from .primes import first_primes
from .verify import CHECKS, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

MIN_FIT_POINTS = 4


class UsageError(Exception):
    """Invalid or inconsistent configuration."""


# ---------------------------------------------------------------- parsing helpers

def parse_int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma separated list of integers, got {text!r}") from exc


def parse_weights(text, s, name="gamma"):
    """Weights as ``c`` (constant), ``pow:c`` (j^-c) or ``a,b,...`` (explicit)."""
    if isinstance(text, (int, float)):
        text = str(text)
    if isinstance(text, (list, tuple)):
        values = [float(v) for v in text]
    else:
        text = str(text).strip()
        try:
            if text.startswith("pow:"):
                c = float(text[4:])
                if not c > 0:
                    raise UsageError(f"{name} power-law exponent must be positive")
                return [float(j) ** -c for j in range(1, s + 1)]
            if text.startswith("const:"):
                text = text[6:]
            if text.startswith("list:"):
                text = text[5:]
            values = [float(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"cannot parse {name} spec {text!r}") from exc
    if len(values) == 1:
        values = values * s
    if len(values) != s:
        raise UsageError(f"{name} has {len(values)} entries for dimension {s}")
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise UsageError(f"{name} entries must be positive")
    return values


def parse_shift(text):
    """``seed:replicate`` as a pair of ints."""
    try:
        seed, rep = str(text).split(":")
        return int(seed), int(rep)
    except ValueError as exc:
        raise UsageError(f"--shift expects seed:replicate, got {text!r}") from exc


def resolve_bases(args):
    if args.bases is not None:
        bases = parse_int_list(args.bases)
        if args.s is not None and args.s != len(bases):
            raise UsageError(f"--s {args.s} disagrees with {len(bases)} bases")
        return tuple(bases)
    if args.s is None:
        raise UsageError("give --bases or --s (with --first-primes)")
    if args.s < 1:
        raise UsageError("--s must be at least 1")
    return tuple(int(p) for p in first_primes(args.s))


def geometric_grid(n_min, n_max, factor):
    if n_min < 1 or n_max < n_min or factor < 2:
        raise UsageError("need 1 <= n-min <= n-max and factor >= 2")
    grid = []
    n = n_min
    while n <= n_max:
        grid.append(n)
        n *= factor
    return grid


def read_points(path):
    """Points from a CSV with header ``n,x1,...`` (as written by ``gen``) or bare rows."""
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                continue  # header
    if not rows:
        raise UsageError(f"no points in {path}")
    arr = np.array(rows, dtype=np.float64)
    with open(path) as fh:
        has_index = fh.readline().strip().startswith("n,")
    return arr[:, 1:] if has_index else arr


@contextlib.contextmanager
def open_output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        try:
            fh = open(path, "w", newline="")
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from exc
        with fh:
            yield fh


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    bases = resolve_bases(args)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    shift = None
    if args.shift is not None:
        if args.output in (None, "-"):
            raise UsageError("--shift records the shift in a sidecar file and needs --output")
        seed, rep = parse_shift(args.shift)
        shift = sample_shift(bases, shared_precision(bases), seed, rep)
    block = halton_block(HaltonSpec(bases, args.start_index, shift), args.n)
    with open_output(args.output) as fh:
        block.to_csv(fh)
    if shift is not None:
        sidecar = {
            "bases": list(bases),
            "precision": shift.precision,
            "seed": shift.provenance[1],
            "replicate": shift.provenance[2],
            "digits": [list(z.digits) for z in shift.sigma],
        }
        with open(args.output + ".shift.json", "w") as fh:
            json.dump(sidecar, fh, indent=1)
            fh.write("\n")
    return EXIT_OK


def _points_for(args, bases, N):
    shift = None
    if getattr(args, "shift", None) is not None:
        seed, rep = parse_shift(args.shift)
        shift = sample_shift(bases, shared_precision(bases), seed, rep)
    return halton_block(HaltonSpec(bases, args.start_index, shift), N).points


def _error_rows(args):
    if args.points is not None:
        x = read_points(args.points)
        s = x.shape[1]
        gamma = parse_weights(args.gamma, s)
        if args.mode != "exact" or args.space != "sobolev":
            raise UsageError("--points supports only --space sobolev --mode exact")
        if x.shape[0] > EXACT_MAX_N:
            raise UsageError(f"exact mode is limited to N <= {EXACT_MAX_N}; use --mode series")
        # the theory bound describes shifted Halton rules, not arbitrary points
        yield ErrorReport(x.shape[0], "sobolev", s, e_sq=wce_sq_sobolev(x, gamma))
        return
    bases = resolve_bases(args)
    s = len(bases)
    gamma = parse_weights(args.gamma, s)
    Ns = parse_int_list(args.n)
    if not Ns or min(Ns) < 1:
        raise UsageError("--n needs positive sizes")
    g = None if args.g is None else parse_int_list(args.g)
    if g is not None and len(g) == 1:
        g = g * s
    if args.space == "korobov":
        alpha = parse_weights(args.alpha, s, "alpha")
        if any(a <= 1 for a in alpha):
            raise UsageError("alpha must exceed 1")
        if args.mode == "mc":
            raise UsageError("the Korobov-type space is evaluated for unshifted rules only")
        spec = HaltonSpec(bases, args.start_index)
        for N in Ns:
            bound = theory_bound_korobov(bases, gamma, N)
            if args.mode == "exact":
                yield ErrorReport(N, "korobov", s, e_sq=wce_sq_korobov_exact(spec, alpha, gamma, N),
                                  theory_bound=bound)
            else:
                rep = wce_sq_korobov(spec, alpha, gamma, N, g)
                yield ErrorReport(N, "korobov", s, series_value=(rep.partial, rep.tail),
                                  theory_bound=bound)
        return
    spec = HaltonSpec(bases, args.start_index)
    if args.mode == "exact":
        if max(Ns) > EXACT_MAX_N:
            raise UsageError(f"exact mode is limited to N <= {EXACT_MAX_N}; use --mode series")
    for N in Ns:
        bound = theory_bound_sobolev(bases, gamma, N) if N >= 2 else None
        if args.mode == "exact":
            x = _points_for(args, bases, N)
            yield ErrorReport(N, "sobolev", s, e_sq=wce_sq_sobolev(x, gamma),
                              theory_bound=bound, seed=None)
        elif args.mode == "mc":
            if args.M < 2:
                raise UsageError("--M must be at least 2")
            res = rms_wce_monte_carlo(spec, gamma, N, args.M, args.seed, args.threads)
            series = rms_wce_series(spec, gamma, N, g)
            yield ErrorReport(N, "sobolev", s, rms_estimate=(res.mean, res.stderr, res.M),
                              series_value=series, theory_bound=bound, seed=args.seed)
        else:
            series = rms_wce_series(spec, gamma, N, g)
            yield ErrorReport(N, "sobolev", s, series_value=series, theory_bound=bound)


def cmd_error(args):
    rows = list(_error_rows(args))
    with open_output(args.output) as fh:
        csvio.write_rows(fh, ErrorReport.CSV_HEADER, (r.csv_row() for r in rows))
    return EXIT_OK


def cmd_discrepancy(args):
    if args.points is not None:
        x = read_points(args.points)
    else:
        bases = resolve_bases(args)
        x = _points_for(args, bases, args.n)
    s = x.shape[1]
    gamma = None if args.gamma is None else parse_weights(args.gamma, s)
    res = discrepancy(x, gamma, args.method, args.grid)
    with open_output(args.output) as fh:
        csvio.write_rows(fh, ("N", "s", "method", "weights", "l2_sq"),
                         [[x.shape[0], s, res.method, res.weights, res.l2_sq]])
    return EXIT_OK


def cmd_convergence(args):
    bases = resolve_bases(args)
    s = len(bases)
    grid = geometric_grid(args.n_min, args.n_max, args.factor)
    if len(grid) < MIN_FIT_POINTS:
        raise UsageError(f"the N grid has {len(grid)} points; at least {MIN_FIT_POINTS} "
                         "are needed to fit a slope")
    if args.M < 2:
        raise UsageError("--M must be at least 2")
    if grid[0] < 2:
        raise UsageError("--n-min must be at least 2 for the log ratio")
    spec = HaltonSpec(bases, args.start_index)
    gamma = None if args.gamma is None else parse_weights(args.gamma, s)
    if args.kind == "discrepancy":
        exp = rms_l2_experiment(spec, grid, args.M, args.seed, args.threads, gamma)
        records, slope, r2 = exp.records, exp.slope, exp.r2
    else:
        gamma = gamma if gamma is not None else [1.0] * s
        if args.mode == "series":
            means = [rms_wce_sq_exact(spec, gamma, N) for N in grid]
            records = [RmsRecord(N, m, 0.0, math.sqrt(m), log_ratio(N, math.sqrt(m), s), m, 0)
                       for N, m in zip(grid, means)]
        else:
            vals = replicate_prefix_values(spec, grid, args.M, args.seed,
                                           lambda pts: wce_sq_sobolev(pts, gamma), args.threads)
            records = []
            for N, row in zip(grid, vals):
                res = summarize(row)
                rms = math.sqrt(res.mean)
                records.append(RmsRecord(N, res.mean, res.stderr, rms, log_ratio(N, rms, s),
                                         res.best_value, res.best_replicate))
        slope, _, r2 = fit_loglog(grid, [r.rms for r in records])
    with open_output(args.output) as fh:
        header = RmsRecord.CSV_HEADER
        if args.kind == "wce":
            header = tuple(h.replace("l2_sq", "e_sq") for h in header)
        csvio.write_rows(fh, header, (r.csv_row() for r in records))
        csvio.writer(fh).writerow(["slope", csvio.fmt(slope), "r2", csvio.fmt(r2)])
    return EXIT_OK


def cmd_verify(args):
    only = None
    if args.only:
        only = [name for item in args.only for name in str(item).split(",") if name]
        unknown = [n for n in only if n not in CHECKS]
        if unknown:
            raise UsageError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
    results = run_suite(only, args.seed, args.threads)
    with open_output(args.output) as fh:
        csvio.write_rows(fh, ("name", "status", "measured", "tolerance"),
                         (r.csv_row() for r in results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# ---------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: $QMC_THREADS or 1)")
    p.add_argument("--config", default=None, help="JSON file with option values")
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    p.add_argument("--seed", type=int, default=0)


def _add_points(p):
    p.add_argument("--bases", default=None, help="comma separated primes, e.g. 2,3,5")
    p.add_argument("--s", type=int, default=None, help="dimension (first s primes)")
    p.add_argument("--first-primes", action="store_true",
                   help="use the first s primes as bases (the default when --bases is absent)")
    p.add_argument("--start-index", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="haltonqmc",
                                     description="Halton sequences, p-adic shifts and QMC errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write Halton points as CSV")
    _add_common(p)
    _add_points(p)
    p.add_argument("--n", type=int, required=False, default=None)
    p.add_argument("--shift", default=None, help="seed:replicate of a sampled p-adic shift")
    p.set_defaults(func=cmd_gen, required=("n",))

    p = sub.add_parser("error", help="worst-case errors, RMS estimates and bounds")
    _add_common(p)
    _add_points(p)
    p.add_argument("--space", choices=("sobolev", "korobov"), default="sobolev")
    p.add_argument("--mode", choices=("exact", "mc", "series"), default="series")
    p.add_argument("--n", default=None, help="comma separated sizes")
    p.add_argument("--gamma", default="1", help="c, pow:c or a,b,...")
    p.add_argument("--alpha", default="2", help="smoothness of the Korobov-type space")
    p.add_argument("--M", type=int, default=64, help="number of random shifts")
    p.add_argument("--g", default=None, help="series truncation (one value or one per coordinate)")
    p.add_argument("--points", default=None, help="CSV of points instead of a Halton rule")
    p.add_argument("--shift", default=None, help="seed:replicate shift for --mode exact")
    p.set_defaults(func=cmd_error, required=())

    p = sub.add_parser("discrepancy", help="L2-discrepancy of one point set")
    _add_common(p)
    _add_points(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--gamma", default=None, help="weights; omit for the classical discrepancy")
    p.add_argument("--method", choices=("closed_form", "subset", "quadrature"),
                   default="closed_form")
    p.add_argument("--grid", type=int, default=QUADRATURE_GRID)
    p.add_argument("--points", default=None)
    p.add_argument("--shift", default=None)
    p.set_defaults(func=cmd_discrepancy, required=())

    p = sub.add_parser("convergence", help="RMS convergence study over a geometric N grid")
    _add_common(p)
    _add_points(p)
    p.add_argument("--kind", choices=("discrepancy", "wce"), default="discrepancy")
    p.add_argument("--mode", choices=("mc", "series"), default="mc",
                   help="for --kind wce: Monte Carlo or the exact series")
    p.add_argument("--n-min", type=int, default=16)
    p.add_argument("--n-max", type=int, default=4096)
    p.add_argument("--factor", type=int, default=2)
    p.add_argument("--M", type=int, default=64)
    p.add_argument("--gamma", default=None)
    p.set_defaults(func=cmd_convergence, required=())

    p = sub.add_parser("verify", help="run the oracle check suite")
    _add_common(p)
    p.add_argument("--only", action="append", default=None, help="check name(s), repeatable")
    p.set_defaults(func=cmd_verify, required=())
    return parser


def _apply_config(parser, argv):
    """Re-parse with JSON config values as defaults so explicit flags win."""
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    known = set(vars(args))
    unknown = sorted(k for k in (key.replace("-", "_") for key in config) if k not in known)
    if unknown or "command" in config:
        raise UsageError(f"unknown config keys: {unknown or ['command']}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
    return parser.parse_args(argv)


def _validate(args):
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be at least 1")
    for name in args.required:
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    if args.command == "error" and args.points is None and args.n is None:
        raise UsageError("--n is required")
    if args.command == "discrepancy" and args.points is None and args.n is None:
        raise UsageError("--n or --points is required")


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalConsistencyError as exc:
        print(f"numerical consistency error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QMCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

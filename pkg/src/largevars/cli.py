"""Command-line interface: ``largevars {test, quantiles, simulate, airy-sim}``.

Exit codes: 0 completed, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coint import TestResult, run_test
from .diagnostics import eigen_histogram, render_diagnostic
from .errors import DomainError, NumericalError, ParseError, ValidationError
from .rmt_sim import AirySimConfig, H0SimConfig, airy_partial_sums, empirical_p_value, estimate_quantile_table
from .tables import SIGNIFICANCE_LEVELS, quantile_table, table_resource_name, write_table_file

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def parse_timeseries_csv(path, header: bool = False, date_col: bool = False, log: bool = False) -> np.ndarray:
    """Read a (T + 1) x N matrix from CSV; rows are time points in ascending order.

    ``header`` skips the first line, ``date_col`` drops the first column and
    ``log`` applies the natural logarithm to every cell.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        width = None
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            cells = row[1:] if date_col else row
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(f"{path}: line {reader.line_num} has {len(cells)} values, expected {width}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ParseError(f"{path}: line {reader.line_num}: non-numeric cell ({exc})") from None
    if len(rows) < 2 or not width:
        raise ParseError(f"{path}: need at least 2 data rows and 1 column")
    X = np.array(rows)
    if not np.all(np.isfinite(X)):
        raise ParseError(f"{path}: non-finite values")
    if log:
        if np.any(X <= 0):
            raise DomainError(f"{path}: log transform needs strictly positive values")
        X = np.log(X)
    return X


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_test_report(res: TestResult) -> str:
    lines = [
        "Cointegration test for high-dimensional VAR(k)",
        "=" * 46,
    ]
    for key in ("n", "t", "k", "r", "alpha"):
        lines.append(f"{key}: {_fmt(getattr(res, key))}")
    d = res.to_dict()
    for key in ("lambda_minus", "lambda_plus", "c1", "c2", "lr_raw", "statistic", "p_value", "decision"):
        lines.append(f"{key}: {_fmt(d[key])}")
    lines.append(f"critical_levels: {json.dumps(list(SIGNIFICANCE_LEVELS))}")
    lines.append(f"critical_values: {json.dumps(d['critical_values'])}")
    if res.p_value is None:
        lines.append("note: p-value and decision need r <= 10; only the statistic is reported")
    else:
        lines.append("If the test statistic is larger than the quantile, reject H0.")
    lines.append("")
    lines.append("significance table")
    lines.append(f"{'':6}" + "".join(f"{q:>9.2f}" for q in SIGNIFICANCE_LEVELS) + f"{'Test stat.':>14}")
    for i, row in enumerate(res.significance_table):
        lines.append(f"{f'r={i + 1}':6}" + "".join(f"{v:9.2f}" for v in row[:4]) + f"{row[4]:14.7f}")
    return "\n".join(lines) + "\n"


def format_quantile_grid(r: int) -> str:
    grid = quantile_table(r).grid()
    lines = [f"{'':5}" + "".join(f"{b:>8d}" for b in range(10))]
    for a in range(10):
        cells = "".join(f"{'-Inf' if v == -math.inf else f'{v:.2f}':>8}" for v in grid[a])
        lines.append(f"0.{a}  {cells}")
    return "\n".join(lines) + "\n"


def cmd_test(args) -> int:
    X = parse_timeseries_csv(args.data, header=args.header, date_col=args.date_col, log=args.log)
    res = run_test(X, k=args.k, r=args.r, alpha=args.alpha, fin_sample_corr=args.fin_sample_corr)
    sys.stdout.write(format_test_report(res))
    if args.json:
        Path(args.json).write_text(json.dumps(res.to_dict(), indent=2) + "\n", encoding="utf-8")
    if args.plot:
        hist = eigen_histogram(res.eigenvalues, args.bins, res.params)
        render_diagnostic(hist, res.params, args.plot)
    return EXIT_OK


def cmd_quantiles(args) -> int:
    table = quantile_table(args.r)
    if args.json:
        payload = {"r": table.r, "quantiles": {f"{i / 100:.2f}": float(v) for i, v in enumerate(table.values)}}
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(format_quantile_grid(args.r))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = H0SimConfig(
        N=args.n, tau=args.tau, k=args.k, r=args.r, fin_sample_corr=args.fin_sample_corr, sim_num=args.sims, seed=args.seed
    )
    p, samples = empirical_p_value(cfg, args.stat)
    out = [
        "Empirical p-value from simulated null (no cointegration) data",
        f"n: {cfg.N}",
        f"tau: {cfg.tau}",
        f"k: {cfg.k}",
        f"r: {cfg.r}",
        f"sims: {cfg.sim_num}",
        f"stat: {args.stat!r}",
        f"empirical_p_value: {p!r}",
    ]
    sys.stdout.write("\n".join(out) + "\n")
    if args.out:
        np.savetxt(args.out, samples, header="statistic", comments="", fmt="%.17g")
    if args.hist:
        hist = eigen_histogram(samples, args.bins)
        rows = ["bin,left,right,density"]
        rows += [f"bin,{float(a)!r},{float(b)!r},{float(d)!r}" for a, b, d in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.densities)]
        Path(args.hist).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_airy_sim(args) -> int:
    cfg = AirySimConfig(n_full=args.n_full, m=args.m, r_max=args.r_max, num_sims=args.sims, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    batch = airy_partial_sums(cfg)
    wall = time.perf_counter() - t0
    written = []
    for r in range(1, cfg.r_max + 1):
        table = estimate_quantile_table(batch, r, groups=args.groups)
        path = out_dir / table_resource_name(r)
        header = [
            f"Simulated quantiles of the sum of the first {r} Airy_1 points.",
            f"n_full={cfg.n_full} m={cfg.m} num_sims={cfg.num_sims} seed={cfg.seed} groups={args.groups}",
        ]
        write_table_file(path, table, header)
        written.append(path.name)
    if args.batch_csv:
        batch.to_csv(args.batch_csv)
    manifest = {
        "n_full": cfg.n_full,
        "m": cfg.m,
        "r_max": cfg.r_max,
        "num_sims": cfg.num_sims,
        "seed": cfg.seed,
        "groups": args.groups,
        "samples": int(batch.samples.shape[0]),
        "tables": written,
        "wall_time_s": wall,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(f"wrote {len(written)} table(s) to {out_dir}\n")
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="largevars", description="Cointegration test for high-dimensional VARs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run the cointegration test on a CSV of levels")
    p.add_argument("--data", required=True, help="CSV file, one column per series, rows t = 0..T")
    p.add_argument("--k", type=_positive_int, default=1, help="VAR order (default 1)")
    p.add_argument("--r", type=_positive_int, default=1, help="number of top eigenvalues (default 1)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level on the 0.01 grid")
    p.add_argument("--fin-sample-corr", action="store_true", help="finite-sample correction (not configured)")
    p.add_argument("--log", action="store_true", help="take natural logs of the data")
    p.add_argument("--header", action="store_true", help="skip the first CSV line")
    p.add_argument("--date-col", action="store_true", help="drop the first CSV column")
    p.add_argument("--plot", help="write the Wachter diagnostic (.svg or .csv)")
    p.add_argument("--bins", type=_positive_int, help="histogram bins (default max(10, round(sqrt(N))))")
    p.add_argument("--json", help="write the full result as JSON")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("quantiles", help="print an embedded quantile table")
    p.add_argument("--r", type=int, required=True, help="1..10")
    p.add_argument("--json", action="store_true", help="emit level -> value pairs as JSON")
    p.set_defaults(func=cmd_quantiles)

    p = sub.add_parser("simulate", help="empirical p-value from simulated null data")
    p.add_argument("--n", type=_positive_int, required=True, help="number of series")
    p.add_argument("--tau", type=_positive_int, required=True, help="series length T + 1")
    p.add_argument("--stat", type=float, required=True, help="statistic value to evaluate")
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--r", type=_positive_int, default=1)
    p.add_argument("--fin-sample-corr", action="store_true")
    p.add_argument("--sims", type=int, default=1000, help="number of simulations (default 1000)")
    p.add_argument("--seed", type=int, help="seed for reproducible runs")
    p.add_argument("--out", help="write simulated statistics, one per line")
    p.add_argument("--hist", help="write a histogram CSV of the simulated statistics")
    p.add_argument("--bins", type=_positive_int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("airy-sim", help="regenerate Airy_1 partial-sum quantile tables by Monte Carlo")
    p.add_argument("--n-full", type=_positive_int, required=True, help="size of the full tridiagonal model")
    p.add_argument("--sims", type=int, required=True, help="number of Monte Carlo runs")
    p.add_argument("--r-max", type=_positive_int, required=True, help="largest r to tabulate (<= 10)")
    p.add_argument("--m", type=_positive_int, help="corner size (default floor(sqrt(n_full)))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--groups", type=_positive_int, default=1, help="average quantiles over this many run groups")
    p.add_argument("--batch-csv", help="also dump the raw partial sums as CSV")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_airy_sim)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Every subcommand emits CSV (comma separated, header row, 12 significant
digits, LF line endings) either to stdout or, with ``--out DIR``, into that
directory under a fixed file name.  Run ``distyle <command> --help`` for the
flags of each command.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import genfunc, harness
from .characteristics import critical_times, eval_path, integrating_factor, make_path
from .grid import Method, SolveOptions, solve_grid, write_grid_csv
from .model import ModelParams
from .montecarlo import McConfig, State, estimate, estimate_lattice, write_mc_csv


def _add_rates(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--r", type=float, required=True, help="birth rate (r > d)")
    parser.add_argument("--d", type=float, required=True, help="death rate (d > 0)")


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out", type=Path, default=None, help="output directory (default: stdout)"
    )


def _open_out(args, filename: str):
    if args.out is None:
        return sys.stdout
    args.out.mkdir(parents=True, exist_ok=True)
    return open(args.out / filename, "w", newline="")


def _emit(args, filename: str, header: list[str], rows) -> None:
    fp = _open_out(args, filename)
    try:
        fp.write(",".join(header) + "\n")
        for row in rows:
            fp.write(",".join(_cell(v) for v in row) + "\n")
    finally:
        if fp is not sys.stdout:
            fp.close()


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(v)
    return f"{v:.12g}"


def _cmd_grid(args) -> int:
    params = ModelParams(args.r, args.d)
    options = SolveOptions(method=Method(args.method), tol=args.tol, max_iter=args.max_iter)
    solution = solve_grid(params, args.n, options, closure=args.closure)
    fp = _open_out(args, "grid_p.csv")
    try:
        write_grid_csv(solution, fp)
    finally:
        if fp is not sys.stdout:
            fp.close()
    print(
        f"solved N={args.n} via {options.method.value}: "
        f"iterations={solution.iterations} residual={solution.residual:.3e} "
        f"closure: {solution.closure}",
        file=sys.stderr,
    )
    return 0


def _cmd_mc(args) -> int:
    params = ModelParams(args.r, args.d)
    if args.imax is not None or args.jmax is not None:
        if args.imax is None or args.jmax is None:
            raise ValueError("lattice mode needs both --imax and --jmax")
        lattice = estimate_lattice(params, args.imax, args.jmax, args.m, args.t, args.seed)
        fp = _open_out(args, "mc_p.csv")
        try:
            write_mc_csv(lattice, fp)
        finally:
            if fp is not sys.stdout:
                fp.close()
        return 0
    if args.i is None or args.j is None:
        raise ValueError("point mode needs --i and --j (or --imax/--jmax for a lattice)")
    config = McConfig(m=args.m, t_horizon=args.t, seed=args.seed, initial=State(args.i, args.j))
    est = estimate(params, config)
    _emit(
        args,
        "mc_p.csv",
        ["i", "j", "p_hat", "ci_low", "ci_high", "M", "T", "seed"],
        [(args.i, args.j, est.p_hat, est.ci_low, est.ci_high, est.m, est.t_horizon, est.seed)],
    )
    return 0


def _cmd_greens(args) -> int:
    params = ModelParams(args.r, args.d)
    solution = solve_grid(
        params, args.n, SolveOptions(method=Method.DIRECT_BANDED, tol=args.tol)
    )
    xs = np.linspace(args.xmin, args.xmax, args.nx)
    ys = np.linspace(args.ymin, args.ymax, args.ny)
    rows = []
    for x0 in xs:
        for y0 in ys:
            query = genfunc.query_from_grid(solution, float(x0), float(y0), args.quad_tol)
            quad = genfunc.eval_by_quadrature(params, query)
            series = genfunc.eval_from_grid(solution, float(x0), float(y0))
            rows.append((x0, y0, quad, series.value, abs(quad - series.value)))
    _emit(args, "genfunc.csv", ["x", "y", "P_quadrature", "P_series", "abs_diff"], rows)
    return 0


def _cmd_characteristics(args) -> int:
    params = ModelParams(args.r, args.d)
    path = make_path(params, args.x0, args.y0)
    s_plus, s_minus = critical_times(path)
    times = np.linspace(0.0, path.s0 * (1.0 - 1e-9), args.samples)
    x, y = eval_path(path, times)
    factor = integrating_factor(path, times)
    _emit(
        args,
        "characteristic.csv",
        ["s", "x", "y", "integrating_factor"],
        zip(times, x, y, factor),
    )
    print(
        f"s0={path.s0:.12g} s_plus={s_plus:.12g} s_minus={s_minus:.12g} "
        f"kappa={path.kappa:.12g}",
        file=sys.stderr,
    )
    return 0


def _read_field(path: Path) -> np.ndarray:
    """Load an ``i,j,value`` CSV (extra columns ignored) into a dense array."""
    triples = []
    with open(path, newline="") as fp:
        reader = csv.reader(fp)
        next(reader)  # header
        for row in reader:
            triples.append((int(row[0]), int(row[1]), float(row[2])))
    if not triples:
        raise ValueError(f"{path} holds no data rows")
    rows = max(t[0] for t in triples)
    cols = max(t[1] for t in triples)
    field = np.full((rows, cols), np.nan)
    for i, j, v in triples:
        field[i - 1, j - 1] = v
    if np.isnan(field).any():
        raise ValueError(f"{path} does not cover the full {rows}x{cols} box")
    return field


def _cmd_compare(args) -> int:
    a = _read_field(args.field_a)
    b = _read_field(args.field_b)
    sub = (args.sub, args.sub) if args.sub else None
    report = harness.compare(a, b, sub=sub)
    rows = [
        (name, s.mean, s.st_dev, s.min, s.max) for name, s in report.stats.items()
    ]
    _emit(args, "comparison_stats.csv", ["metric", "mean", "st_dev", "min", "max"], rows)
    print(
        f"cells_excluded={report.cells_excluded} "
        f"rqe_by_a={report.rqe_by_a:.12g} rqe_by_b={report.rqe_by_b:.12g}",
        file=sys.stderr,
    )
    return 0


def _cmd_experiment(args) -> int:
    overrides = {}
    for name in (
        "r",
        "d",
        "grid_n",
        "tol",
        "mc_m",
        "mc_t",
        "seed",
        "sublattice",
        "conv_min",
        "conv_max",
        "conv_reference",
        "quad_tol",
    ):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.solver is not None:
        overrides["solver"] = Method(args.solver)
    if args.no_mc:
        overrides["run_mc"] = False
    if args.no_convergence:
        overrides["run_convergence"] = False
    if args.genfunc:
        overrides["run_genfunc"] = True

    runs: list[tuple[str, harness.ExperimentSpec]] = []
    if args.config is not None:
        runs.append(("config", harness.load_spec(args.config, **overrides)))
    else:
        names = list(harness.PRESETS) if args.preset == "both" else [args.preset]
        for name in names:
            runs.append((name, harness.spec_from_preset(name, **overrides)))

    for name, spec in runs:
        target = args.out if len(runs) == 1 else args.out / name
        written = harness.run_experiment(spec, target)
        for key, path in sorted(written.items()):
            print(f"{name}: {key} -> {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distyle",
        description="extinction probabilities of a two-morph flower population",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid", help="solve the truncated recurrence on an NxN box")
    _add_rates(p)
    p.add_argument("--n", type=int, required=True, help="box size N")
    p.add_argument("--method", choices=[m.value for m in Method], default="sweep")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument(
        "--closure",
        choices=["asymptotic", "bounds-lower", "bounds-upper", "ones"],
        default="asymptotic",
    )
    _add_out(p)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("mc", help="Monte-Carlo absorption frequencies")
    _add_rates(p)
    p.add_argument("--i", type=int, default=None, help="initial pins (point mode)")
    p.add_argument("--j", type=int, default=None, help="initial thrums (point mode)")
    p.add_argument("--imax", type=int, default=None, help="lattice mode: sweep i = 1..imax")
    p.add_argument("--jmax", type=int, default=None, help="lattice mode: sweep j = 1..jmax")
    p.add_argument("--m", type=int, default=200, help="paths per initial state")
    p.add_argument("--t", type=int, default=5000, help="time horizon")
    p.add_argument("--seed", type=int, default=0, help="stream seed (u64)")
    _add_out(p)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("greens", help="generating function: quadrature vs series")
    _add_rates(p)
    p.add_argument("--xmin", type=float, default=0.1)
    p.add_argument("--xmax", type=float, default=0.5)
    p.add_argument("--nx", type=int, default=5)
    p.add_argument("--ymin", type=float, default=0.1)
    p.add_argument("--ymax", type=float, default=0.5)
    p.add_argument("--ny", type=int, default=5)
    p.add_argument("--n", type=int, default=50, help="grid size for the series reference")
    p.add_argument("--tol", type=float, default=1e-12, help="grid solver tolerance")
    p.add_argument("--quad-tol", type=float, default=1e-8, help="quadrature budget")
    _add_out(p)
    p.set_defaults(func=_cmd_greens)

    p = sub.add_parser("characteristics", help="sample one characteristic curve")
    _add_rates(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)
    _add_out(p)
    p.set_defaults(func=_cmd_characteristics)

    p = sub.add_parser("compare", help="compare two i,j,value CSV fields")
    p.add_argument("--field-a", type=Path, required=True)
    p.add_argument("--field-b", type=Path, required=True)
    p.add_argument("--sub", type=int, default=None, help="restrict to the sub-lattice 1..sub")
    _add_out(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("experiment", help="run a full reproducible pipeline")
    p.add_argument(
        "--preset",
        choices=[*harness.PRESETS, "both"],
        default="both",
        help="named parameter set (ignored with --config)",
    )
    p.add_argument("--config", type=Path, default=None, help="key = value spec file")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=None)
    p.add_argument("--solver", choices=[m.value for m in Method], default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--mc-m", dest="mc_m", type=int, default=None)
    p.add_argument("--mc-t", dest="mc_t", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--sublattice", type=int, default=None)
    p.add_argument("--conv-min", dest="conv_min", type=int, default=None)
    p.add_argument("--conv-max", dest="conv_max", type=int, default=None)
    p.add_argument("--conv-reference", dest="conv_reference", type=int, default=None)
    p.add_argument("--no-mc", action="store_true")
    p.add_argument("--no-convergence", action="store_true")
    p.add_argument("--genfunc", action="store_true", help="add the quadrature cross-check")
    p.add_argument("--quad-tol", dest="quad_tol", type=float, default=None)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

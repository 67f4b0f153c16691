"""Cross-method comparison and reproducible experiment runs.

Two probability fields (grid vs Monte-Carlo, or two grids of different
truncation) are compared cellwise through squared, absolute and relative
differences, plus the relative quadratic error

    rqe = sqrt( sum (a - b)^2 / sum b^2 )

over a chosen sub-lattice.  ``run_experiment`` wires the solvers together
for a parameter set, writes every table as CSV, and is deterministic: the
same spec writes byte-identical files.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import genfunc
from .grid import Method, SolveOptions, solve_grid, write_grid_csv
from .model import ModelParams
from .montecarlo import estimate_lattice, write_mc_csv


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    st_dev: float
    min: float
    max: float

    @classmethod
    def of(cls, values: np.ndarray) -> "SummaryStats":
        if values.size == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan)
        return cls(
            float(values.mean()),
            float(values.std()),
            float(values.min()),
            float(values.max()),
        )


@dataclass(frozen=True)
class ComparisonReport:
    square: np.ndarray
    absolute: np.ndarray
    relative: np.ndarray  # NaN at excluded cells
    included: np.ndarray
    cells_excluded: int
    stats: dict[str, SummaryStats]
    rqe_by_a: float
    rqe_by_b: float


def compare(a: np.ndarray, b: np.ndarray, sub: tuple[int, int] | None = None) -> ComparisonReport:
    """Cellwise comparison of two fields sharing the origin cell (1, 1).

    Fields of different extent are compared on their overlap, further cropped
    to ``sub`` when given.  Relative differences use ``b`` as the reference
    and skip cells where either field vanishes (Monte-Carlo zeros would
    otherwise produce infinities); the skipped count is reported.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rows = min(a.shape[0], b.shape[0])
    cols = min(a.shape[1], b.shape[1])
    if sub is not None:
        rows, cols = min(rows, sub[0]), min(cols, sub[1])
    if rows < 1 or cols < 1:
        raise ValueError("comparison region is empty")
    a = a[:rows, :cols]
    b = b[:rows, :cols]

    diff = a - b
    square = diff * diff
    absolute = np.abs(diff)
    included = (a != 0.0) & (b != 0.0)
    relative = np.full_like(absolute, np.nan)
    relative[included] = absolute[included] / np.abs(b[included])

    def rqe(reference: np.ndarray) -> float:
        denom = float((reference * reference).sum())
        return math.sqrt(float(square.sum()) / denom) if denom > 0.0 else float("nan")

    return ComparisonReport(
        square=square,
        absolute=absolute,
        relative=relative,
        included=included,
        cells_excluded=int(included.size - included.sum()),
        stats={
            "square_error": SummaryStats.of(square.ravel()),
            "absolute_error": SummaryStats.of(absolute.ravel()),
            "relative_error": SummaryStats.of(relative[included].ravel()),
        },
        rqe_by_a=rqe(a),
        rqe_by_b=rqe(b),
    )


class FitResult(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    n_used: int


def fit_log_slope(
    n_values: np.ndarray, errors: np.ndarray, floor: float = 1e-12
) -> FitResult:
    """Least-squares slope of log(error) against N, skipping values at or
    below ``floor`` (solver precision, not truncation, dominates there)."""
    n_values = np.asarray(n_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > floor
    if keep.sum() < 3:
        raise ValueError("need at least three points above the floor to fit")
    x, y = n_values[keep], np.log(errors[keep])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return FitResult(float(slope), float(intercept), r2, int(keep.sum()))


def convergence_series(
    params: ModelParams,
    n_values: list[int],
    reference: np.ndarray,
    sublattice: int = 10,
    method: Method = Method.DIRECT_BANDED,
    tol: float = 1e-12,
) -> list[tuple[int, float]]:
    """rqe of the N-grid against a fixed reference field on the sub-lattice."""
    options = SolveOptions(method=method, tol=tol)
    out = []
    for n in n_values:
        solution = solve_grid(params, n, options)
        report = compare(solution.values, reference, sub=(sublattice, sublattice))
        out.append((n, report.rqe_by_b))
    return out


# ---------------------------------------------------------------------------
# experiment specification and runner


@dataclass(frozen=True)
class ExperimentSpec:
    r: float
    d: float
    grid_n: int = 50
    solver: Method = Method.DIRECT_BANDED
    tol: float = 1e-12
    mc_m: int = 200
    mc_t: int = 5000
    seed: int = 20260816
    sublattice: int = 10
    run_mc: bool = True
    run_convergence: bool = True
    conv_min: int = 10
    conv_max: int = 50
    conv_reference: int = 50
    run_genfunc: bool = False
    genfunc_min: float = 0.1
    genfunc_max: float = 0.5
    genfunc_count: int = 5
    quad_tol: float = 1e-8


PRESETS: dict[str, dict] = {
    # comfortably supercritical rates: fast absorption, tight MC agreement
    "supercritical": dict(r=3.0, d=2.0, grid_n=50),
    # near-critical rates: slow mixing; absorption from deep cells happens on
    # the diffusive scale (i+j)^2 steps, so the horizon must be much longer
    # than in the supercritical run or censoring dominates the comparison
    "near-critical": dict(r=2.002, d=2.0, grid_n=100, mc_t=200_000),
}


def spec_from_preset(name: str, **overrides) -> ExperimentSpec:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}, choose from {sorted(PRESETS)}")
    merged = dict(PRESETS[name])
    merged.update(overrides)
    return ExperimentSpec(**merged)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentSpec)}


def _coerce(name: str, raw: str):
    if name == "solver":
        return Method(raw)
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"cannot read {raw!r} as a boolean for {name}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def load_spec(path: Path, **overrides) -> ExperimentSpec:
    """Read a flat ``key = value`` config file; later overrides win.

    Recognised keys are exactly the ExperimentSpec fields; ``solver`` takes
    the method names sweep, direct or vi.  Lines starting with ``#`` and
    blank lines are ignored.
    """
    values: dict = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    values.update(overrides)
    return ExperimentSpec(**values)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return f"{value:.12g}"
    if isinstance(value, Method):
        return value.value
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fp:
        fp.write(",".join(header) + "\n")
        for row in rows:
            fp.write(",".join(_fmt(v) for v in row) + "\n")


def run_experiment(spec: ExperimentSpec, out_dir: Path) -> dict[str, Path]:
    """Execute the requested pipeline and write its tables under ``out_dir``.

    Always writes the solved grid and a manifest of the resolved spec; the
    Monte-Carlo table, comparison summaries, truncation-convergence series
    with fitted decay slopes, and the generating-function cross-check are
    optional stages.  Output is a name -> path map.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = ModelParams(spec.r, spec.d)
    written: dict[str, Path] = {}

    manifest = out_dir / "manifest.txt"
    with open(manifest, "w", newline="") as fp:
        for f in dataclasses.fields(spec):
            fp.write(f"{f.name} = {_fmt(getattr(spec, f.name))}\n")
    written["manifest"] = manifest

    solution = solve_grid(params, spec.grid_n, SolveOptions(method=spec.solver, tol=spec.tol))
    grid_path = out_dir / "grid_p.csv"
    with open(grid_path, "w", newline="") as fp:
        write_grid_csv(solution, fp)
    written["grid"] = grid_path

    mc = None
    if spec.run_mc:
        mc = estimate_lattice(
            params, spec.grid_n, spec.grid_n, spec.mc_m, spec.mc_t, spec.seed
        )
        mc_path = out_dir / "mc_p.csv"
        with open(mc_path, "w", newline="") as fp:
            write_mc_csv(mc, fp)
        written["mc"] = mc_path

        full = compare(mc.p_hat, solution.values)
        sub = compare(mc.p_hat, solution.values, sub=(spec.sublattice, spec.sublattice))
        stats_path = out_dir / "comparison_stats.csv"
        _write_csv(
            stats_path,
            ["metric", "mean", "st_dev", "min", "max"],
            [
                (name, s.mean, s.st_dev, s.min, s.max)
                for name, s in full.stats.items()
            ],
        )
        written["comparison_stats"] = stats_path
        summary_path = out_dir / "comparison_summary.csv"
        _write_csv(
            summary_path,
            ["name", "value"],
            [
                ("cells_excluded", full.cells_excluded),
                ("rqe_sublattice_by_mc", sub.rqe_by_a),
                ("rqe_sublattice_by_grid", sub.rqe_by_b),
                ("grid_residual", solution.residual),
                ("grid_iterations", solution.iterations),
            ],
        )
        written["comparison_summary"] = summary_path

    if spec.run_convergence:
        n_values = list(range(spec.conv_min, spec.conv_max + 1))
        reference = (
            solution
            if spec.conv_reference == spec.grid_n
            else solve_grid(
                params, spec.conv_reference, SolveOptions(method=spec.solver, tol=spec.tol)
            )
        )
        series_ref = convergence_series(
            params, n_values, reference.values, spec.sublattice, spec.solver, spec.tol
        )
        rows = []
        series_mc = None
        if mc is not None:
            series_mc = convergence_series(
                params, n_values, mc.p_hat, spec.sublattice, spec.solver, spec.tol
            )
            for (n, e_ref), (_, e_mc) in zip(series_ref, series_mc):
                rows.append((n, e_ref, e_mc))
            header = ["n", "rqe_vs_reference", "rqe_vs_mc"]
        else:
            rows = series_ref
            header = ["n", "rqe_vs_reference"]
        nconv_path = out_dir / "nconv.csv"
        _write_csv(nconv_path, header, rows)
        written["nconv"] = nconv_path

        fits = []
        ns = np.array([n for n, _ in series_ref])
        ref_errors = np.array([e for _, e in series_ref])
        not_self = ns != spec.conv_reference
        fit = fit_log_slope(ns[not_self], ref_errors[not_self])
        fits.append(("reference", *fit))
        if series_mc is not None:
            fit_mc = fit_log_slope(ns, np.array([e for _, e in series_mc]))
            fits.append(("mc", *fit_mc))
        fit_path = out_dir / "nconv_fit.csv"
        _write_csv(
            fit_path, ["target", "slope", "intercept", "r_squared", "n_used"], fits
        )
        written["nconv_fit"] = fit_path

    if spec.run_genfunc:
        points = np.linspace(spec.genfunc_min, spec.genfunc_max, spec.genfunc_count)
        rows = []
        for x0 in points:
            for y0 in points:
                query = genfunc.query_from_grid(solution, float(x0), float(y0), spec.quad_tol)
                quad = genfunc.eval_by_quadrature(params, query)
                series = genfunc.eval_from_grid(solution, float(x0), float(y0))
                rows.append((x0, y0, quad, series.value, abs(quad - series.value)))
        genfunc_path = out_dir / "genfunc.csv"
        _write_csv(
            genfunc_path, ["x", "y", "P_quadrature", "P_series", "abs_diff"], rows
        )
        written["genfunc"] = genfunc_path

    return written

"""Generating function P(x, y) = sum_{i,j>=1} p_{i,j} x^i y^j two ways.

Integrating the transport equation along the characteristic through
(x0, y0) from the start to the arrival time s0 kills the unknown boundary
term (the integrating factor pole at s0 is exactly compensated by the
monomial weights) and leaves an explicit representation driven by the first
column p_{i,1} alone:

    P(x0, y0) = (r/2) sum_{i>=1} i p_{i,1} int_0^{s0} (x_u^i + y_u^i) IF(u) du
              - d int_0^{s0} x_u y_u (1/(1-x_u) + 1/(1-y_u)) IF(u) du.

Truncating the sum at I0 terms and folding the geometric tail
(i p_{i,1} ~ 2d/r for large i) into the second integral gives the form
implemented here:

    P = (r/2) sum_{i=1}^{I0} i p_{i,1} int (x^i + y^i) IF
      + d int [ x (x^{I0} - y)/(1-x) + y (y^{I0} - x)/(1-y) ] IF.

All integrands are evaluated through the cancellation-free weighted
coordinates, which are analytic on the closed interval [0, s0], so plain
adaptive Gauss-Legendre panels converge fast with no endpoint special-casing.

The independent check is the truncated power series itself: a solved grid
provides p_{i,j} up to N, and the rigorous envelope bounds the discarded
tail of the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import asymptotics, characteristics
from .grid import GridSolution
from .model import ModelParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


class QuadratureError(RuntimeError):
    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate {estimate:.6e}, bound {error_bound:.3e})")
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class GenFuncQuery:
    """Evaluation request for the quadrature route.

    ``row1[k]`` holds p_{k+1,1}; ``n_terms`` monomial integrals are kept
    before the folded tail takes over, so ``row1`` must have at least
    ``n_terms`` entries.  ``tol`` is the absolute quadrature budget.
    """

    x0: float
    y0: float
    row1: tuple[float, ...]
    n_terms: int
    tol: float = 1e-8

    def __post_init__(self) -> None:
        if not (0.0 < self.x0 < 1.0 and 0.0 < self.y0 < 1.0):
            raise ValueError(f"evaluation point must lie in (0,1)^2, got ({self.x0}, {self.y0})")
        if self.n_terms < 1 or len(self.row1) < self.n_terms:
            raise ValueError(
                f"need at least n_terms={self.n_terms} first-column values, got {len(self.row1)}"
            )
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


def default_n_terms(x0: float, y0: float, tol: float, cap: int = 200) -> int:
    """Smallest I0 with max(x0, y0)^(I0+1) < tol; the folded tail then sits
    below the quadrature budget.  Capped to keep the monomial sum short."""
    base = max(x0, y0)
    n = 1
    while base ** (n + 1) >= tol and n < cap:
        n += 1
    return n


def query_from_grid(
    solution: GridSolution, x0: float, y0: float, tol: float = 1e-8
) -> GenFuncQuery:
    """Build a query whose first-column data comes from a solved grid.

    Entries beyond the grid (only possible for evaluation points extremely
    close to 1) fall back to the asymptotic first-column estimates.
    """
    n_terms = default_n_terms(x0, y0, tol)
    row1 = [solution.values[i - 1, 0] for i in range(1, min(n_terms, solution.n) + 1)]
    for i in range(solution.n + 1, n_terms + 1):
        row1.append(asymptotics.asymptotic_pij(solution.params, i, 1))
    return GenFuncQuery(x0=x0, y0=y0, row1=tuple(row1), n_terms=n_terms, tol=tol)


def _integrand(params: ModelParams, path, query: GenFuncQuery):
    r, d = params.r, params.d
    coeffs = np.arange(1, query.n_terms + 1) * np.asarray(query.row1[: query.n_terms])

    def f(u: np.ndarray) -> np.ndarray:
        x, y, wx, wy = characteristics.weighted_coords(path, u)
        monomials = 0.5 * r * (
            wx * np.polynomial.polynomial.polyval(x, coeffs)
            + wy * np.polynomial.polynomial.polyval(y, coeffs)
        )
        tail = d * (
            wx * (x**query.n_terms - y) / (1.0 - x)
            + wy * (y**query.n_terms - x) / (1.0 - y)
        )
        return monomials + tail

    return f


def _panel(f, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


_MAX_PANELS = 20_000


def _adaptive(
    f, a: float, b: float, tol: float, depth: int, whole: float, budget: list[int]
) -> tuple[float, float]:
    """Recursive bisection; accepts a panel when halving moves it by less
    than its share of the budget.  Returns (integral, error bound)."""
    mid = 0.5 * (a + b)
    left, right = _panel(f, a, mid), _panel(f, mid, b)
    err = abs(left + right - whole)
    budget[0] += 2
    if err <= tol or depth >= 48 or budget[0] >= _MAX_PANELS:
        return left + right, err
    le, lerr = _adaptive(f, a, mid, 0.5 * tol, depth + 1, left, budget)
    re, rerr = _adaptive(f, mid, b, 0.5 * tol, depth + 1, right, budget)
    return le + re, lerr + rerr


def eval_by_quadrature(params: ModelParams, query: GenFuncQuery) -> float:
    """P(x0, y0) by adaptive 15-point Gauss-Legendre along the characteristic."""
    path = characteristics.make_path(params, query.x0, query.y0)
    f = _integrand(params, path, query)
    budget = [0]
    value, err = _adaptive(f, 0.0, path.s0, query.tol, 0, _panel(f, 0.0, path.s0), budget)
    if err > query.tol:
        raise QuadratureError("quadrature did not meet its budget", value, err)
    return value


class SeriesValue(NamedTuple):
    value: float
    tail_bound: float


def eval_from_grid(solution: GridSolution, x0: float, y0: float) -> SeriesValue:
    """Truncated series sum_{i,j<=N} p_{i,j} x0^i y0^j with a rigorous tail bound.

    The discarded terms are bounded through the envelope
    p_{i,j} <= (d/r)^i + (d/r)^j, summed in closed form over the L-shaped
    region outside the box.
    """
    if not (0.0 < x0 < 1.0 and 0.0 < y0 < 1.0):
        raise ValueError(f"evaluation point must lie in (0,1)^2, got ({x0}, {y0})")
    n = solution.n
    px = x0 ** np.arange(1, n + 1)
    py = y0 ** np.arange(1, n + 1)
    value = float(px @ solution.values @ py)

    rho = solution.params.ratio

    def geom(q: float, lo: int, hi: int | None) -> float:
        # sum_{k=lo}^{hi} q^k, hi=None meaning infinity
        if hi is None:
            return q**lo / (1.0 - q)
        return (q**lo - q ** (hi + 1)) / (1.0 - q)

    tail = (
        geom(rho * x0, n + 1, None) * geom(y0, 1, None)
        + geom(x0, n + 1, None) * geom(rho * y0, 1, None)
        + geom(rho * x0, 1, n) * geom(y0, n + 1, None)
        + geom(x0, 1, n) * geom(rho * y0, n + 1, None)
    )
    return SeriesValue(value, float(tail))

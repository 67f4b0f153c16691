"""Characteristic curves of the transport equation for the generating function.

Summing the extinction recurrence against x^i y^j turns it into a first-order
PDE for P(x, y) = sum p_{i,j} x^i y^j on the unit square:

    Q(x, y) P_x + Q(y, x) P_y + R(x, y) P = h(x, y),

with velocity and reaction coefficients

    Q(x, y) = (r + d) x - r/2 - (r/2) x/y - d x^2,
    R(x, y) = r/(2x) + r/(2y) - d x - d y.

A characteristic started at (x0, y0) inside the open unit square follows
x' = Q(x, y), y' = Q(y, x) and reaches the origin at a finite time s0.  The
trajectory is explicit.  Writing rho = d/r,

    kappa = (x0 + y0 - 2 x0 y0) / (x0 + y0 - 2 rho x0 y0)  in (0, 1),
    s0    = log(kappa) / (d - r) > 0,
    b     = (1 - rho) (y0 - x0) / (x0 + y0 - 2 rho x0 y0),

    nu(s) = e^{d s} (1 - kappa e^{(r-d) s}),
    x(s)  = nu(s) / (e^{d s} (1 - rho kappa e^{(r-d) s}) + b),
    y(s)  = nu(s) / (e^{d s} (1 - rho kappa e^{(r-d) s}) - b).

Both denominators increase up to s0 and decrease afterwards, each crossing
zero exactly once past s0 (the blow-up times s_plus and s_minus).  The
integrating factor exp(int_0^u R) along the curve has the closed form

    IF(u) = [Dx(0) / Dx(u)] [Dy(0) / Dy(u)] [nu(0) / nu(u)] e^{(r+d) u},

which is 1 at u = 0 by construction and has a simple pole at s0 coming from
the nu factor alone.  Products x^i y^j IF with i + j >= 1 stay finite at s0,
and ``weighted_coords`` evaluates them in a cancellation-free form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams


def transport_velocity(params: ModelParams, x, y):
    """Q(x, y), the x-component of the characteristic velocity field.

    The y-component is Q(y, x).  Vanishes at the stationary points (1, 1)
    and (r/d, r/d).
    """
    r, d = params.r, params.d
    return (r + d) * x - r / 2.0 - (r / 2.0) * (x / y) - d * x * x


def reaction_coeff(params: ModelParams, x, y):
    """R(x, y), the zeroth-order coefficient; equals d log IF / du on a curve."""
    r, d = params.r, params.d
    return r / (2.0 * x) + r / (2.0 * y) - d * (x + y)


@dataclass(frozen=True)
class CharacteristicPath:
    """Closed-form characteristic through (x0, y0); see the module docstring.

    lam and mu are the classical integration constants, undefined (None) on
    the diagonal where the normalized constants kappa and b remain regular.
    """

    params: ModelParams
    x0: float
    y0: float
    kappa: float
    s0: float
    b: float
    lam: float | None
    mu: float | None


def make_path(params: ModelParams, x0: float, y0: float) -> CharacteristicPath:
    """Build the characteristic through (x0, y0), 0 < x0, y0 < 1."""
    if not (0.0 < x0 < 1.0 and 0.0 < y0 < 1.0):
        raise ValueError(f"start point must lie in the open unit square, got ({x0}, {y0})")
    r, d = params.r, params.d
    rho = params.ratio
    denom = x0 + y0 - 2.0 * rho * x0 * y0
    kappa = (x0 + y0 - 2.0 * x0 * y0) / denom
    s0 = math.log(kappa) / (d - r)
    b = (1.0 - rho) * (y0 - x0) / denom
    if x0 == y0:
        lam = mu = None
    else:
        lam = (2.0 * d * x0 * y0 - d * (x0 + y0)) / ((y0 - x0) * (r - d))
        mu = (r * (x0 + y0) - 2.0 * d * x0 * y0) / ((y0 - x0) * (r - d))
    return CharacteristicPath(params, x0, y0, kappa, s0, b, lam, mu)


def _pieces(path: CharacteristicPath, s):
    """nu, Dx, Dy at time s (scalar or array), in an expm1-stable form.

    1 - kappa e^{(r-d)s} = -expm1((r-d)(s-s0)) and
    1 - rho kappa e^{(r-d)s} = -expm1((r-d)(s-s0) + log rho) avoid
    cancellation both near s0 and in the near-critical regime rho -> 1.
    """
    r, d = path.params.r, path.params.d
    z = (r - d) * (s - path.s0)
    growth = np.exp(d * s)
    nu = -growth * np.expm1(z)
    base = -growth * np.expm1(z + math.log(path.params.ratio))
    return nu, base + path.b, base - path.b


def eval_path(path: CharacteristicPath, s):
    """Trajectory point (x(s), y(s)); s may be a scalar or an array.

    Regular on [0, s0]; outside, evaluation close to a blow-up time raises.
    """
    nu, dx, dy = _pieces(path, s)
    if np.any(np.abs(dx) < 1e-14) or np.any(np.abs(dy) < 1e-14):
        raise ZeroDivisionError(
            "trajectory denominator vanishes: s is at or near a blow-up "
            "time (s_plus for x, s_minus for y)"
        )
    return nu / dx, nu / dy


def critical_times(path: CharacteristicPath) -> tuple[float, float]:
    """Blow-up times (s_plus, s_minus) of x and y, both strictly past s0.

    Bracketed on the overflow-safe rescaled denominators e^{-ds} Dx,y, then
    bisection and a Newton polish.  s_plus < s_minus iff y0 < x0; the two
    coincide on the diagonal.
    """
    r, d = path.params.r, path.params.d
    log_rho = math.log(path.params.ratio)
    results = []
    for sign in (+1.0, -1.0):  # +b: Dx root (s_plus); -b: Dy root (s_minus)

        def g(s):
            z = (r - d) * (s - path.s0)
            return -math.expm1(z + log_rho) + sign * path.b * math.exp(-d * s)

        def dg(s):
            z = (r - d) * (s - path.s0)
            return -(r - d) * math.exp(z + log_rho) - sign * path.b * d * math.exp(
                -d * s
            )

        lo, glo = path.s0, g(path.s0)
        if glo <= 0.0:
            raise ArithmeticError("denominator not positive at s0; invalid path")
        step, cap = 0.5 / d, 50.0 / (r - d)
        hi = lo + step
        while g(hi) > 0.0:
            step *= 2.0
            hi = lo + step
            if step > cap:
                raise ArithmeticError("no denominator sign change within the search cap")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * (1.0 + hi):
                break
        root = 0.5 * (lo + hi)
        for _ in range(2):
            root -= g(root) / dg(root)
        results.append(root)
    return results[0], results[1]


def integrating_factor(path: CharacteristicPath, u):
    """IF(u) = exp(int_0^u R) along the curve, for 0 <= u < s0.

    Exactly 1 at u = 0; diverges like a simple pole as u -> s0, where only
    the weighted products of ``weighted_coords`` remain finite.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0.0) or np.any(u_arr >= path.s0):
        raise ValueError("integrating factor is defined on [0, s0) only")
    r, d = path.params.r, path.params.d
    nu0, dx0, dy0 = _pieces(path, 0.0)
    nu, dx, dy = _pieces(path, u)
    return (dx0 / dx) * (dy0 / dy) * (nu0 / nu) * np.exp((r + d) * u)


def weighted_coords(path: CharacteristicPath, u):
    """(x, y, x*IF, y*IF) at time(s) u in [0, s0], cancellation-free.

    The products absorb the pole of IF:
        x IF = C e^{(r+d)u} / (Dx^2 Dy),   y IF = C e^{(r+d)u} / (Dx Dy^2),
    with C = nu(0) Dx(0) Dy(0), so monomial weights x^i y^j IF with
    i + j >= 1 extend continuously to the arrival time s0.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0.0) or np.any(u_arr > path.s0 * (1.0 + 1e-9)):
        raise ValueError("weighted coordinates are defined on [0, s0] only")
    r, d = path.params.r, path.params.d
    nu0, dx0, dy0 = _pieces(path, 0.0)
    nu, dx, dy = _pieces(path, u)
    c = nu0 * dx0 * dy0
    scale = c * np.exp((r + d) * u_arr) / (dx * dy)
    return nu / dx, nu / dy, scale / dx, scale / dy

"""Shared numerical primitives.

Small, dependency-light building blocks used by every other module: a
sampled-curve container with monotone interpolation, dense-output
integration of linear ODE systems, per-interval Gauss-Legendre panels for
cumulative integrals on fixed grids, semi-infinite quadrature with an
algebraic tail, and least-squares power-law tail fits.

All functions are pure and the containers are immutable once built, so
everything here can be shared freely across the cells of a parameter sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import PchipInterpolator

__all__ = [
    "DEFAULT_TOL",
    "PowerTailFit",
    "SampledCurve",
    "TailSpec",
    "Tolerances",
    "fit_power_tail",
    "integrate_linear_system",
    "interpolate",
    "panel_integrals",
    "quad_tail",
    "right_cumulative",
    "stencil_derivative",
]


@dataclass(frozen=True)
class Tolerances:
    """Error budget shared by the whole pipeline.

    ode_rel and quad_rel control the solvers, accept_rel is the relative
    tolerance for comparisons against exact anchors, and slope_slack is the
    absolute slack allowed below zero in monotonicity certificates.
    accept_rel must dominate ode_rel so that integration error can never
    masquerade as a genuine violation.
    """

    ode_rel: float = 1e-10
    quad_rel: float = 1e-10
    accept_rel: float = 1e-6
    slope_slack: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("ode_rel", "quad_rel", "accept_rel", "slope_slack"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0.0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.accept_rel < self.ode_rel:
            raise ValueError("accept_rel must be >= ode_rel")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class TailSpec:
    """Algebraic tail description for semi-infinite quadrature.

    Declares that the integrand behaves like c * x**(-exponent) * (1 + c1/x)
    past `cutoff`. The prefactor c is never supplied; quad_tail reads it off
    the integrand itself. exponent must exceed 1 or the integral diverges.
    """

    exponent: float
    cutoff: float = 1e4
    c1: float = 0.0

    def __post_init__(self) -> None:
        if not self.exponent > 1.0:
            raise ValueError("tail exponent must exceed 1 (integral diverges otherwise)")
        if not self.cutoff > 0.0:
            raise ValueError("tail cutoff must be positive")


class SampledCurve:
    """Scalar samples y_i at strictly increasing abscissae x_i.

    Calling the curve interpolates: piecewise linear for order 1, monotone
    shape-preserving cubic (PCHIP) for order >= 2, so interpolation never
    overshoots and reproduces the samples exactly at the nodes. Queries
    outside the sampled range raise rather than extrapolate.
    """

    __slots__ = ("x", "y", "order", "_pchip")

    def __init__(self, x, y, order: int = 3):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("abscissae and values must be 1-d arrays of equal length")
        if x.size < 2:
            raise ValueError("a curve needs at least two samples")
        if not np.all(np.diff(x) > 0.0):
            raise ValueError("abscissae must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("curve samples must be finite")
        if order < 1:
            raise ValueError("interpolation order must be >= 1")
        self.x = x
        self.y = y
        self.order = int(order)
        self._pchip = None

    def __len__(self) -> int:
        return self.x.size

    def __repr__(self) -> str:
        return (
            f"SampledCurve(n={self.x.size}, x=[{self.x[0]:g}, {self.x[-1]:g}], "
            f"order={self.order})"
        )

    @property
    def span(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def __call__(self, xq):
        q = np.asarray(xq, dtype=float)
        lo, hi = self.x[0], self.x[-1]
        if np.any(q < lo) or np.any(q > hi):
            raise ValueError(
                f"query outside the sampled range [{lo:g}, {hi:g}]"
            )
        if self.order == 1:
            out = np.interp(q, self.x, self.y)
        else:
            if self._pchip is None:
                self._pchip = PchipInterpolator(self.x, self.y, extrapolate=False)
            out = self._pchip(q)
        if np.ndim(xq) == 0:
            return float(out)
        return out


def interpolate(curve: SampledCurve, x):
    """Evaluate a SampledCurve at x (alias for calling the curve)."""
    return curve(x)


def integrate_linear_system(
    rhs: Callable[[float], np.ndarray],
    y0,
    span: tuple[float, float],
    direction: str = "forward",
    grid=None,
    tol: Tolerances | None = None,
    atol: float | None = None,
) -> list[SampledCurve]:
    """Integrate y' = A(x) y with dense output and sample it on a grid.

    rhs maps a scalar x to the (n, n) system matrix A(x). span = (x_lo, x_hi)
    with x_lo < x_hi; direction picks which endpoint carries the data y0
    ("forward" starts at x_lo, "backward" at x_hi). The result is one
    SampledCurve per component, sampled in increasing x on `grid` (an array
    inside span, or a point count for an evenly spaced grid; default 257).

    The integrator is an explicit embedded Runge-Kutta pair of order 8(5)
    with dense output. The relative tolerance is min(tol.ode_rel, 1e-12);
    the absolute tolerance defaults to a small fraction of the seed scale so
    that components passing through zero stay resolved.
    """
    tol = tol or DEFAULT_TOL
    x_lo, x_hi = float(span[0]), float(span[1])
    if not x_lo < x_hi:
        raise ValueError("span must satisfy x_lo < x_hi")
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if direction == "forward":
        t0, t1 = x_lo, x_hi
    elif direction == "backward":
        t0, t1 = x_hi, x_lo
    else:
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")

    if grid is None:
        grid = 257
    if np.ndim(grid) == 0:
        xs = np.linspace(x_lo, x_hi, int(grid))
    else:
        xs = np.asarray(grid, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or not np.all(np.diff(xs) > 0.0):
            raise ValueError("grid must be a strictly increasing 1-d array")
        if xs[0] < x_lo or xs[-1] > x_hi:
            raise ValueError("grid must lie inside the integration span")

    rtol = min(tol.ode_rel, 1e-12)
    if atol is None:
        atol = max(float(np.max(np.abs(y0))), 1e-12) * rtol * 1e-3

    def odefun(x, y):
        return np.asarray(rhs(x), dtype=float) @ y

    sol = solve_ivp(
        odefun,
        (t0, t1),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"linear system integration failed: {sol.message}")
    values = sol.sol(xs)
    if not np.all(np.isfinite(values)):
        raise RuntimeError("linear system integration produced non-finite values")
    return [SampledCurve(xs, values[i]) for i in range(y0.size)]


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_rule(npts: int) -> tuple[np.ndarray, np.ndarray]:
    rule = _GAUSS_CACHE.get(npts)
    if rule is None:
        rule = leggauss(npts)
        _GAUSS_CACHE[npts] = rule
    return rule


def panel_integrals(f: Callable[[np.ndarray], np.ndarray], grid, npts: int = 12) -> np.ndarray:
    """Gauss-Legendre integral of f over each consecutive interval of grid.

    f must accept a 1-d array. Returns len(grid) - 1 panel values; their
    cumulative sums reproduce the integral of f between any two grid points
    to quadrature precision.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0.0):
        raise ValueError("grid must be a strictly increasing 1-d array")
    xg, wg = _gauss_rule(npts)
    mid = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * np.diff(grid)
    nodes = mid[:, None] + half[:, None] * xg[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return (half[:, None] * wg[None, :] * vals).sum(axis=1)


def right_cumulative(panels: np.ndarray, tail: float = 0.0) -> np.ndarray:
    """Cumulative integral to the right end: out[i] = tail + sum(panels[i:]).

    Summing right-to-left keeps full relative precision in the far tail,
    where the integrals this package cares about decay to zero. out has one
    more entry than panels; out[-1] == tail.
    """
    panels = np.asarray(panels, dtype=float)
    out = np.empty(panels.size + 1)
    out[-1] = tail
    out[:-1] = tail + np.cumsum(panels[::-1])[::-1]
    return out


def quad_tail(
    f: Callable[[float], float],
    a: float,
    tail: TailSpec,
    tol: Tolerances | None = None,
) -> float:
    """Integral of f over [a, infinity): adaptive quadrature plus an
    algebraic tail.

    Adaptive quadrature covers [a, cutoff]; beyond it the integrand is
    assumed to follow c * x**(-k) * (1 + c1/x) with k and c1 from `tail`,
    and the prefactor c is read off f at the cutoff. The observed local
    decay rate between cutoff and 2*cutoff is compared against k, so a
    wrongly declared exponent raises instead of silently corrupting the
    result.
    """
    tol = tol or DEFAULT_TOL
    a = float(a)
    R = max(a, tail.cutoff)
    head = 0.0
    if R > a:
        head, _ = quad(f, a, R, epsabs=0.0, epsrel=tol.quad_rel, limit=400)
    f1 = float(f(R))
    f2 = float(f(2.0 * R))
    if f1 == 0.0 and f2 == 0.0:
        return head
    if f1 == 0.0 or f2 == 0.0 or (f1 > 0.0) != (f2 > 0.0):
        raise ValueError("integrand does not follow the declared algebraic tail")
    k = tail.exponent
    k_obs = math.log(abs(f1 / f2)) / math.log(2.0)
    if abs(k_obs - k) > 0.1 + 2.0 * abs(tail.c1) / R:
        raise ValueError(
            f"observed tail decay rate {k_obs:.4f} is inconsistent with the "
            f"declared exponent {k:.4f}"
        )
    c = f1 * R**k / (1.0 + tail.c1 / R)
    tail_value = c * (R ** (1.0 - k) / (k - 1.0) + tail.c1 * R ** (-k) / k)
    return head + tail_value


class PowerTailFit(NamedTuple):
    """Result of a power-law tail fit y ~ c0 * x**alpha * (1 + c1/x).

    residual is the rms misfit over the window divided by |c0|.
    """

    c0: float
    c1: float
    residual: float


def fit_power_tail(
    curve: SampledCurve,
    alpha: float,
    window: float = 10.0,
    nuisance: bool = True,
    max_residual: float = 1e-3,
) -> PowerTailFit:
    """Least-squares fit of a curve tail to c0 * x**alpha * (1 + c1/x).

    The fit runs on the trailing window [x_max/window, x_max]. After
    dividing out x**alpha it solves for (c0, c0*c1) against the columns
    [1, 1/x], plus a 1/x**2 nuisance column by default so the next expansion
    order does not bias c1. A residual above max_residual (relative to c0)
    means the declared alpha is wrong and raises.
    """
    if window <= 1.0:
        raise ValueError("window must exceed 1")
    x, y = curve.x, curve.y
    mask = x >= x[-1] / window
    if int(mask.sum()) < 4:
        raise ValueError("not enough samples in the fit window")
    xs = x[mask]
    ys = y[mask] / xs**alpha
    cols = [np.ones_like(xs), 1.0 / xs]
    if nuisance:
        cols.append(xs**-2.0)
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    c0 = float(coef[0])
    scale = max(abs(c0), np.max(np.abs(ys)) * 1e-12, 1e-300)
    residual = float(np.sqrt(np.mean((design @ coef - ys) ** 2)) / scale)
    if residual > max_residual:
        raise ValueError(
            f"tail fit residual {residual:.3e} exceeds {max_residual:.3e}; "
            f"the declared exponent {alpha} is likely wrong"
        )
    c1 = float(coef[1] / c0) if c0 != 0.0 else 0.0
    return PowerTailFit(c0, c1, residual)


def _fd_weights(offsets: np.ndarray) -> np.ndarray:
    """First-derivative weights for integer sample offsets (unit spacing).

    Solves the Vandermonde moment system sum_j w_j o_j^k = k! [k == 1];
    exact for polynomials up to degree len(offsets) - 1.
    """
    o = np.asarray(offsets, dtype=float)
    n = o.size
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(np.vander(o, n, increasing=True).T, rhs)


def stencil_derivative(y: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    """First derivative of uniformly spaced samples, O(h^order).

    Centered (order + 1)-point stencil in the interior, one-sided stencils
    of the same width near the edges. order must be even.
    """
    y = np.asarray(y, dtype=float)
    if order < 2 or order % 2:
        raise ValueError("order must be a positive even integer")
    width = order + 1
    half = order // 2
    if y.size < width:
        raise ValueError(f"need at least {width} samples")
    if not h > 0.0:
        raise ValueError("spacing must be positive")
    d = np.empty_like(y)
    if order == 4:
        d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    else:
        centered = _fd_weights(np.arange(-half, half + 1))
        acc = np.zeros(y.size - 2 * half)
        for j, w in enumerate(centered):
            acc += w * y[j : j + acc.size]
        d[half:-half] = acc / h
    for i in range(half):
        head = _fd_weights(np.arange(width) - i)
        d[i] = np.dot(head, y[:width]) / h
        d[-1 - i] = -np.dot(head, y[-width:][::-1]) / h
    return d

"""Reference geometry: the spatial Schwarzschild slice of mass 2 in
isotropic coordinates, metric (1 + 1/r)^4 * delta on {r >= 1}.

The boundary sphere r = 1 is minimal, and the radial p-harmonic potential
(1 < p < 2) with u = 1 on the boundary and u -> 0 at infinity solves a
first-order reduction in closed form:

    u'(r) = -C * r**(-kappa) * (1 + 1/r)**(-beta),
    kappa = 2/(p-1),   beta = 2*(3-p)/(p-1),

with C fixed by u(1) = 1. Everything this module exports - the level-set
parameter t = (1-p) log u, the sphere-integrated gradient square W(t), the
boundary capacity, and the two tail normalization constants - is derived
from that quadrature. The mass-2 member is singled out because its boundary
data (W(0), dW/dt(0)) and capacity are the sharp constants against which
every other geometry is compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .frobenius import InfinitySingularODE
from .numerics import (
    DEFAULT_TOL,
    SampledCurve,
    TailSpec,
    Tolerances,
    fit_power_tail,
    panel_integrals,
    quad_tail,
    right_cumulative,
)

__all__ = [
    "DEFAULT_N_R",
    "DEFAULT_R_MAX",
    "CConstants",
    "LevelData",
    "ModelGeometry",
    "capacity_Kp",
    "c_constants",
    "flux_constant",
    "model_profile",
    "potential_ode",
    "ws_boundary_data",
]

DEFAULT_R_MAX = 1.0e6
DEFAULT_N_R = 4096


def _check_p(p: float) -> float:
    p = float(p)
    if not 1.0 < p < 2.0:
        raise ValueError(f"p must lie in (1, 2), got {p}")
    return p


def _exponents(p: float) -> tuple[float, float, float]:
    """(s, kappa, beta) shorthand for 3-p, 2/(p-1), 2(3-p)/(p-1)."""
    s = 3.0 - p
    kappa = 2.0 / (p - 1.0)
    beta = 2.0 * s / (p - 1.0)
    return s, kappa, beta


def _du_integrand(p: float) -> Callable[[np.ndarray], np.ndarray]:
    _, kappa, beta = _exponents(p)

    def f(x):
        x = np.asarray(x, dtype=float)
        return x**-kappa * (1.0 + 1.0 / x) ** -beta

    return f


def _tail_series(R: float, kappa: float, beta: float) -> float:
    """integral_R^inf x^-kappa (1+1/x)^-beta dx by binomial expansion.

    Converges like (1/R)^j; exact to machine precision for R >> 1.
    """
    total = 0.0
    coeff = 1.0
    for j in range(80):
        if j > 0:
            coeff *= -(beta + j - 1.0) / j
        term = coeff * R ** (1.0 - kappa - j) / (kappa + j - 1.0)
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
    raise RuntimeError("tail series did not converge; outer radius too small")


def flux_constant(p: float, tol: Tolerances | None = None) -> float:
    """Normalization constant C of the radial potential on the reference slice.

    C = 1 / integral_1^inf r^-kappa (1+1/r)^-beta dr, so that u(1) = 1. The
    integrand's conserved flux makes C**(p-1) proportional to the boundary
    capacity. At p = 1.5 the integral is exactly 1/60.
    """
    p = _check_p(p)
    tol = tol or DEFAULT_TOL
    _, kappa, beta = _exponents(p)
    f = _du_integrand(p)
    total = quad_tail(f, 1.0, TailSpec(exponent=kappa, cutoff=1e4, c1=-beta), tol=tol)
    return 1.0 / total


class LevelData(NamedTuple):
    """Pointwise model data at radius r, used to assemble coefficient ODEs."""

    u: np.ndarray
    du: np.ndarray
    W: np.ndarray
    dWdr: np.ndarray
    drdt: np.ndarray
    dWdt: np.ndarray


class CConstants(NamedTuple):
    """Tail normalization constants of the reference potential.

    c_fit is the leading coefficient of u ~ c_fit * r**(-(3-p)/(p-1));
    c_tilde is the exponential-map constant lim (r + (3-p)) e^(-t/(3-p)).
    exp_map_ratio compares c_tilde against c_fit**((p-1)/(3-p)) (exactly 1
    in exact arithmetic); closed_form_ratio compares c_fit against
    ((p-1)/(3-p)) * (K_p/4pi)**(1/(p-1)).
    """

    c_fit: float
    c_tilde: float
    exp_map_ratio: float
    closed_form_ratio: float


@dataclass(frozen=True)
class ModelGeometry:
    """The reference slice sampled on a geometric r-grid [1, R_max].

    Immutable after construction. Curves over r: u, du, t; curves over t:
    r, W, dW/dt. The exact closed form of du and a log-log spline of u give
    high-accuracy pointwise data off the grid via level_data().
    """

    p: float
    flux_constant: float
    Kp: float
    r_grid: np.ndarray = field(repr=False)
    u_curve: SampledCurve = field(repr=False)
    du_curve: SampledCurve = field(repr=False)
    t_of_r: SampledCurve = field(repr=False)
    r_of_t: SampledCurve = field(repr=False)
    Ws_curve: SampledCurve = field(repr=False)
    dWs_curve: SampledCurve = field(repr=False)
    c_fit: float = 0.0
    c_tilde: float = 0.0
    tol: Tolerances = field(default_factory=Tolerances, repr=False)
    _logu_spline: CubicSpline = field(default=None, repr=False)

    @property
    def R_max(self) -> float:
        return float(self.r_grid[-1])

    @property
    def t_max(self) -> float:
        return float(self.t_of_r.y[-1])

    def u_at(self, r):
        """Potential at arbitrary radii inside the grid (log-log spline)."""
        r = np.asarray(r, dtype=float)
        return np.exp(self._logu_spline(np.log(r)))

    def du_exact(self, r):
        """Closed-form radial derivative of the potential."""
        r = np.asarray(r, dtype=float)
        _, kappa, beta = _exponents(self.p)
        return -self.flux_constant * r**-kappa * (1.0 + 1.0 / r) ** -beta

    def level_data(self, r) -> LevelData:
        """u, du, W, dW/dr, dr/dt, dW/dt at arbitrary radii inside the grid.

        Everything except u itself is closed-form algebra, so the accuracy
        off the grid matches the on-grid accuracy.
        """
        p = self.p
        r = np.asarray(r, dtype=float)
        _, kappa, beta = _exponents(p)
        u = self.u_at(r)
        du = self.du_exact(r)
        W = 4.0 * math.pi * (p - 1.0) ** 2 * r**2 * (du / u) ** 2
        dlog_du = -kappa / r + beta / (r**2 + r)
        dWdr = 2.0 * W * (1.0 / r + dlog_du - du / u)
        drdt = -u / ((p - 1.0) * du)
        return LevelData(u=u, du=du, W=W, dWdr=dWdr, drdt=drdt, dWdt=dWdr * drdt)


def model_profile(
    p: float,
    R_max: float = DEFAULT_R_MAX,
    n: int = DEFAULT_N_R,
    tol: Tolerances | None = None,
) -> ModelGeometry:
    """Build the reference model on a geometric grid of n radii in [1, R_max].

    The potential is the cumulative integral of its closed-form derivative,
    accumulated from the far end (analytic tail beyond R_max) so that the
    decaying tail keeps full relative precision. The grid normalization is
    cross-checked against the adaptive quadrature of flux_constant.
    """
    p = _check_p(p)
    tol = tol or DEFAULT_TOL
    if R_max < 1e4:
        raise ValueError("R_max must be at least 1e4 for the tail expansions to hold")
    if n < 64:
        raise ValueError("need at least 64 grid points")
    s, kappa, beta = _exponents(p)
    sigma = s / (p - 1.0)

    r = np.geomspace(1.0, R_max, int(n))
    f = _du_integrand(p)
    panels = panel_integrals(f, r, npts=12)
    integral = right_cumulative(panels, _tail_series(R_max, kappa, beta))

    C = 1.0 / integral[0]
    C_quad = flux_constant(p, tol=tol)
    if abs(C - C_quad) > 1e-8 * abs(C):
        raise RuntimeError(
            f"grid normalization {C!r} disagrees with adaptive quadrature {C_quad!r}"
        )

    u = C * integral
    du = -C * f(r)
    t = (1.0 - p) * np.log(u)
    t[0] = 0.0  # u[0] == 1 exactly; clear the signed zero from the log

    W = 4.0 * math.pi * (p - 1.0) ** 2 * r**2 * (du / u) ** 2
    dlog_du = -kappa / r + beta / (r**2 + r)
    dWdr = 2.0 * W * (1.0 / r + dlog_du - du / u)
    drdt = -u / ((p - 1.0) * du)
    dWdt = dWdr * drdt

    Kp = 4.0 * math.pi * C ** (p - 1.0)

    u_curve = SampledCurve(r, u)
    fit_u = fit_power_tail(u_curve, -sigma)
    c_fit = fit_u.c0
    exp_map = SampledCurve(r, (r + s) * np.exp(-t / s))
    c_tilde = fit_power_tail(exp_map, 0.0).c0

    model = ModelGeometry(
        p=p,
        flux_constant=C,
        Kp=Kp,
        r_grid=r,
        u_curve=u_curve,
        du_curve=SampledCurve(r, du),
        t_of_r=SampledCurve(r, t),
        r_of_t=SampledCurve(t, r),
        Ws_curve=SampledCurve(t, W),
        dWs_curve=SampledCurve(t, dWdt),
        c_fit=c_fit,
        c_tilde=c_tilde,
        tol=tol,
        _logu_spline=CubicSpline(np.log(r), np.log(u)),
    )
    return model


def capacity_Kp(model: ModelGeometry) -> float:
    """Boundary p-capacity of the reference slice, K_p = 4 pi C**(p-1).

    Cross-checked against the direct surface integral of |grad u|^(p-1) in
    the metric (1+1/r)^4 delta over a sample of level spheres; the conserved
    flux makes that integral radius-independent.
    """
    p = model.p
    tol = model.tol
    sample = np.geomspace(1.0, model.R_max, 9)
    du = np.abs(model.du_exact(sample))
    rho = 1.0 + 1.0 / sample
    # |grad u| = |u'| / rho^2 and the area element is rho^4 r^2 dOmega.
    direct = 4.0 * math.pi * sample**2 * rho ** (6.0 - 2.0 * p) * du ** (p - 1.0)
    dev = np.max(np.abs(direct - model.Kp)) / model.Kp
    if dev > tol.accept_rel:
        raise RuntimeError(f"flux integral varies across spheres (relative spread {dev:.3e})")
    return model.Kp


def ws_boundary_data(model: ModelGeometry) -> tuple[float, float]:
    """(W(0), dW/dt(0)) on the reference slice.

    The boundary sphere is minimal, which forces dW/dt(0) = 2/(p-1) * W(0);
    that relation is asserted before returning.
    """
    W0 = float(model.Ws_curve.y[0])
    dW0 = float(model.dWs_curve.y[0])
    expected = 2.0 / (model.p - 1.0) * W0
    if abs(dW0 - expected) > model.tol.accept_rel * abs(expected):
        raise RuntimeError(
            f"boundary slope {dW0!r} violates the minimal-boundary relation {expected!r}"
        )
    return W0, dW0


def c_constants(model: ModelGeometry) -> CConstants:
    """Tail normalization constants and their two consistency ratios.

    exp_map_ratio should be 1 (it ties the power-law tail of u to the
    exponential map r(t)); closed_form_ratio compares the fitted c against
    ((p-1)/(3-p)) * (K_p/4pi)**(1/(p-1)) and is 1 when that closed form is
    the right one. Both ratios are diagnostics for downstream reports.
    """
    p = model.p
    s = 3.0 - p
    exp_map_ratio = model.c_tilde / model.c_fit ** ((p - 1.0) / s)
    closed_form = ((p - 1.0) / s) * (model.Kp / (4.0 * math.pi)) ** (1.0 / (p - 1.0))
    return CConstants(
        c_fit=model.c_fit,
        c_tilde=model.c_tilde,
        exp_map_ratio=exp_map_ratio,
        closed_form_ratio=model.c_fit / closed_form,
    )


def potential_ode(p: float, nterms: int = 8) -> InfinitySingularODE:
    """Expansion data at infinity for the radial potential equation.

    The potential solves u'' + P(r) u' = 0 with
    P(r) = (2/(p-1)) * (1/r - (3-p)/(r^2 + r)), whose descending expansion
    has p1 = 2/(p-1) and alternating p_k = -(-1)^k * 2(3-p)/(p-1) for
    k >= 2, exact to all orders. nterms bounds how many are materialized.
    """
    p = _check_p(p)
    if nterms < 2:
        raise ValueError("need at least two expansion orders")
    s = 3.0 - p
    coeffs = [2.0 / (p - 1.0)]
    for k in range(2, nterms + 1):
        coeffs.append(-((-1.0) ** k) * 2.0 * s / (p - 1.0))
    return InfinitySingularODE(tuple(coeffs), (), p_order=nterms, q_order=None)

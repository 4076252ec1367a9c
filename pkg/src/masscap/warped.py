"""Rotationally symmetric asymptotically flat geometries ds^2 + phi(s)^2 g0.

Everything reduces to the warping factor phi: level spheres have mean
curvature H = 2 phi'/phi and Hawking mass (phi/2)(1 - phi'^2), the scalar
curvature is R = 2(1 - phi'^2)/phi^2 - 4 phi''/phi, and the radial
p-harmonic potential follows from the conserved flux phi^2 |u'|^(p-2) u',
so u' = -C phi**(-2/(p-1)) with C fixed by u = 1 on the boundary.

Three families are provided: the static vacuum slices (phi'' =
(1 - phi'^2)/(2 phi), giving the first integral phi' = sqrt(1 - 2m/phi)),
the same with a compactly supported curvature bump added (R = 2 eps
bump(s)/phi^2 exactly), and the flat exterior phi = 1 + s whose boundary
sphere is not minimal. The level-set reparametrization by t = (1-p) log u
is solved backward from the outer radius, where it is a contraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .numerics import (
    DEFAULT_TOL,
    SampledCurve,
    Tolerances,
    fit_power_tail,
    panel_integrals,
    right_cumulative,
    stencil_derivative,
)

__all__ = [
    "DEFAULT_N_S",
    "DEFAULT_N_T",
    "DEFAULT_S_MAX",
    "FlowProfile",
    "WarpProfile",
    "capacity_Cp",
    "family_bumped",
    "family_flat_exterior",
    "family_schwarzschild",
    "level_flow",
    "masses",
    "radial_p_harmonic",
    "scalar_curvature",
    "spline_bump",
    "w_inequality_residual",
]

DEFAULT_S_MAX = 5.0e3
DEFAULT_N_S = 2048
DEFAULT_N_T = 32768

_GEOM_RTOL = 1e-12

# Minimum number of integrator steps across the level-set flow. The dense
# output of an adaptive step is a local polynomial whose error vanishes at
# the step endpoints; differentiating samples of it converges to the
# derivative of that sawtooth-shaped error rather than to zero, at a scale
# of roughly (error amplitude) / (step size). Capping the step keeps that
# noise floor below the 1e-8 slack used by the curvature-residual check.
_MIN_FLOW_STEPS = 2500


def _check_p(p: float) -> float:
    p = float(p)
    if not 1.0 < p < 2.0:
        raise ValueError(f"p must lie in (1, 2), got {p}")
    return p


def spline_bump(s1: float, s2: float) -> Callable[[np.ndarray], np.ndarray]:
    """C^2 cubic bump supported on [s1, s2] with peak value 1.

    The uniform cubic B-spline basis function, rescaled. Twice continuous
    differentiability keeps the curvature (which differentiates phi twice)
    continuous, so the ODE solver sees no jumps.
    """
    if not s2 > s1:
        raise ValueError("bump support needs s2 > s1")
    width = (s2 - s1) / 4.0

    def bump(s):
        x = (np.atleast_1d(np.asarray(s, dtype=float)) - s1) / width
        out = np.zeros_like(x)
        m = (x > 0.0) & (x < 1.0)
        out[m] = x[m] ** 3 / 6.0
        m = (x >= 1.0) & (x < 2.0)
        v = x[m] - 1.0
        out[m] = (-3.0 * v**3 + 3.0 * v**2 + 3.0 * v + 1.0) / 6.0
        m = (x >= 2.0) & (x < 3.0)
        v = 3.0 - x[m]
        out[m] = (-3.0 * v**3 + 3.0 * v**2 + 3.0 * v + 1.0) / 6.0
        m = (x >= 3.0) & (x < 4.0)
        v = 4.0 - x[m]
        out[m] = v**3 / 6.0
        out *= 1.5
        return float(out[0]) if np.ndim(s) == 0 else out

    return bump


@dataclass(frozen=True)
class WarpProfile:
    """A warped-product geometry, sampled and in closed/dense form.

    phi_fn / dphi_fn evaluate the warping factor anywhere on [0, s_max] to
    solver accuracy; accel_fn gives phi'' from the state (s, phi, phi'),
    which is what the level-set reparametrization integrates. The sampled
    curves cover a log-like grid for export and fits.
    """

    family_tag: str
    params: dict
    s_max: float
    s_grid: np.ndarray = field(repr=False)
    phi: SampledCurve = field(repr=False)
    dphi: SampledCurve = field(repr=False)
    ddphi: SampledCurve = field(repr=False)
    phi_fn: Callable = field(repr=False)
    dphi_fn: Callable = field(repr=False)
    accel_fn: Callable = field(repr=False)
    af_exponent: float = 1.0
    minimal_boundary: bool = True

    @property
    def phi0(self) -> float:
        return float(self.phi.y[0])


def _expm1_grid(scale: float, s_max: float, n: int) -> np.ndarray:
    """n points on [0, s_max], spaced like a geometric grid shifted to 0."""
    theta = np.linspace(0.0, math.log1p(s_max / scale), int(n))
    s = scale * np.expm1(theta)
    s[0] = 0.0
    s[-1] = s_max
    return s


def _solve_family(
    tag: str,
    params: dict,
    phi0: float,
    accel,
    s_max: float,
    n: int,
) -> WarpProfile:
    def rhs(s, y):
        return [y[1], accel(s, y[0], y[1])]

    sol = solve_ivp(
        rhs,
        (0.0, s_max),
        [phi0, 0.0],
        method="DOP853",
        rtol=_GEOM_RTOL,
        atol=_GEOM_RTOL,
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"warping-factor integration failed: {sol.message}")

    s = _expm1_grid(phi0, s_max, n)
    phi_v, dphi_v = sol.sol(s)
    if np.any(phi_v <= 0.0):
        raise RuntimeError("warping factor lost positivity")
    if np.max(dphi_v) >= 1.0:
        raise ValueError("phi' reached 1; curvature perturbation too strong for this family")
    ddphi_v = accel(s, phi_v, dphi_v)

    def phi_fn(x):
        return sol.sol(x)[0]

    def dphi_fn(x):
        return sol.sol(x)[1]

    return WarpProfile(
        family_tag=tag,
        params=params,
        s_max=float(s_max),
        s_grid=s,
        phi=SampledCurve(s, phi_v),
        dphi=SampledCurve(s, dphi_v),
        ddphi=SampledCurve(s, np.asarray(ddphi_v, dtype=float)),
        phi_fn=phi_fn,
        dphi_fn=dphi_fn,
        accel_fn=accel,
        af_exponent=1.0,
        minimal_boundary=True,
    )


def family_schwarzschild(
    m: float,
    s_max: float = DEFAULT_S_MAX,
    n: int = DEFAULT_N_S,
) -> WarpProfile:
    """Static vacuum slice of mass m > 0 in arclength gauge.

    phi'' = (1 - phi'^2)/(2 phi) from phi(0) = 2m, phi'(0) = 0; the first
    integral phi' = sqrt(1 - 2m/phi) is verified on the grid. Scalar
    curvature vanishes identically and the Hawking mass is exactly m on
    every sphere.
    """
    if not m > 0.0:
        raise ValueError("mass must be positive")

    def accel(s, phi, dphi):
        return (1.0 - dphi**2) / (2.0 * phi)

    warp = _solve_family("schwarzschild", {"m": float(m)}, 2.0 * m, accel, s_max, n)
    first_integral = np.sqrt(1.0 - 2.0 * m / warp.phi.y[1:])
    if np.max(np.abs(warp.dphi.y[1:] - first_integral)) > 1e-9:
        raise RuntimeError("first integral of the vacuum equation violated")
    return warp


def family_bumped(
    m0: float,
    eps: float,
    s1: float = 2.0,
    s2: float = 6.0,
    bump: Callable | None = None,
    s_max: float = DEFAULT_S_MAX,
    n: int = DEFAULT_N_S,
) -> WarpProfile:
    """Vacuum slice of base mass m0 with a compactly supported curvature bump.

    phi'' = (1 - phi'^2)/(2 phi) - (eps/(2 phi)) bump(s), which makes the
    scalar curvature exactly 2 eps bump(s)/phi^2: nonnegative for eps >= 0,
    dipping negative for eps < 0 (allowed here on purpose, so that the
    verification layer has hypothesis violations to detect). Outside the
    bump support the geometry is vacuum again with a larger Hawking mass.
    """
    if not m0 > 0.0:
        raise ValueError("base mass must be positive")
    if not 0.0 <= s1 < s2:
        raise ValueError("bump support must satisfy 0 <= s1 < s2")
    if s2 > 0.5 * s_max:
        raise ValueError("bump support must end well inside the grid")
    bump = bump or spline_bump(s1, s2)

    def accel(s, phi, dphi):
        return (1.0 - dphi**2) / (2.0 * phi) - (eps / (2.0 * phi)) * bump(s)

    params = {"m0": float(m0), "eps": float(eps), "s1": float(s1), "s2": float(s2)}
    return _solve_family("bumped", params, 2.0 * m0, accel, s_max, n)


def family_flat_exterior(
    s_max: float = DEFAULT_S_MAX,
    n: int = DEFAULT_N_S,
) -> WarpProfile:
    """Euclidean exterior of the unit sphere: phi = 1 + s.

    Flat, zero mass, and the boundary sphere is not minimal, so the
    level-set reparametrization refuses it; capacities and masses remain
    available and serve as exact anchors.
    """
    s = _expm1_grid(1.0, s_max, n)
    phi_v = 1.0 + s

    def phi_fn(x):
        return 1.0 + np.asarray(x, dtype=float)

    def dphi_fn(x):
        return np.ones_like(np.asarray(x, dtype=float))

    def accel(s_, phi, dphi):
        return np.zeros_like(np.asarray(phi, dtype=float))

    return WarpProfile(
        family_tag="flat",
        params={},
        s_max=float(s_max),
        s_grid=s,
        phi=SampledCurve(s, phi_v),
        dphi=SampledCurve(s, np.ones_like(s)),
        ddphi=SampledCurve(s, np.zeros_like(s)),
        phi_fn=phi_fn,
        dphi_fn=dphi_fn,
        accel_fn=accel,
        af_exponent=math.inf,
        minimal_boundary=False,
    )


def scalar_curvature(warp: WarpProfile) -> SampledCurve:
    """R = 2(1 - phi'^2)/phi^2 - 4 phi''/phi on the sample grid."""
    phi, dphi, ddphi = warp.phi.y, warp.dphi.y, warp.ddphi.y
    return SampledCurve(warp.s_grid, 2.0 * (1.0 - dphi**2) / phi**2 - 4.0 * ddphi / phi)


def _hawking_values(warp: WarpProfile) -> np.ndarray:
    return 0.5 * warp.phi.y * (1.0 - warp.dphi.y ** 2)


def _capacity_tail(phi_max: float, m_end: float, kappa: float) -> float:
    """integral_{s_max}^inf phi^(-kappa) ds, using phi' = sqrt(1 - 2m/phi).

    Valid because every family is vacuum beyond its sample grid (bump
    supports are confined by construction). Central-binomial expansion of
    the inverse square root; converges geometrically in 2m/phi_max.
    """
    total = 0.0
    coeff = 1.0
    x = 2.0 * m_end
    for j in range(200):
        if j > 0:
            coeff *= (2.0 * j - 1.0) / (2.0 * j)
        term = coeff * x**j * phi_max ** (1.0 - kappa - j) / (kappa - 1.0 + j)
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
    raise RuntimeError("capacity tail series did not converge")


def radial_p_harmonic(
    warp: WarpProfile,
    p: float,
    tol: Tolerances | None = None,
) -> tuple[SampledCurve, SampledCurve, float]:
    """Radial potential (u, du/ds, C) with u = 1 on the boundary, u -> 0.

    u' = -C phi**(-kappa) with kappa = 2/(p-1); the cumulative integral is
    accumulated from the analytic tail inward so the decaying end keeps
    full relative precision.
    """
    p = _check_p(p)
    kappa = 2.0 / (p - 1.0)

    def integrand(x):
        return np.asarray(warp.phi_fn(x), dtype=float) ** -kappa

    panels = panel_integrals(integrand, warp.s_grid, npts=12)
    phi_max = float(warp.phi.y[-1])
    m_end = float(_hawking_values(warp)[-1])
    tail = _capacity_tail(phi_max, m_end, kappa)
    integral = right_cumulative(panels, tail)
    C = 1.0 / integral[0]
    u = C * integral
    du = -C * warp.phi.y ** -kappa
    return SampledCurve(warp.s_grid, u), SampledCurve(warp.s_grid, du), C


def capacity_Cp(warp: WarpProfile, p: float, tol: Tolerances | None = None) -> float:
    """Boundary p-capacity C_p = 4 pi C**(p-1).

    Agrees with the boundary flux 4 pi phi(0)^2 |u'(0)|^(p-1) by the
    conserved-flux identity, which is asserted.
    """
    p = _check_p(p)
    _, du, C = radial_p_harmonic(warp, p, tol=tol)
    cap = 4.0 * math.pi * C ** (p - 1.0)
    boundary_flux = 4.0 * math.pi * warp.phi0**2 * abs(float(du.y[0])) ** (p - 1.0)
    if abs(boundary_flux - cap) > 1e-10 * cap:
        raise RuntimeError("boundary flux disagrees with the capacity normalization")
    return cap


def masses(warp: WarpProfile, tol: Tolerances | None = None) -> tuple[SampledCurve, float]:
    """(Hawking mass curve over s, total mass from its tail limit).

    The Hawking mass of the level spheres is (phi/2)(1 - phi'^2); its limit
    along the asymptotically flat end is the total mass. The limit comes
    from a tail fit so that slowly decaying profiles raise instead of
    returning a half-converged number.
    """
    hawk = SampledCurve(warp.s_grid, _hawking_values(warp))
    fit = fit_power_tail(hawk, 0.0)
    return hawk, float(fit.c0)


@dataclass(frozen=True)
class FlowProfile:
    """A geometry reparametrized by the level-set parameter t = (1-p) log u.

    All curves share the uniform t_grid abscissa; t_of_s goes the other
    way. H_flux is the sphere integral of H |grad w| (with w = (1-p) log u),
    the quantity that couples the geometry to the monotone combinations.
    """

    p: float
    family_tag: str
    params: dict
    t_grid: np.ndarray = field(repr=False)
    s_of_t: SampledCurve = field(repr=False)
    t_of_s: SampledCurve = field(repr=False)
    phi: SampledCurve = field(repr=False)
    u: SampledCurve = field(repr=False)
    du: SampledCurve = field(repr=False)
    W: SampledCurve = field(repr=False)
    dWdt: SampledCurve = field(repr=False)
    H: SampledCurve = field(repr=False)
    R: SampledCurve = field(repr=False)
    hawking: SampledCurve = field(repr=False)
    H_flux: SampledCurve = field(repr=False)
    Cp: float = 0.0
    adm: float = 0.0

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    @property
    def W0(self) -> float:
        return float(self.W.y[0])


def level_flow(
    warp: WarpProfile,
    p: float,
    n_t: int = DEFAULT_N_T,
    tol: Tolerances | None = None,
) -> FlowProfile:
    """Reparametrize a geometry by the level sets of its radial potential.

    Requires a minimal boundary sphere (otherwise the boundary data of the
    monotone combinations do not apply, and the call refuses). The state
    (s, phi, phi') is integrated BACKWARD in t from the outer end: forward
    integration is exponentially unstable because neighboring potentials
    diverge from each other at rate kappa/(3-p) per unit t, while backward
    the same rate is a contraction. ds/dt is evaluated in log space to
    survive small p - 1. The landing point is checked to hit the boundary
    (s = 0, phi = phi(0)) to tight absolute tolerance.
    """
    p = _check_p(p)
    tol = tol or DEFAULT_TOL
    if not warp.minimal_boundary:
        raise ValueError("level-set reparametrization requires a minimal boundary sphere")
    if n_t < 16:
        raise ValueError("need at least 16 time samples")

    kappa = 2.0 / (p - 1.0)
    u_curve, _, C = radial_p_harmonic(warp, p, tol=tol)
    ln_C = math.log(C)
    u_end = float(u_curve.y[-1])
    t_max = (1.0 - p) * math.log(u_end)

    s_max = warp.s_max
    phi_max = float(warp.phi.y[-1])
    dphi_max = float(warp.dphi.y[-1])
    accel = warp.accel_fn

    def rhs(t, y):
        s, phi, dphi = y
        ds_dt = math.exp(-t / (p - 1.0) + kappa * math.log(phi) - ln_C) / (p - 1.0)
        return [ds_dt, dphi * ds_dt, accel(s, phi, dphi) * ds_dt]

    sol = solve_ivp(
        rhs,
        (t_max, 0.0),
        [s_max, phi_max, dphi_max],
        method="DOP853",
        rtol=_GEOM_RTOL,
        atol=_GEOM_RTOL,
        dense_output=True,
        max_step=t_max / _MIN_FLOW_STEPS,
    )
    if not sol.success:
        raise RuntimeError(f"level-set reparametrization failed: {sol.message}")
    s0, phi0, _ = sol.sol(0.0)
    if abs(s0) > 1e-6 or abs(phi0 - warp.phi0) > 1e-8 * warp.phi0:
        raise RuntimeError(
            f"backward pass missed the boundary (s(0) = {s0:g}, phi(0) = {phi0:g})"
        )

    t = np.linspace(0.0, t_max, int(n_t))
    s_t, phi_t, dphi_t = sol.sol(t)
    s_t[0] = 0.0

    du_over_u = -np.exp(ln_C - kappa * np.log(phi_t) + t / (p - 1.0))
    u_t = np.exp(-t / (p - 1.0))
    du_t = u_t * du_over_u
    W = 4.0 * math.pi * (p - 1.0) ** 2 * (phi_t * du_over_u) ** 2
    dWds_over_W = 2.0 * ((1.0 - kappa) * dphi_t / phi_t - du_over_u)
    dtds = (1.0 - p) * du_over_u
    dWdt = W * dWds_over_W / dtds
    H = 2.0 * dphi_t / phi_t
    ddphi_t = np.asarray(accel(s_t, phi_t, dphi_t), dtype=float)
    R = 2.0 * (1.0 - dphi_t**2) / phi_t**2 - 4.0 * ddphi_t / phi_t
    hawking = 0.5 * phi_t * (1.0 - dphi_t**2)
    H_flux = 4.0 * math.pi * phi_t**2 * H * (p - 1.0) * np.abs(du_over_u)

    _, adm = masses(warp, tol=tol)
    return FlowProfile(
        p=p,
        family_tag=warp.family_tag,
        params=dict(warp.params),
        t_grid=t,
        s_of_t=SampledCurve(t, s_t),
        t_of_s=SampledCurve(s_t, t),
        phi=SampledCurve(t, phi_t),
        u=SampledCurve(t, u_t),
        du=SampledCurve(t, du_t),
        W=SampledCurve(t, W),
        dWdt=SampledCurve(t, dWdt),
        H=SampledCurve(t, H),
        R=SampledCurve(t, R),
        hawking=SampledCurve(t, hawking),
        H_flux=SampledCurve(t, H_flux),
        Cp=4.0 * math.pi * C ** (p - 1.0),
        adm=adm,
    )


def w_inequality_residual(flow: FlowProfile) -> tuple[SampledCurve, float]:
    """Residual of the differential inequality satisfied by W(t).

    res = (p-1)(3-p) W'' - W + 4 pi (3-p)^2 - 2(2-p) W'
          - ((p-1)(5-p)/4) (W')^2 / W,

    which on these geometries equals 2 pi (3-p)^2 R phi^2 identically, so
    it is nonnegative exactly when the scalar curvature is. W'' is taken by
    a five-point finite-difference stencil from the analytic W' samples.
    Returns the residual curve and the max gap against the exact identity.
    """
    p = flow.p
    s3 = 3.0 - p
    t = flow.t_grid
    W = flow.W.y
    dW = flow.dWdt.y
    W2 = stencil_derivative(dW, t[1] - t[0])
    res = (
        (p - 1.0) * s3 * W2
        - W
        + 4.0 * math.pi * s3**2
        - 2.0 * (2.0 - p) * dW
        - (p - 1.0) * (5.0 - p) / 4.0 * dW**2 / W
    )
    target = 2.0 * math.pi * s3**2 * flow.R.y * flow.phi.y ** 2
    gap = float(np.max(np.abs(res - target)))
    return SampledCurve(t, res), gap

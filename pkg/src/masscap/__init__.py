"""p-harmonic level-set flows, capacities, and sharp mass bounds on
rotationally symmetric asymptotically flat 3-manifolds.

The package builds the reference slice (spatial Schwarzschild of mass 2 in
isotropic coordinates), reconstructs the coefficient triples that make the
associated combinations monotone under nonnegative scalar curvature, runs
level-set flows on warped-product test geometries, and certifies
monotonicity, boundary inequalities, and the sharp capacity-to-mass margin
with equality detection.
"""

from importlib.metadata import PackageNotFoundError, version

from .coefficients import (
    ABCCoefficients,
    CoefficientSolution,
    abc_curves,
    growth_ode,
    model_constancy,
    perfect_square_residual,
    solve_decaying,
    solve_growing,
    system_residual,
)
from .frobenius import (
    FrobeniusSolution,
    IndicialRoots,
    InfinitySingularODE,
    indicial_roots,
    series_coefficients,
)
from .numerics import (
    PowerTailFit,
    SampledCurve,
    TailSpec,
    Tolerances,
    fit_power_tail,
    integrate_linear_system,
    interpolate,
    quad_tail,
)
from .schwarzschild import (
    CConstants,
    ModelGeometry,
    capacity_Kp,
    c_constants,
    flux_constant,
    model_profile,
    potential_ode,
    ws_boundary_data,
)
from .verify import (
    QCurve,
    VerificationReport,
    case_report,
    constant_diagnostics,
    evaluate_Q,
    horizon_W_bound,
    mass_functional_Fp,
    monotonicity_report,
    penrose_margin,
    q_limits,
)
from .warped import (
    FlowProfile,
    WarpProfile,
    capacity_Cp,
    family_bumped,
    family_flat_exterior,
    family_schwarzschild,
    level_flow,
    masses,
    radial_p_harmonic,
    scalar_curvature,
    spline_bump,
    w_inequality_residual,
)

try:
    __version__ = version("masscap")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.1.0"

__all__ = [
    "ABCCoefficients",
    "CConstants",
    "CoefficientSolution",
    "FlowProfile",
    "FrobeniusSolution",
    "IndicialRoots",
    "InfinitySingularODE",
    "ModelGeometry",
    "PowerTailFit",
    "QCurve",
    "SampledCurve",
    "TailSpec",
    "Tolerances",
    "VerificationReport",
    "WarpProfile",
    "abc_curves",
    "capacity_Cp",
    "capacity_Kp",
    "case_report",
    "c_constants",
    "constant_diagnostics",
    "evaluate_Q",
    "family_bumped",
    "family_flat_exterior",
    "family_schwarzschild",
    "fit_power_tail",
    "flux_constant",
    "growth_ode",
    "horizon_W_bound",
    "indicial_roots",
    "integrate_linear_system",
    "interpolate",
    "level_flow",
    "mass_functional_Fp",
    "masses",
    "model_constancy",
    "model_profile",
    "monotonicity_report",
    "penrose_margin",
    "perfect_square_residual",
    "potential_ode",
    "q_limits",
    "quad_tail",
    "radial_p_harmonic",
    "scalar_curvature",
    "series_coefficients",
    "solve_decaying",
    "solve_growing",
    "spline_bump",
    "system_residual",
    "w_inequality_residual",
    "ws_boundary_data",
]

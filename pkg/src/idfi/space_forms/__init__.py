"""Constant-curvature model spaces: geometry, heat kernels, semigroup machinery."""

from idfi.space_forms.flat_fields import (
    FlatField,
    GaussComponent,
    commuted_log_hessian,
    follmer_drift,
    smoothed_entropy,
    smoothed_log_derivatives,
)
from idfi.space_forms.geometry import (
    ManifoldPoint,
    SpaceForm,
    TangentVector,
    exp_map,
    geodesic_distance,
    log_map,
    parallel_transport,
)
from idfi.space_forms.kernels import heat_kernel, max_radius, radial_support, sphere_area
from idfi.space_forms.semigroup import (
    BoundaryTensors,
    HeatDerivatives,
    RadialFunction,
    constant_profile,
    entropy_direct,
    gaussian_bump,
    heat_profile,
    invert_heat_hessian,
    semigroup_apply,
    semigroup_derivatives,
    v_and_m_matrices,
)
from idfi.space_forms.stochastic import (
    EndpointTest,
    PathEnsemble,
    WangResidual,
    endpoint_chi_square,
    lehec_entropy_estimate,
    radial_cdf,
    simulate_brownian,
    simulate_follmer,
    wang_residual,
)

__all__ = [
    "BoundaryTensors",
    "EndpointTest",
    "FlatField",
    "GaussComponent",
    "HeatDerivatives",
    "ManifoldPoint",
    "PathEnsemble",
    "RadialFunction",
    "SpaceForm",
    "TangentVector",
    "WangResidual",
    "commuted_log_hessian",
    "constant_profile",
    "endpoint_chi_square",
    "entropy_direct",
    "exp_map",
    "follmer_drift",
    "gaussian_bump",
    "geodesic_distance",
    "heat_kernel",
    "heat_profile",
    "invert_heat_hessian",
    "lehec_entropy_estimate",
    "log_map",
    "max_radius",
    "parallel_transport",
    "radial_cdf",
    "radial_support",
    "semigroup_apply",
    "semigroup_derivatives",
    "simulate_brownian",
    "simulate_follmer",
    "smoothed_entropy",
    "smoothed_log_derivatives",
    "v_and_m_matrices",
    "wang_residual",
]

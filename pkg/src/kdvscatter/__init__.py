"""Direct and inverse scattering transforms for -d^2/dx^2 + q on the line,
and KdV evolution by cubic-phase rotation of the scattering coefficient."""

from .direct import (
    GenericityCertificate,
    ScatteringData,
    action_density,
    action_profile,
    born_s1,
    born_sn,
    check_generic,
    reflection_transmission,
    scattering_data,
    smoothing_part,
)
from .flows import (
    FlowReport,
    airy_flow,
    calibrate_rotation_sign,
    kdv_flow_scattering,
    kdv_flow_spectral,
    rotate,
    smoothing_report,
)
from .grids import (
    ComplexField,
    Potential,
    SpatialGrid,
    SpectralGrid,
    fourier_minus,
    h_zeta_norm,
    inverse_fourier_minus,
    sobolev_norm,
    weighted_l2_norm,
    zeta_weight,
)
from .hilbert import hilbert_transform
from .inverse import (
    InverseChain,
    MarchenkoKernel,
    build_chain,
    glm_solve,
    inverse_scattering,
    marchenko_kernel,
    reconstruct_half,
)
from .jost import JostField, solve_m1, solve_m2, w_imag_axis

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "FlowReport",
    "GenericityCertificate",
    "InverseChain",
    "JostField",
    "MarchenkoKernel",
    "Potential",
    "ScatteringData",
    "SpatialGrid",
    "SpectralGrid",
    "action_density",
    "action_profile",
    "airy_flow",
    "born_s1",
    "born_sn",
    "build_chain",
    "calibrate_rotation_sign",
    "check_generic",
    "fourier_minus",
    "glm_solve",
    "h_zeta_norm",
    "hilbert_transform",
    "inverse_fourier_minus",
    "inverse_scattering",
    "kdv_flow_scattering",
    "kdv_flow_spectral",
    "marchenko_kernel",
    "reconstruct_half",
    "reflection_transmission",
    "rotate",
    "scattering_data",
    "smoothing_part",
    "smoothing_report",
    "sobolev_norm",
    "solve_m1",
    "solve_m2",
    "w_imag_axis",
    "weighted_l2_norm",
    "zeta_weight",
]

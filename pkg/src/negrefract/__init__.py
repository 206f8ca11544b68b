"""Optical response of a laser-driven atomic medium with magneto-electric coupling."""

__version__ = "0.1.0"

from .params import (
    DarkStateSolution,
    ProbeDetunings,
    SystemParams,
    build_params,
    dark_state_populations,
    default_params,
    load_config,
    resonance_check,
    wigner_weisskopf_dipole,
)
from .linear_response import (
    BroadeningSpec,
    PolarizabilityQuartet,
    apply_doppler,
    kramers_kronig_residual,
    optimal_coupling_scan,
    polarizability_quartet,
)
from .medium import (
    MediumResponse,
    RefractiveResult,
    figure_of_merit,
    fresnel_reflection,
    inverse_impedance,
    local_field_correct,
    mirror_handedness,
    refractive_index,
    superlens_tolerance,
)
from .liouville import (
    DensityVector25,
    LiouvillianSystem,
    build_liouvillian,
    deviation,
    probe_fields,
    separated_polarizabilities,
    steady_state,
)
from .anisotropy import (
    Orientation,
    PolarTensor3,
    RabiComponents,
    angle_rabi,
    bb_tensor,
    cross_tensor,
    ee_tensor,
    helmholtz_index_numeric,
    index_vs_angle,
)
from .pipeline import evaluate_point, evaluate_response
from .estimator import ChiralMediumResponse

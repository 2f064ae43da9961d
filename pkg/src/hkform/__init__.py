"""Non-local heat kernel form factors, their diagrammatic derivation and numerical oracles."""

from .basis_transform import FormFactorSet, closed_form_set, from_bv, from_weyl, riemann_reduce, to_bv, to_weyl
from .diagrams import ansatz_npoint, extract_constants, extract_form_factors, npoint, propagator_chain
from .errors import HeatKernelError
from .fields import FieldData, load_fields, save_fields
from .form_factors import Constants, EvalConfig, FormFactorKind, SeriesExpansion, basic_f, evaluate, series
from .lattice import LatticeSpec, OracleResult, build_operator, exact_trace, isolate_second_order
from .projectors import ProjectorCoefficients, decompose, tensor_projector, vector_projectors
from .resolvent import Contour, contour_exp, omega_via_resolvent
from .trace import SpectralFunction, TraceExpansionResult, coincidence_kernel, laplace_trace, tr_heat_kernel

__version__ = "0.1.0"

__all__ = [
    "Constants",
    "Contour",
    "EvalConfig",
    "FieldData",
    "FormFactorKind",
    "FormFactorSet",
    "HeatKernelError",
    "LatticeSpec",
    "OracleResult",
    "ProjectorCoefficients",
    "SeriesExpansion",
    "SpectralFunction",
    "TraceExpansionResult",
    "ansatz_npoint",
    "basic_f",
    "build_operator",
    "closed_form_set",
    "coincidence_kernel",
    "contour_exp",
    "decompose",
    "evaluate",
    "exact_trace",
    "extract_constants",
    "extract_form_factors",
    "from_bv",
    "from_weyl",
    "isolate_second_order",
    "laplace_trace",
    "load_fields",
    "npoint",
    "omega_via_resolvent",
    "propagator_chain",
    "riemann_reduce",
    "save_fields",
    "series",
    "tensor_projector",
    "to_bv",
    "to_weyl",
    "tr_heat_kernel",
    "vector_projectors",
]

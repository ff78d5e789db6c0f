"""Blow-up subsolutions and mass-variable simulation for a two-species chemotaxis system."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import (AbortedRunError, ChemoBlowupError, DomainError, InfeasibleError,
                     InvalidParameterError, NotRepresentableError, PreconditionError)
from .exponents import (Exponents, RegionClass, blowup_condition, bounded_condition,
                        case3_exponents, classify_point, classify_region, select_exponents)
from .model import MassState, ModelParams, RadialProfile, make_params
from .operators import OperatorInput, eval_P, eval_Q, verify_subsolution
from .solver import SimConfig, SimResult, dominance_experiment, ordering_experiment, run
from .subsolution import (SubsolutionParams, derive_constants, eval_subsolution,
                          generate_initial_profiles, y_of_t)

__all__ = [
    "AbortedRunError", "ChemoBlowupError", "DomainError", "InfeasibleError",
    "InvalidParameterError", "NotRepresentableError", "PreconditionError",
    "Exponents", "RegionClass", "blowup_condition", "bounded_condition", "case3_exponents",
    "classify_point", "classify_region", "select_exponents",
    "MassState", "ModelParams", "RadialProfile", "make_params",
    "OperatorInput", "eval_P", "eval_Q", "verify_subsolution",
    "SimConfig", "SimResult", "dominance_experiment", "ordering_experiment", "run",
    "SubsolutionParams", "derive_constants", "eval_subsolution", "generate_initial_profiles",
    "y_of_t",
]

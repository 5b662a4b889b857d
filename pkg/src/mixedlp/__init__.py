"""Variable-exponent Lebesgue and mixed Lebesgue-sequence spaces on a 1-D grid."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    EstimateUndefinedError,
    ExponentClassError,
    GridMismatchError,
    HypothesisError,
    PreconditionError,
    SolverError,
)
from .exponent import (
    INF,
    Exponent,
    Grid,
    conjugate,
    ess_bounds,
    log_holder_estimate,
    norm_condition_classify,
    quotient,
)
from .gridfn import FunctionSequence, GridFunction, build_function, build_sequence, pointwise_magnitude, project
from .modular import luxemburg_norm, lp_norm, modular_value
from .mixed import MixedSpaceSpec, kothe_pairing, mixed_modular, mixed_modular_closed, mixed_modular_inf, mixed_norm
from .operators import (
    MollifierSpec,
    build_mollifier,
    convolve,
    maximal_boundedness_estimate,
    maximal_function,
    mollifier_scale,
    radial_majorant,
)

__all__ = [
    "INF", "Grid", "Exponent", "GridFunction", "FunctionSequence", "MixedSpaceSpec", "MollifierSpec",
    "build_function", "build_sequence", "build_mollifier", "conjugate", "ess_bounds", "quotient",
    "log_holder_estimate", "norm_condition_classify", "project", "pointwise_magnitude",
    "modular_value", "luxemburg_norm", "lp_norm", "mixed_modular", "mixed_modular_inf",
    "mixed_modular_closed", "mixed_norm", "kothe_pairing", "maximal_function",
    "maximal_boundedness_estimate", "mollifier_scale", "convolve", "radial_majorant",
    "ConfigError", "DomainError", "EstimateUndefinedError", "ExponentClassError",
    "GridMismatchError", "HypothesisError", "PreconditionError", "SolverError",
]

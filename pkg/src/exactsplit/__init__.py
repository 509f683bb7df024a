"""Exact time splitting for quadratic evolution equations on periodic grids."""
from .config import ConfigError, ExperimentConfig, parse_config, preset_config
from .diagnostics import (
    DiagnosticSeries,
    angular_momentum,
    decay_rate,
    energy,
    entropy,
    l2_error,
    mass,
)
from .grid import Field, GridSpec, count_transforms, read_snapshot, write_snapshot
from .plans import (
    ConsistencyError,
    ElementaryFactor,
    SplittingPlan,
    kfp_plan,
    fp_plan,
    shear_factorize,
    triangular_split,
    verify_plan,
)
from .presets import PRESETS, get_preset
from .propagators import Stepper, apply_plan, make_stepper, schrodinger_stepper
from .symplectic import QuadraticSymbol, SplittingRadiusError, frequencies

__all__ = [
    "ConfigError", "ExperimentConfig", "parse_config", "preset_config",
    "DiagnosticSeries", "angular_momentum", "decay_rate", "energy", "entropy", "l2_error", "mass",
    "Field", "GridSpec", "count_transforms", "read_snapshot", "write_snapshot",
    "ConsistencyError", "ElementaryFactor", "SplittingPlan", "kfp_plan", "fp_plan",
    "shear_factorize", "triangular_split", "verify_plan",
    "PRESETS", "get_preset",
    "Stepper", "apply_plan", "make_stepper", "schrodinger_stepper",
    "QuadraticSymbol", "SplittingRadiusError", "frequencies",
]

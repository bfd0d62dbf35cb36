"""Kriging surrogates for the stability of a friction-excited mass-on-belt oscillator."""

__version__ = "0.1.0"

from . import dynamics, indicators, kriging, metrics, sampling
from .dynamics import IntegratorConfig, State, SystemParams, integrate, step_map
from .exceptions import (
    AcquisitionOrderError,
    DegenerateFrame,
    EmptyPool,
    LengthMismatch,
    MixedProblems,
    MobError,
    NonFiniteState,
    OutOfDomain,
    SingularCorrelation,
    StepUnderflow,
    ZeroSpread,
)
from .indicators import LLEConfig, StickingConfig, classify_lle, mob_lle, sticking_time
from .kriging import DesignSet, KrigingModel, PSOConfig, optimize_hyperparameters, predict

__all__ = [
    "__version__",
    "dynamics", "indicators", "kriging", "metrics", "sampling",
    "SystemParams", "State", "IntegratorConfig", "integrate", "step_map",
    "StickingConfig", "LLEConfig", "sticking_time", "mob_lle", "classify_lle",
    "DesignSet", "KrigingModel", "PSOConfig", "optimize_hyperparameters", "predict",
    "MobError", "StepUnderflow", "NonFiniteState", "DegenerateFrame", "SingularCorrelation",
    "EmptyPool", "OutOfDomain", "LengthMismatch", "ZeroSpread", "MixedProblems",
    "AcquisitionOrderError",
]

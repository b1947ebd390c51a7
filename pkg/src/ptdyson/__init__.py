"""Verified numerical engine for the 2D non-Hermitian coupled oscillator.

The package builds the time-dependent Dyson map, metric and Hermitian
counterpart of H = (p_x^2 + p_y^2)/2m + m(Omega_x^2 x^2 + Omega_y^2 y^2)/2
+ i*lambda*x*y across the unbroken, broken and exceptional PT regimes, and
cross-checks every closed form against independent numerical oracles.
"""

from . import algebra, dynamic_map, model, schrodinger, static_map
from .errors import (
    AlphaMinusZero,
    BoundaryContamination,
    ConfigError,
    ConvergenceFailure,
    ExceptionalDenominator,
    LogDomain,
    NonPositiveRho,
    NotInUnbrokenRegime,
    PtdysonError,
    RegimeMismatch,
    SingularConfiguration,
    StepFailure,
    ThetaPlusDomain,
)
from .model import ModelParams, Regime, RegimeKind, Spectrum

__all__ = [
    "algebra",
    "model",
    "static_map",
    "dynamic_map",
    "schrodinger",
    "ModelParams",
    "Regime",
    "RegimeKind",
    "Spectrum",
    "PtdysonError",
    "NotInUnbrokenRegime",
    "SingularConfiguration",
    "RegimeMismatch",
    "ThetaPlusDomain",
    "AlphaMinusZero",
    "LogDomain",
    "ExceptionalDenominator",
    "StepFailure",
    "NonPositiveRho",
    "BoundaryContamination",
    "ConvergenceFailure",
    "ConfigError",
]

__version__ = "0.1.0"

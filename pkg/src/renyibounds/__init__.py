"""Renyi-divergence bounds relating optimal and pretty good guessing and recovery."""

from .errors import (
    BadParams,
    DimensionMismatch,
    InvalidState,
    MissingDims,
    NoConvergence,
    NonCommuting,
    NotHermitian,
    NotPSD,
    OutOfRange,
    RenyiBoundsError,
    UnsupportedAlpha,
)
from .states import DensityOperator, Ensemble
from .strategies import Channel, Povm
from .optimal import CertifiedValue, p_opt, r_opt, max_fid_uniform
from .bounds import BoundReport

__version__ = "0.1.0"

__all__ = [
    "BadParams",
    "BoundReport",
    "CertifiedValue",
    "Channel",
    "DensityOperator",
    "DimensionMismatch",
    "Ensemble",
    "InvalidState",
    "MissingDims",
    "NoConvergence",
    "NonCommuting",
    "NotHermitian",
    "NotPSD",
    "OutOfRange",
    "Povm",
    "RenyiBoundsError",
    "UnsupportedAlpha",
    "max_fid_uniform",
    "p_opt",
    "r_opt",
]

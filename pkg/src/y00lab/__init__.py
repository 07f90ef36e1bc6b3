"""Simulation and ciphertext-only cryptanalysis of the Y-00 quantum stream cipher."""

from .errors import ConfigError, DomainError, IllDefinedRegionError
from .optics import (
    Qumode,
    StokesPoint,
    discriminate_in_base,
    fluctuation_sigma,
    measure_angle,
    n_sigma,
    overlap,
    qumode_angle,
    stokes_point,
)
from .wheel import (
    BaseClass,
    WheelConfig,
    base_of_state,
    bit_of_state,
    classify_global,
    classify_local,
    cut_base,
    predict_keystream_bit,
    seam_pairs,
    state_index,
)

__version__ = "0.1.0"

__all__ = [
    "BaseClass",
    "ConfigError",
    "DomainError",
    "IllDefinedRegionError",
    "Qumode",
    "StokesPoint",
    "WheelConfig",
    "base_of_state",
    "bit_of_state",
    "classify_global",
    "classify_local",
    "cut_base",
    "discriminate_in_base",
    "fluctuation_sigma",
    "measure_angle",
    "n_sigma",
    "overlap",
    "predict_keystream_bit",
    "qumode_angle",
    "seam_pairs",
    "state_index",
    "stokes_point",
]

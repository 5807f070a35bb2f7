"""Numerical core: transforms, Toeplitz mixing, layers, network, losses, HR analysis"""

from .errors import (
    ToTMNetError,
    InvalidLengthError,
    DimensionError,
    ConfigurationError,
    OutOfBandError,
    CorrectnessError,
    DivergenceError,
    CheckpointMismatchError,
)
from .toeplitz import ToeplitzKernel, toeplitz_mix, toeplitz_mix_backward
from .network import ModelParams, init_params, model_forward, model_backward, param_count
from .losses import combined_loss
from .heart_rate import estimate_hr_fft, snr_db, compute_metrics
from .optimizer import AdamState, adam_step

__all__ = [
    "ToTMNetError",
    "InvalidLengthError",
    "DimensionError",
    "ConfigurationError",
    "OutOfBandError",
    "CorrectnessError",
    "DivergenceError",
    "CheckpointMismatchError",
    "ToeplitzKernel",
    "toeplitz_mix",
    "toeplitz_mix_backward",
    "ModelParams",
    "init_params",
    "model_forward",
    "model_backward",
    "param_count",
    "combined_loss",
    "estimate_hr_fft",
    "snr_db",
    "compute_metrics",
    "AdamState",
    "adam_step",
]

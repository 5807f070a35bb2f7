"""Composite training objective with analytic gradients.

Every loss takes (pred, ref) of shape B x T and returns (value, dpred).
"""

import logging
from typing import Dict, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..models.config_models import LossConfig, StftConfig
from .errors import ConfigurationError, DimensionError
from .fft import fft_forward, hann_window

logger = logging.getLogger(__name__)


def _check_pair(pred: np.ndarray, ref: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.shape != ref.shape or pred.ndim != 2:
        raise DimensionError(f"pred {pred.shape} and ref {ref.shape} must both be B x T")
    return pred, ref


def mse_loss(pred: np.ndarray, ref: np.ndarray) -> Tuple[float, np.ndarray]:
    """(1/BT) sum (pred - ref)^2."""
    pred, ref = _check_pair(pred, ref)
    diff = pred - ref
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


def pearson_loss(pred: np.ndarray, ref: np.ndarray, eps: float = 1e-8) -> Tuple[float, np.ndarray]:
    """
    Mean over clips of 1 - rho_b, where

        rho_b = sum(p~ r~) / sqrt(sum(p~^2) * sum(r~^2) + eps)

    and p~, r~ are the per-clip mean-centred signals. A constant clip gives
    rho_b ~ 0 rather than an error.
    """
    pred, ref = _check_pair(pred, ref)
    B, T = pred.shape
    if T < 2:
        raise DimensionError(f"pearson loss needs T >= 2, got {T}")
    pc = pred - pred.mean(axis=1, keepdims=True)
    rc = ref - ref.mean(axis=1, keepdims=True)
    spr = np.sum(pc * rc, axis=1, keepdims=True)
    spp = np.sum(pc * pc, axis=1, keepdims=True)
    srr = np.sum(rc * rc, axis=1, keepdims=True)
    denom = np.sqrt(spp * srr + eps)
    rho = spr / denom

    drho = rc / denom - spr * srr * pc / denom ** 3
    # gradient w.r.t. the raw signal is the centred projection
    drho = drho - drho.mean(axis=1, keepdims=True)
    return float(np.mean(1.0 - rho)), -drho / B


# -------------
# Spectral term
# -------------

def band_bins(stft: StftConfig, fs: float) -> np.ndarray:
    """Indices k <= window_len/2 whose frequency k*fs/window_len lies in the band."""
    lo, hi = stft.band
    k = np.arange(stft.window_len // 2 + 1)
    freqs = k * fs / stft.window_len
    bins = k[(freqs >= lo) & (freqs <= hi)]
    if bins.size == 0:
        raise ConfigurationError(f"no STFT bin falls in band {stft.band} at fs={fs}, window={stft.window_len}")
    return bins


def stft_frames(x: np.ndarray, stft: StftConfig) -> np.ndarray:
    """Windowed frames B x F x window_len, F = 1 + (T - window_len) // hop."""
    T = x.shape[-1]
    if T < stft.window_len:
        raise ConfigurationError(f"clip length T={T} shorter than STFT window {stft.window_len}")
    frames = sliding_window_view(x, stft.window_len, axis=-1)[..., :: stft.hop, :]
    return frames * hann_window(stft.window_len)


def stft(x: np.ndarray, stft_cfg: StftConfig) -> np.ndarray:
    """Complex STFT coefficients B x F x window_len."""
    return fft_forward(stft_frames(np.asarray(x, dtype=np.float64), stft_cfg))


def spectral_loss(
    pred: np.ndarray,
    ref: np.ndarray,
    cfg: LossConfig,
    fs: float,
) -> Tuple[float, np.ndarray]:
    """
    Mean over in-band (clip, bin, frame) triples of | |STFT(pred)| - |STFT(ref)| |^p.

    The gradient flows through the magnitude; bins where |STFT(pred)| is 0
    contribute a zero subgradient.

    Raises:
        ConfigurationError: if T < window_len or the band holds no bin
    """
    pred, ref = _check_pair(pred, ref)
    stft_cfg = cfg.stft
    bins = band_bins(stft_cfg, fs)
    coef_pred = stft(pred, stft_cfg)
    coef_ref = stft(ref, stft_cfg)
    mag_pred = np.abs(coef_pred[..., bins])
    mag_ref = np.abs(coef_ref[..., bins])
    diff = mag_pred - mag_ref
    count = diff.size

    if stft_cfg.p == 1:
        value = float(np.sum(np.abs(diff)) / count)
        dmag = np.sign(diff) / count
    else:
        value = float(np.sum(diff ** 2) / count)
        dmag = 2.0 * diff / count

    # d|F_k|/dx_n = w_n Re(conj(F_k) e^{-2 pi i k n / N}) / |F_k|
    safe = np.where(mag_pred > 0.0, mag_pred, 1.0)
    weights = np.where(mag_pred > 0.0, dmag / safe, 0.0)
    coeffs = np.zeros_like(coef_pred)
    coeffs[..., bins] = weights * np.conj(coef_pred[..., bins])
    dframes = fft_forward(coeffs).real * hann_window(stft_cfg.window_len)

    dpred = np.zeros_like(pred)
    for frame in range(dframes.shape[1]):
        start = frame * stft_cfg.hop
        dpred[:, start: start + stft_cfg.window_len] += dframes[:, frame]
    return value, dpred


def combined_loss(
    pred: np.ndarray,
    ref: np.ndarray,
    cfg: LossConfig,
    fs: float,
) -> Tuple[float, np.ndarray, Dict[str, float]]:
    """
    lambda_mse * L_mse + lambda_rho * L_rho + lambda_spec * L_spec.

    Terms with zero weight are skipped (reported as 0.0), so a zero-weight
    spectral term places no constraint on T.

    Returns:
        (value, dpred, {"mse": ..., "rho": ..., "spec": ...})
    """
    pred, ref = _check_pair(pred, ref)
    total = 0.0
    grad = np.zeros_like(pred)
    terms = {"mse": 0.0, "rho": 0.0, "spec": 0.0}
    weighted = (
        ("mse", cfg.lambda_mse, lambda: mse_loss(pred, ref)),
        ("rho", cfg.lambda_rho, lambda: pearson_loss(pred, ref, cfg.eps)),
        ("spec", cfg.lambda_spec, lambda: spectral_loss(pred, ref, cfg, fs)),
    )
    for name, weight, term in weighted:
        if weight == 0.0:
            continue
        value, dpred = term()
        terms[name] = value
        total += weight * value
        grad += weight * dpred
    return total, grad, terms

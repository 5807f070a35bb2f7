"""Heart-rate estimation by spectral peak, waveform SNR and the HR metric suite"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..models.output_models import Metrics
from .errors import ConfigurationError, DimensionError, OutOfBandError
from .fft import hann_window, next_power_of_two, power_spectrum, rfft_frequencies

logger = logging.getLogger(__name__)

DEFAULT_BAND_HZ = (0.75, 2.5)
DEFAULT_SNR_RANGE_HZ = (0.6, 4.0)
SNR_REF_LIMITS_HZ = (0.6, 2.0)
MIN_NFFT = 4096


def spectrum_length(n_samples: int, min_nfft: int = MIN_NFFT) -> int:
    """max(min_nfft, next power of two >= 8 * n_samples)."""
    return max(min_nfft, next_power_of_two(8 * n_samples))


def _detrended_spectrum(
    wave: np.ndarray, fs: float, min_nfft: int, taper: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    wave = np.asarray(wave, dtype=np.float64)
    if wave.ndim != 1:
        raise DimensionError(f"expected a 1-D waveform, got shape {wave.shape}")
    if wave.size < 2 * fs:
        raise DimensionError(f"waveform of {wave.size} samples is shorter than 2 s at fs={fs}")
    n_fft = spectrum_length(wave.size, min_nfft)
    centred = wave - wave.mean()
    if taper:
        centred = centred * hann_window(wave.size)
    return power_spectrum(centred, n_fft), rfft_frequencies(n_fft, fs)


def bin_spacing_bpm(n_samples: int, fs: float, min_nfft: int = MIN_NFFT) -> float:
    """Spacing of the zero-padded spectrum grid in bpm; the estimator's resolution."""
    return 60.0 * fs / spectrum_length(n_samples, min_nfft)


def estimate_hr_fft(
    wave: np.ndarray,
    fs: float,
    band: Tuple[float, float] = DEFAULT_BAND_HZ,
    min_nfft: int = MIN_NFFT,
) -> float:
    """
    Heart rate (bpm) at the in-band power-spectrum peak.

    The waveform is mean-removed, Hann-tapered and zero-padded; ties go to the
    lower frequency.

    Raises:
        ConfigurationError: if no bin falls inside the band
    """
    lo, hi = band
    if not 0.0 < lo < hi < fs / 2.0:
        raise ConfigurationError(f"band {band} must lie within (0, {fs / 2.0}) Hz")
    spectrum, freqs = _detrended_spectrum(wave, fs, min_nfft, taper=True)
    in_band = np.flatnonzero((freqs >= lo) & (freqs <= hi))
    if in_band.size == 0:
        raise ConfigurationError(f"band {band} holds no FFT bin at resolution {freqs[1]:.4f} Hz")
    # argmax returns the first maximum, i.e. the lowest frequency
    peak = in_band[np.argmax(spectrum[in_band])]
    return float(60.0 * freqs[peak])


def snr_db(
    pred_wave: np.ndarray,
    ref_hr_bpm: float,
    fs: float,
    half_width_hz: float = 0.1,
    snr_range_hz: Tuple[float, float] = DEFAULT_SNR_RANGE_HZ,
    min_nfft: int = MIN_NFFT,
) -> float:
    """
    10 log10(signal / rest) over the analysis range, where signal is the power
    within +-half_width of f_ref and of 2 f_ref.

    Raises:
        OutOfBandError: if f_ref is outside [0.6, 2.0] Hz
    """
    f_ref = ref_hr_bpm / 60.0
    lo_ref, hi_ref = SNR_REF_LIMITS_HZ
    if not lo_ref <= f_ref <= hi_ref:
        raise OutOfBandError(f"reference frequency {f_ref:.3f} Hz outside [{lo_ref}, {hi_ref}] Hz")
    spectrum, freqs = _detrended_spectrum(pred_wave, fs, min_nfft)
    lo, hi = snr_range_hz
    in_range = (freqs >= lo) & (freqs <= hi)
    signal_mask = in_range & (
        (np.abs(freqs - f_ref) <= half_width_hz) | (np.abs(freqs - 2.0 * f_ref) <= half_width_hz)
    )
    signal = float(np.sum(spectrum[signal_mask]))
    noise = float(np.sum(spectrum[in_range & ~signal_mask]))
    tiny = np.finfo(np.float64).tiny
    return float(10.0 * np.log10(max(signal, tiny) / max(noise, tiny)))


def pearson_or_none(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Pearson correlation, or None when n < 2 or either array is constant."""
    if x.size < 2:
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.sum(xc * xc))
    syy = float(np.sum(yc * yc))
    if sxx == 0.0 or syy == 0.0:
        return None
    rho = float(np.sum(xc * yc) / np.sqrt(sxx * syy))
    return float(np.clip(rho, -1.0, 1.0))


def compute_metrics(
    pred_hr: Sequence[float],
    ref_hr: Sequence[float],
    snr_values: Optional[Sequence[Optional[float]]] = None,
) -> Metrics:
    """
    MAE, RMSE, MAPE and Pearson over n clip-level HR pairs; SNR is the mean
    of the defined per-clip values (None if there are none).

    Raises:
        DimensionError: on length mismatch or n == 0
        ConfigurationError: if any reference HR is not positive
    """
    pred = np.asarray(pred_hr, dtype=np.float64)
    ref = np.asarray(ref_hr, dtype=np.float64)
    if pred.shape != ref.shape or pred.ndim != 1 or pred.size == 0:
        raise DimensionError(f"need two equal-length non-empty HR arrays, got {pred.shape} and {ref.shape}")
    if np.any(ref <= 0.0):
        raise ConfigurationError("reference heart rates must be strictly positive")
    delta = pred - ref
    defined_snr = [value for value in (snr_values or []) if value is not None]
    return Metrics(
        mae_bpm=float(np.mean(np.abs(delta))),
        rmse_bpm=float(np.sqrt(np.mean(delta ** 2))),
        mape_pct=float(100.0 * np.mean(np.abs(delta) / ref)),
        pearson=pearson_or_none(pred, ref),
        snr_db=float(np.mean(defined_snr)) if defined_snr else None,
        n_clips=int(pred.size),
    )

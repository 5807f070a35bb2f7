"""Radix-2 discrete Fourier transform and the convolution/spectrum helpers built on it.

All transforms act on the last axis, so a stack of traces (for example the
B x d channel traces of a token tensor) is transformed in one call. Lengths
must be powers of two; callers zero-pad.

A ``ComplexArray`` is a complex128 ndarray: its ``.real`` and ``.imag`` views
are the two equal-length real arrays of the transform.
"""

from functools import lru_cache

import numpy as np
import numpy.typing as npt

from .errors import CorrectnessError, InvalidLengthError

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise InvalidLengthError(f"length must be >= 1, got {n}")
    return 1 << (n - 1).bit_length()


@lru_cache(maxsize=64)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx = idx >> 1
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(n: int) -> np.ndarray:
    # exp(-2*pi*i*k/n) for k < n/2; every stage takes a strided slice
    tw = np.exp(-2j * np.pi * np.arange(n // 2) / n)
    tw.setflags(write=False)
    return tw


def _check_length(n: int) -> None:
    if not is_power_of_two(n):
        raise InvalidLengthError(f"transform length must be a power of two, got {n}")


def fft_forward(x: npt.ArrayLike) -> ComplexArray:
    """
    Forward DFT X[k] = sum_n x[n] exp(-2 pi i k n / N) along the last axis.

    Iterative decimation-in-time: bit-reversal permutation, then log2(N)
    butterfly stages, each vectorized over every block and leading axis.

    Args:
        x: real or complex array whose last axis has power-of-two length

    Returns:
        complex128 array of the same shape

    Raises:
        InvalidLengthError: if the last axis is not a power of two
    """
    y = np.asarray(x, dtype=np.complex128)
    if y.ndim == 0:
        raise InvalidLengthError("transform input must have at least one axis")
    n = y.shape[-1]
    _check_length(n)
    lead = y.shape[:-1]
    y = y[..., _bit_reversal(n)]
    if n == 1:
        return y

    tw = _twiddles(n)
    half = 1
    while half < n:
        span = 2 * half
        w = tw[:: n // span]
        blocks = y.reshape(*lead, n // span, 2, half)
        top = blocks[..., 0, :]
        bottom = blocks[..., 1, :] * w
        y = np.stack((top + bottom, top - bottom), axis=-2).reshape(*lead, n)
        half = span
    return y


def fft_inverse(X: npt.ArrayLike) -> ComplexArray:
    """
    Inverse DFT x[n] = (1/N) sum_k X[k] exp(+2 pi i k n / N) along the last axis.

    Raises:
        InvalidLengthError: if the last axis is not a power of two
    """
    Y = np.asarray(X, dtype=np.complex128)
    if Y.ndim == 0:
        raise InvalidLengthError("transform input must have at least one axis")
    n = Y.shape[-1]
    return np.conj(fft_forward(np.conj(Y))) / n


def zero_pad(x: npt.ArrayLike, length: int) -> np.ndarray:
    """Right-pad the last axis with zeros up to ``length``."""
    arr = np.asarray(x)
    if arr.shape[-1] > length:
        raise InvalidLengthError(f"cannot pad length {arr.shape[-1]} down to {length}")
    pad = [(0, 0)] * (arr.ndim - 1) + [(0, length - arr.shape[-1])]
    return np.pad(arr, pad)


def linear_convolve(a: npt.ArrayLike, b: npt.ArrayLike) -> RealArray:
    """
    Linear convolution out[k] = sum_j a[j] b[k-j] of two real 1-D arrays.

    Both inputs are zero-padded to the next power of two >= M+N-1, so the
    circular product of their spectra equals the linear convolution.

    Raises:
        InvalidLengthError: if either input is empty
        CorrectnessError: if the imaginary residue is not negligible
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise InvalidLengthError("linear_convolve needs non-empty inputs")
    out_len = a.size + b.size - 1
    n = next_power_of_two(out_len)
    z = fft_inverse(fft_forward(zero_pad(a, n)) * fft_forward(zero_pad(b, n)))[:out_len]
    out = z.real
    residue = float(np.max(np.abs(z.imag)))
    if residue >= 1e-9 * (1.0 + float(np.max(np.abs(out)))):
        raise CorrectnessError(f"convolution imaginary residue too large: {residue:.3e}")
    return out


def power_spectrum(x: npt.ArrayLike, n_fft: int) -> RealArray:
    """
    |DFT(zero_pad(x, n_fft))[k]|^2 for the non-negative bins k = 0..n_fft/2.

    Raises:
        InvalidLengthError: if n_fft is not a power of two or shorter than x
    """
    arr = np.asarray(x, dtype=np.float64)
    _check_length(n_fft)
    if n_fft < arr.shape[-1]:
        raise InvalidLengthError(f"n_fft={n_fft} shorter than input length {arr.shape[-1]}")
    spec = fft_forward(zero_pad(arr, n_fft))[..., : n_fft // 2 + 1]
    return spec.real ** 2 + spec.imag ** 2


def rfft_frequencies(n_fft: int, fs: float) -> RealArray:
    """Bin frequencies (Hz) matching ``power_spectrum`` output."""
    return np.arange(n_fft // 2 + 1) * (fs / n_fft)


@lru_cache(maxsize=16)
def hann_window(length: int) -> RealArray:
    """Periodic Hann window."""
    n = np.arange(length)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)
    window.setflags(write=False)
    return window


# -------------
# Dense oracles
# -------------

def dft_naive(x: npt.ArrayLike) -> ComplexArray:
    """O(N^2) DFT of a 1-D array, any length."""
    arr = np.asarray(x, dtype=np.complex128).ravel()
    n = arr.size
    k = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return basis @ arr


def convolve_naive(a: npt.ArrayLike, b: npt.ArrayLike) -> RealArray:
    """O(MN) double-loop linear convolution."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    out = np.zeros(a.size + b.size - 1)
    for i in range(a.size):
        for j in range(b.size):
            out[i + j] += a[i] * b[j]
    return out


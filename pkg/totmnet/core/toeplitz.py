"""Toeplitz temporal mixing operator: parameterization, dense oracle, FFT path, adjoint"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError, DimensionError, InvalidLengthError
from .fft import fft_forward, fft_inverse, next_power_of_two, zero_pad


@dataclass
class ToeplitzKernel:
    """
    First column ``c`` and first row ``r`` of a T x T Toeplitz matrix.

    Lag tau_k lives in c[k] for k >= 0 and tau_{-k} in r[k] for k >= 1; r[0]
    mirrors c[0], leaving 2T - 1 degrees of freedom. The arrays are adopted
    without copying when already float64, so a kernel built over parameter
    storage re-synchronizes that storage in place.

    Attributes:
        c: first column, length T
        r: first row, length T
        max_lag: optional truncation radius; lags beyond it are held at zero
    """

    c: np.ndarray
    r: np.ndarray
    max_lag: Optional[int] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        self.r = np.asarray(self.r, dtype=np.float64)
        if self.c.ndim != 1 or self.r.ndim != 1:
            raise DimensionError("kernel column and row must be 1-D")
        if self.c.size < 1:
            raise DimensionError("kernel length must be >= 1")
        if self.c.size != self.r.size:
            raise DimensionError(f"column length {self.c.size} != row length {self.r.size}")
        if self.max_lag is not None and self.max_lag < 0:
            raise ConfigurationError(f"max_lag must be >= 0, got {self.max_lag}")
        self.enforce_structure()

    @property
    def T(self) -> int:
        return self.c.size

    @property
    def degrees_of_freedom(self) -> int:
        return 2 * self.T - 1

    def enforce_structure(self) -> None:
        """Re-apply r[0] == c[0] and the truncation band, in place."""
        self.r[0] = self.c[0]
        if self.max_lag is not None:
            self.c[self.max_lag + 1:] = 0.0
            self.r[self.max_lag + 1:] = 0.0

    def transposed(self) -> "ToeplitzKernel":
        """Kernel of A^T: column and row swap roles."""
        return ToeplitzKernel(self.r.copy(), self.c.copy(), self.max_lag)

    @classmethod
    def identity(cls, T: int, max_lag: Optional[int] = None) -> "ToeplitzKernel":
        c = np.zeros(T)
        c[0] = 1.0
        return cls(c, np.zeros(T), max_lag)

    @classmethod
    def initialize(
        cls,
        T: int,
        rng: np.random.Generator,
        sigma: float = 0.02,
        max_lag: Optional[int] = None,
    ) -> "ToeplitzKernel":
        """Near-identity start: unit diagonal, N(0, sigma^2) off-diagonal lags."""
        c = rng.normal(0.0, sigma, size=T)
        r = rng.normal(0.0, sigma, size=T)
        c[0] = 1.0
        return cls(c, r, max_lag)


def build_dense(kernel: ToeplitzKernel) -> np.ndarray:
    """
    Materialize A(c, r) with A[m][n] = c[m-n] for m >= n and r[n-m] otherwise.

    Returns:
        T x T float64 matrix (a fresh copy)
    """
    T = kernel.T
    # lags -(T-1)..(T-1) laid out left to right; A[m, n] = lags[T-1+m-n]
    lags = np.concatenate((kernel.r[:0:-1], kernel.c))
    windows = sliding_window_view(lags, T)
    return np.ascontiguousarray(windows[:, ::-1])


def embed_kernel(kernel: ToeplitzKernel, padded_len: int) -> np.ndarray:
    """
    Circulant embedding [c, 0, ..., 0, r[T-1], ..., r[1]] of length ``padded_len``.

    For padded_len == 2T-1 this is the exact [c; rev(r[1:])] vector; extra
    zeros sit between the column and the reversed row so the wrap-around
    alignment of the negative lags is preserved.

    Raises:
        InvalidLengthError: if padded_len < 2T - 1
    """
    T = kernel.T
    if padded_len < 2 * T - 1:
        raise InvalidLengthError(f"padded length {padded_len} < 2T-1 = {2 * T - 1}")
    kappa = np.zeros(padded_len)
    kappa[:T] = kernel.c
    if T > 1:
        kappa[padded_len - (T - 1):] = kernel.r[:0:-1]
    return kappa


def _check_tokens(Q: np.ndarray, kernel: ToeplitzKernel, name: str = "Q") -> None:
    if Q.ndim != 3:
        raise DimensionError(f"{name} must be B x T x d, got shape {Q.shape}")
    if Q.shape[1] != kernel.T:
        raise DimensionError(f"{name} has T={Q.shape[1]} but kernel has T={kernel.T}")


def _padded_length(T: int) -> int:
    return next_power_of_two(2 * T - 1)


def toeplitz_mix(Q: np.ndarray, kernel: ToeplitzKernel) -> np.ndarray:
    """
    V[b, :, j] = A(c, r) Q[b, :, j] for every batch element and channel, via FFT.

    The kernel spectrum is computed once and shared by all B*d traces.

    Args:
        Q: B x T x d tokens
        kernel: Toeplitz kernel of length T

    Returns:
        B x T x d mixed tokens

    Raises:
        DimensionError: if Q is not B x T x d with the kernel's T
    """
    Q = np.asarray(Q, dtype=np.float64)
    _check_tokens(Q, kernel)
    T = kernel.T
    n = _padded_length(T)
    traces = zero_pad(np.swapaxes(Q, 1, 2), n)
    kernel_spec = fft_forward(embed_kernel(kernel, n))
    mixed = fft_inverse(fft_forward(traces) * kernel_spec)[..., :T].real
    return np.ascontiguousarray(np.swapaxes(mixed, 1, 2))


def toeplitz_mix_dense(Q: np.ndarray, kernel: ToeplitzKernel) -> np.ndarray:
    """Dense O(T^2) reference for ``toeplitz_mix``."""
    Q = np.asarray(Q, dtype=np.float64)
    _check_tokens(Q, kernel)
    return np.matmul(build_dense(kernel), Q)


def toeplitz_mix_backward(
    dV: np.ndarray,
    Q_cached: np.ndarray,
    kernel: ToeplitzKernel,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Adjoint of ``toeplitz_mix``.

    dQ = A^T dV (the Toeplitz matrix with column r and row c). The kernel
    gradients are cross-correlations of dV against Q summed over batch and
    channels, read off one inverse transform: non-negative lags give dc,
    negative lags give dr. The shared diagonal gradient is reported in dc[0]
    and copied into dr[0].

    Args:
        dV: upstream gradient, B x T x d
        Q_cached: forward input, B x T x d
        kernel: forward kernel

    Returns:
        (dQ, dc, dr)

    Raises:
        DimensionError: on shape mismatch
    """
    dV = np.asarray(dV, dtype=np.float64)
    Q_cached = np.asarray(Q_cached, dtype=np.float64)
    _check_tokens(dV, kernel, "dV")
    if Q_cached.shape != dV.shape:
        raise DimensionError(f"dV shape {dV.shape} != cached Q shape {Q_cached.shape}")

    dQ = toeplitz_mix(dV, kernel.transposed())

    T = kernel.T
    n = _padded_length(T)
    dv_spec = fft_forward(zero_pad(np.swapaxes(dV, 1, 2), n))
    q_spec = fft_forward(zero_pad(np.swapaxes(Q_cached, 1, 2), n))
    cross = np.sum(dv_spec * np.conj(q_spec), axis=(0, 1))
    corr = fft_inverse(cross).real

    dc = corr[:T].copy()
    dr = np.empty(T)
    dr[0] = dc[0]
    dr[1:] = corr[n - 1: n - T: -1]
    if kernel.max_lag is not None:
        dc[kernel.max_lag + 1:] = 0.0
        dr[kernel.max_lag + 1:] = 0.0
    return dQ, dc, dr


def toeplitz_kernel_grad_dense(
    dV: np.ndarray,
    Q_cached: np.ndarray,
    kernel: ToeplitzKernel,
) -> Tuple[np.ndarray, np.ndarray]:
    """Double-loop reference for the kernel gradients (dc, dr)."""
    T = kernel.T
    dc = np.zeros(T)
    dr = np.zeros(T)
    for m in range(T):
        for n in range(T):
            contrib = float(np.sum(dV[:, m, :] * Q_cached[:, n, :]))
            if m >= n:
                dc[m - n] += contrib
            else:
                dr[n - m] += contrib
    dr[0] = dc[0]
    if kernel.max_lag is not None:
        dc[kernel.max_lag + 1:] = 0.0
        dr[kernel.max_lag + 1:] = 0.0
    return dc, dr

"""Differentiable building blocks with cached forward state and analytic backward passes.

Every ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
consumes the upstream gradient and that cache. Tensors are float64 arrays
laid out B x T x d (time on the second axis).
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError

LayerCache = Dict[str, Any]

DEFAULT_EPS = 1e-5


# -------------
# Normalization
# -------------

def _normalize_forward(
    H: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    eps: float,
    axis: int,
) -> Tuple[np.ndarray, LayerCache]:
    if eps <= 0:
        raise ConfigurationError(f"eps must be > 0, got {eps}")
    mean = H.mean(axis=axis, keepdims=True)
    centered = H - mean
    var = np.mean(centered * centered, axis=axis, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    shape = [1] * H.ndim
    shape[axis] = H.shape[axis]
    g = gamma.reshape(shape)
    out = xhat * g + beta.reshape(shape)
    return out, {"xhat": xhat, "inv_std": inv_std, "gamma": g, "axis": axis}


def _normalize_backward(dout: np.ndarray, cache: LayerCache):
    xhat, inv_std, g, axis = cache["xhat"], cache["inv_std"], cache["gamma"], cache["axis"]
    reduce_axes = tuple(i for i in range(dout.ndim) if i != axis)
    dgamma = np.sum(dout * xhat, axis=reduce_axes)
    dbeta = np.sum(dout, axis=reduce_axes)
    dxhat = dout * g
    n = dout.shape[axis]
    dH = (inv_std / n) * (
        n * dxhat
        - np.sum(dxhat, axis=axis, keepdims=True)
        - xhat * np.sum(dxhat * xhat, axis=axis, keepdims=True)
    )
    return dH, dgamma, dbeta


def layer_norm_d_forward(
    H: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    eps: float = DEFAULT_EPS,
) -> Tuple[np.ndarray, LayerCache]:
    """
    Normalize each (b, t) feature vector to zero mean and unit population variance,
    then apply the feature-wise affine gamma, beta.

    Raises:
        DimensionError: if gamma/beta length differs from d
    """
    d = H.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError(f"gamma/beta must have shape ({d},), got {gamma.shape}/{beta.shape}")
    return _normalize_forward(H, gamma, beta, eps, axis=H.ndim - 1)


def layer_norm_d_backward(dout: np.ndarray, cache: LayerCache):
    """Returns (dH, dgamma, dbeta)."""
    return _normalize_backward(dout, cache)


def layer_norm_t_forward(
    H: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    eps: float = DEFAULT_EPS,
) -> Tuple[np.ndarray, LayerCache]:
    """
    Normalize each (b, j) channel trace over time, then apply the affine over the T axis.

    Raises:
        DimensionError: if gamma/beta length differs from T
    """
    if H.ndim != 3:
        raise DimensionError(f"expected B x T x d, got shape {H.shape}")
    T = H.shape[1]
    if gamma.shape != (T,) or beta.shape != (T,):
        raise DimensionError(f"gamma/beta must have shape ({T},), got {gamma.shape}/{beta.shape}")
    return _normalize_forward(H, gamma, beta, eps, axis=1)


def layer_norm_t_backward(dout: np.ndarray, cache: LayerCache):
    """Returns (dH, dgamma, dbeta)."""
    return _normalize_backward(dout, cache)


# -------------
# Convolution & projection
# -------------

def dwconv1d_forward(
    H: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
) -> Tuple[np.ndarray, LayerCache]:
    """
    Depthwise temporal convolution with "same" zero padding.

    out[b, t, j] = bias[j] + sum_k weights[k, j] * H[b, t + k - (K-1)/2, j]

    Raises:
        ConfigurationError: if K is even
        DimensionError: if weights/bias do not match d
    """
    K, d = weights.shape
    if K % 2 == 0:
        raise ConfigurationError(f"depthwise kernel size must be odd, got {K}")
    if H.shape[-1] != d or bias.shape != (d,):
        raise DimensionError(f"weights {weights.shape} / bias {bias.shape} do not match d={H.shape[-1]}")
    T = H.shape[1]
    half = (K - 1) // 2
    padded = np.pad(H, ((0, 0), (half, half), (0, 0)))
    out = np.broadcast_to(bias, H.shape).copy()
    for k in range(K):
        out += weights[k] * padded[:, k:k + T, :]
    return out, {"padded": padded, "weights": weights}


def dwconv1d_backward(dout: np.ndarray, cache: LayerCache):
    """Returns (dH, dweights, dbias)."""
    padded, weights = cache["padded"], cache["weights"]
    K = weights.shape[0]
    T = dout.shape[1]
    half = (K - 1) // 2
    dweights = np.empty_like(weights)
    dpadded = np.zeros_like(padded)
    for k in range(K):
        dweights[k] = np.sum(dout * padded[:, k:k + T, :], axis=(0, 1))
        dpadded[:, k:k + T, :] += weights[k] * dout
    dbias = np.sum(dout, axis=(0, 1))
    return dpadded[:, half:half + T, :], dweights, dbias


def pointwise_linear_forward(
    H: np.ndarray,
    W: np.ndarray,
    bias: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, LayerCache]:
    """
    Per-time-step channel mixing: out[b, t] = W @ H[b, t] (+ bias).

    Raises:
        DimensionError: if W is not d_out x d_in or bias is not length d_out
    """
    d_out, d_in = W.shape
    if H.shape[-1] != d_in:
        raise DimensionError(f"W expects d_in={d_in}, input has {H.shape[-1]}")
    out = H @ W.T
    if bias is not None:
        if bias.shape != (d_out,):
            raise DimensionError(f"bias must have shape ({d_out},), got {bias.shape}")
        out = out + bias
    return out, {"H": H, "W": W, "has_bias": bias is not None}


def pointwise_linear_backward(dout: np.ndarray, cache: LayerCache):
    """Returns (dH, dW, dbias); dbias is None when the forward had no bias."""
    H, W = cache["H"], cache["W"]
    flat_out = dout.reshape(-1, dout.shape[-1])
    flat_in = H.reshape(-1, H.shape[-1])
    dW = flat_out.T @ flat_in
    dbias = flat_out.sum(axis=0) if cache["has_bias"] else None
    return dout @ W, dW, dbias


# -------------
# Activations
# -------------

def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function, overflow-free for large |x|."""
    return np.exp(-np.logaddexp(0.0, -x))


def activation_forward(x: np.ndarray, kind: str) -> Tuple[np.ndarray, LayerCache]:
    """
    Elementwise ``silu`` (x * sigmoid(x)) or ``sigmoid``.

    Raises:
        ConfigurationError: on an unknown kind
    """
    s = sigmoid(x)
    if kind == "silu":
        return x * s, {"kind": kind, "x": x, "s": s}
    if kind == "sigmoid":
        return s, {"kind": kind, "s": s}
    raise ConfigurationError(f"unknown activation '{kind}'")


def activation_backward(dout: np.ndarray, cache: LayerCache) -> np.ndarray:
    s = cache["s"]
    if cache["kind"] == "silu":
        return dout * s * (1.0 + cache["x"] * (1.0 - s))
    return dout * s * (1.0 - s)


# -------------
# Regularization
# -------------

def dropout_forward(
    x: np.ndarray,
    p: float,
    training: bool,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, LayerCache]:
    """
    Inverted dropout: zero each element with probability p, scale survivors by 1/(1-p).

    Identity in eval mode or when p == 0; the mask comes from ``rng``.

    Raises:
        ConfigurationError: if p is outside [0, 1) or a training mask has no rng
    """
    if not 0.0 <= p < 1.0:
        raise ConfigurationError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x, {"mask": None}
    if rng is None:
        raise ConfigurationError("training-mode dropout needs an rng")
    mask = (rng.random(x.shape) >= p).astype(np.float64) / (1.0 - p)
    return x * mask, {"mask": mask}


def dropout_backward(dout: np.ndarray, cache: LayerCache) -> np.ndarray:
    mask = cache["mask"]
    return dout if mask is None else dout * mask


# -------------
# Initialization
# -------------

def init_uniform_fan_in(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    """Uniform in +-sqrt(1/fan_in)."""
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)

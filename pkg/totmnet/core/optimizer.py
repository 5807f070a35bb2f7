"""Adam with bias correction, decoupled weight decay and global-norm clipping"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..models.config_models import TrainConfig
from .errors import ConfigurationError
from .network import ModelParams, is_tied_row


@dataclass
class AdamState:
    """First and second moment estimates, keyed like the parameters"""
    m: ModelParams = field(default_factory=ModelParams)
    v: ModelParams = field(default_factory=ModelParams)

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(m=params.zeros_like(), v=params.zeros_like())


def global_grad_norm(grads: ModelParams) -> float:
    """L2 norm over all gradients; the tied r[0] entries are counted once, through c[0]."""
    total = 0.0
    for path, g in grads.items():
        free = g[1:] if is_tied_row(path) else g
        total += float(np.sum(free * free))
    return float(np.sqrt(total))


def adam_step(
    params: ModelParams,
    grads: ModelParams,
    state: AdamState,
    cfg: TrainConfig,
    step_index: int,
    max_lag: Optional[int] = None,
) -> float:
    """
    One in-place Adam update of ``params`` and ``state``.

        m <- b1 m + (1 - b1) g
        v <- b2 v + (1 - b2) g^2
        p <- p - lr (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps) - lr wd p

    Gradients are rescaled first when their global norm exceeds grad_clip.
    Kernels are re-tied (r[0] = c[0]) afterwards.

    Returns:
        the pre-clipping global gradient norm

    Raises:
        ConfigurationError: if the gradient or state paths differ from the parameter paths
    """
    if step_index < 1:
        raise ConfigurationError(f"step_index must be >= 1, got {step_index}")
    paths = params.paths()
    for name, other in (("gradient", grads), ("moment", state.m), ("moment", state.v)):
        if other.paths() != paths:
            missing = sorted(set(paths) ^ set(other.paths()))
            raise ConfigurationError(f"{name} paths do not match parameters: {missing[:3]}")

    norm = global_grad_norm(grads)
    scale = 1.0
    if cfg.grad_clip is not None and norm > cfg.grad_clip:
        scale = cfg.grad_clip / norm

    beta1, beta2 = cfg.betas
    correction1 = 1.0 - beta1 ** step_index
    correction2 = 1.0 - beta2 ** step_index
    for path in paths:
        g = grads[path] * scale
        m = state.m[path]
        v = state.v[path]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p = params[path]
        if cfg.weight_decay:
            p -= cfg.lr * cfg.weight_decay * p
        p -= cfg.lr * (m / correction1) / (np.sqrt(v / correction2) + cfg.adam_eps)

    params.sync_kernels(max_lag)
    return norm

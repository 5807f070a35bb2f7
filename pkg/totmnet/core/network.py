"""ToTMNet assembly: framewise stem, gated local-global mixer blocks, normalized linear head.

Parameters live in a flat ``ModelParams`` registry keyed by hierarchical path
(``stem.weight``, ``block.0.toeplitz.c``, ``head.bias`` ...). The backward pass
is a hand-written reverse traversal of the fixed block graph.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..models.config_models import ModelConfig, Variant
from .errors import ConfigurationError, DimensionError
from .nn import (
    LayerCache,
    activation_backward,
    activation_forward,
    dropout_backward,
    dropout_forward,
    dwconv1d_backward,
    dwconv1d_forward,
    init_uniform_fan_in,
    layer_norm_d_backward,
    layer_norm_d_forward,
    layer_norm_t_backward,
    layer_norm_t_forward,
    pointwise_linear_backward,
    pointwise_linear_forward,
)
from .toeplitz import ToeplitzKernel, toeplitz_mix, toeplitz_mix_backward

FRAME_CHANNELS = 3

LOCAL_PATHS = (
    "norm1.gamma",
    "norm1.beta",
    "dwconv.weight",
    "dwconv.bias",
    "pw.weight",
    "pw.bias",
)
GLOBAL_PATHS = ("norm_t.gamma", "norm_t.beta", "toeplitz.c", "toeplitz.r")
GATE_PATHS = ("gate.weight", "gate.bias")
MLP_PATHS = ("norm2.gamma", "norm2.beta", "mlp.w1", "mlp.w2")


def block_prefix(index: int) -> str:
    return f"block.{index}."


def is_tied_row(path: str) -> bool:
    """True for Toeplitz first-row paths, whose element 0 mirrors the column."""
    return path.split(".")[-2:] == ["toeplitz", "r"]


class ModelParams:
    """
    Ordered registry of parameter arrays addressed by hierarchical path.

    Gradients use the same container, so optimizer state, checkpoints and
    finite-difference checks all iterate the same paths in the same order.
    """

    def __init__(self, tensors: Optional[Dict[str, np.ndarray]] = None):
        self.tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for path, value in (tensors or {}).items():
            self.tensors[path] = np.asarray(value, dtype=np.float64)

    def __getitem__(self, path: str) -> np.ndarray:
        return self.tensors[path]

    def __setitem__(self, path: str, value: np.ndarray) -> None:
        self.tensors[path] = np.asarray(value, dtype=np.float64)

    def __contains__(self, path: str) -> bool:
        return path in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def paths(self) -> List[str]:
        return list(self.tensors)

    def copy(self) -> "ModelParams":
        return ModelParams({path: value.copy() for path, value in self.tensors.items()})

    def zeros_like(self) -> "ModelParams":
        return ModelParams({path: np.zeros_like(value) for path, value in self.tensors.items()})

    def kernel(self, index: int, max_lag: Optional[int] = None) -> ToeplitzKernel:
        """Kernel view over block ``index``'s stored column/row (re-synchronized in place)."""
        prefix = block_prefix(index)
        return ToeplitzKernel(self[prefix + "toeplitz.c"], self[prefix + "toeplitz.r"], max_lag)

    def sync_kernels(self, max_lag: Optional[int] = None) -> None:
        """Re-enforce r[0] == c[0] (and truncation) in every block kernel."""
        index = 0
        while block_prefix(index) + "norm1.gamma" in self:
            if block_prefix(index) + "toeplitz.c" in self:
                self.kernel(index, max_lag)
            index += 1

    def free_parameter_count(self) -> int:
        """Independent scalars: every element, minus one tied entry per Toeplitz row."""
        total = 0
        for path, value in self.tensors.items():
            total += value.size - (1 if is_tied_row(path) else 0)
        return total


# -------------
# Layout, init and counting
# -------------

def block_param_names(variant: Variant) -> Tuple[str, ...]:
    names = LOCAL_PATHS
    if variant != Variant.local_only:
        names = names + GLOBAL_PATHS
    if variant == Variant.full:
        names = names + GATE_PATHS
    return names + MLP_PATHS


def expected_shapes(config: ModelConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """Every parameter path of ``config`` with its shape, in registry order."""
    d, T, K, h = config.d, config.T, config.K, config.hidden_dim
    stem_in = FRAME_CHANNELS * config.pool_grid ** 2
    per_block = {
        "norm1.gamma": (d,),
        "norm1.beta": (d,),
        "dwconv.weight": (K, d),
        "dwconv.bias": (d,),
        "pw.weight": (d, d),
        "pw.bias": (d,),
        "norm_t.gamma": (T,),
        "norm_t.beta": (T,),
        "toeplitz.c": (T,),
        "toeplitz.r": (T,),
        "gate.weight": (d, d),
        "gate.bias": (d,),
        "norm2.gamma": (d,),
        "norm2.beta": (d,),
        "mlp.w1": (h, d),
        "mlp.w2": (d, h),
    }
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    shapes["stem.weight"] = (d, stem_in)
    shapes["stem.bias"] = (d,)
    for index in range(config.L):
        for name in block_param_names(config.variant):
            shapes[block_prefix(index) + name] = per_block[name]
    shapes["head.norm.gamma"] = (d,)
    shapes["head.norm.beta"] = (d,)
    shapes["head.weight"] = (d,)
    shapes["head.bias"] = (1,)
    return shapes


def init_params(config: ModelConfig, seed: int = 0) -> ModelParams:
    """
    Seeded initialization: fan-in uniform weights, zero biases, unit norm gains,
    near-identity Toeplitz kernels.
    """
    rng = np.random.default_rng(seed)
    params = ModelParams()
    for path, shape in expected_shapes(config).items():
        leaf = path.rsplit(".", 2)[-2:]
        name = ".".join(leaf)
        if name.endswith("gamma"):
            params[path] = np.ones(shape)
        elif name.endswith("beta") or name.endswith("bias"):
            params[path] = np.zeros(shape)
        elif name == "toeplitz.c":
            kernel = ToeplitzKernel.initialize(
                config.T, rng, sigma=config.kernel_init_sigma, max_lag=config.max_lag
            )
            params[path] = kernel.c
            params[path[:-1] + "r"] = kernel.r
        elif name == "toeplitz.r":
            continue
        elif name == "dwconv.weight":
            params[path] = init_uniform_fan_in(rng, shape, fan_in=config.K)
        elif name == "head.weight":
            params[path] = init_uniform_fan_in(rng, shape, fan_in=config.d)
        else:
            params[path] = init_uniform_fan_in(rng, shape, fan_in=shape[1])
    # registry order must match expected_shapes even though r is produced with c
    ordered = ModelParams()
    for path in expected_shapes(config):
        ordered[path] = params[path]
    return ordered


@dataclass
class ParamCount:
    """Closed-form parameter count with a per-component breakdown"""
    total: int
    components: Dict[str, int]


def param_count(config: ModelConfig) -> ParamCount:
    """
    Closed-form count. Per block: 2d (LN_d) + Kd+d (DWConv) + d^2+d (PW)
    + 2T (LN_T) + 2T-1 (Toeplitz) + d^2+d (gate) + 2d (LN_d) + 2dh (MLP);
    the global terms drop for local_only and the gate for no_gate.
    """
    d, T, K, h, P = config.d, config.T, config.K, config.hidden_dim, config.pool_grid
    components: Dict[str, int] = OrderedDict()
    components["stem"] = FRAME_CHANNELS * P * P * d + d
    block = OrderedDict()
    block["norm1"] = 2 * d
    block["dwconv"] = K * d + d
    block["pw"] = d * d + d
    if config.variant != Variant.local_only:
        block["norm_t"] = 2 * T
        block["toeplitz"] = 2 * T - 1
    if config.variant == Variant.full:
        block["gate"] = d * d + d
    block["norm2"] = 2 * d
    block["mlp"] = 2 * d * h
    for name, count in block.items():
        components[f"blocks.{name}"] = config.L * count
    components["head"] = 2 * d + d + 1
    return ParamCount(total=sum(components.values()), components=dict(components))


def validate_params(params: ModelParams, config: ModelConfig) -> None:
    """
    Raises:
        ConfigurationError: if any path is missing, unexpected, or mis-shaped
    """
    shapes = expected_shapes(config)
    for path, shape in shapes.items():
        if path not in params:
            raise ConfigurationError(f"missing parameter '{path}' for variant {config.variant.value}")
        if params[path].shape != shape:
            raise ConfigurationError(f"parameter '{path}' has shape {params[path].shape}, expected {shape}")
    extra = [path for path in params if path not in shapes]
    if extra:
        raise ConfigurationError(f"unexpected parameter '{extra[0]}' for variant {config.variant.value}")


# -------------
# Stem
# -------------

def stem_forward(
    X: np.ndarray,
    params: ModelParams,
    config: ModelConfig,
) -> Tuple[np.ndarray, LayerCache]:
    """
    Per frame: mean-pool each colour channel over a P x P grid, project the
    3P^2 cell means to d features, apply SiLU.

    Raises:
        DimensionError: if X is not B x T x 3 x H x W
        ConfigurationError: if H or W is not divisible by P
    """
    if X.ndim != 5 or X.shape[2] != FRAME_CHANNELS:
        raise DimensionError(f"expected clip shape B x T x 3 x H x W, got {X.shape}")
    B, T, C, H, W = X.shape
    P = config.pool_grid
    if H % P or W % P:
        raise ConfigurationError(f"frame size {H}x{W} not divisible by pooling grid {P}")
    cells = X.reshape(B, T, C, P, H // P, P, W // P).mean(axis=(4, 6))
    pooled = cells.reshape(B, T, C * P * P)
    pre, lin_cache = pointwise_linear_forward(pooled, params["stem.weight"], params["stem.bias"])
    Z, act_cache = activation_forward(pre, "silu")
    return Z, {"linear": lin_cache, "act": act_cache, "x_shape": X.shape, "grid": P}


def stem_backward(dZ: np.ndarray, cache: LayerCache, grads: ModelParams) -> np.ndarray:
    """Accumulates stem grads into ``grads``; returns dX."""
    dpre = activation_backward(dZ, cache["act"])
    dpooled, dW, db = pointwise_linear_backward(dpre, cache["linear"])
    grads["stem.weight"] = dW
    grads["stem.bias"] = db
    B, T, C, H, W = cache["x_shape"]
    P = cache["grid"]
    ch, cw = H // P, W // P
    dcells = dpooled.reshape(B, T, C, P, 1, P, 1) / (ch * cw)
    dX = np.broadcast_to(dcells, (B, T, C, P, ch, P, cw)).reshape(B, T, C, H, W)
    return np.ascontiguousarray(dX)


# -------------
# Mixer block
# -------------

def block_params(params: ModelParams, index: int) -> Dict[str, np.ndarray]:
    """Short-name view (``pw.weight`` ...) of block ``index``'s arrays."""
    prefix = block_prefix(index)
    return {path[len(prefix):]: value for path, value in params.items() if path.startswith(prefix)}


def _check_block_variant(bp: Dict[str, np.ndarray], variant: Variant) -> None:
    expected = set(block_param_names(variant))
    present = set(bp)
    if present != expected:
        missing = sorted(expected - present)
        extra = sorted(present - expected)
        raise ConfigurationError(
            f"block parameters do not match variant {variant.value}: missing={missing} unexpected={extra}"
        )


def mixer_block_forward(
    H: np.ndarray,
    bp: Dict[str, np.ndarray],
    config: ModelConfig,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, LayerCache]:
    """
    One gated local-global mixer block.

        Ht  = LN_d(H)
        U   = PW(SiLU(DWConv_K(Ht)))
        V   = ToeplitzMix(LN_T(Ht))
        G   = sigmoid(Ht W_g^T + b_g)
        mid = H + U + G * V          (no_gate: H + U + V; local_only: H + U)
        out = mid + W2 SiLU(W1 LN_d(mid))

    Raises:
        ConfigurationError: if ``bp`` does not hold exactly the variant's parameters
    """
    variant = config.variant
    _check_block_variant(bp, variant)
    eps = config.ln_eps
    cache: LayerCache = {"variant": variant}

    Ht, cache["norm1"] = layer_norm_d_forward(H, bp["norm1.gamma"], bp["norm1.beta"], eps)
    local, cache["dwconv"] = dwconv1d_forward(Ht, bp["dwconv.weight"], bp["dwconv.bias"])
    local, cache["local_act"] = activation_forward(local, "silu")
    U, cache["pw"] = pointwise_linear_forward(local, bp["pw.weight"], bp["pw.bias"])

    mid = H + U
    if variant != Variant.local_only:
        kernel = ToeplitzKernel(bp["toeplitz.c"], bp["toeplitz.r"], config.max_lag)
        Qn, cache["norm_t"] = layer_norm_t_forward(Ht, bp["norm_t.gamma"], bp["norm_t.beta"], eps)
        V = toeplitz_mix(Qn, kernel)
        cache["kernel"], cache["Q"], cache["V"] = kernel, Qn, V
        if variant == Variant.full:
            logits, cache["gate_linear"] = pointwise_linear_forward(Ht, bp["gate.weight"], bp["gate.bias"])
            G, cache["gate_act"] = activation_forward(logits, "sigmoid")
            cache["G"] = G
            mid = mid + G * V
        else:
            mid = mid + V

    Hm, cache["norm2"] = layer_norm_d_forward(mid, bp["norm2.gamma"], bp["norm2.beta"], eps)
    hidden, cache["mlp_in"] = pointwise_linear_forward(Hm, bp["mlp.w1"])
    hidden, cache["mlp_act"] = activation_forward(hidden, "silu")
    hidden, cache["dropout"] = dropout_forward(hidden, config.dropout_p, training, rng)
    M, cache["mlp_out"] = pointwise_linear_forward(hidden, bp["mlp.w2"])
    return mid + M, cache


def mixer_block_backward(dout: np.ndarray, cache: LayerCache) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Returns (dH, short-name grads)."""
    variant = cache["variant"]
    grads: Dict[str, np.ndarray] = {}

    dhidden, grads["mlp.w2"], _ = pointwise_linear_backward(dout, cache["mlp_out"])
    dhidden = dropout_backward(dhidden, cache["dropout"])
    dhidden = activation_backward(dhidden, cache["mlp_act"])
    dHm, grads["mlp.w1"], _ = pointwise_linear_backward(dhidden, cache["mlp_in"])
    dmid_norm, grads["norm2.gamma"], grads["norm2.beta"] = layer_norm_d_backward(dHm, cache["norm2"])
    dmid = dout + dmid_norm

    dH = dmid.copy()
    dHt = np.zeros_like(dmid)

    if variant != Variant.local_only:
        if variant == Variant.full:
            G = cache["G"]
            dV = dmid * G
            dlogits = activation_backward(dmid * cache["V"], cache["gate_act"])
            dHt_gate, grads["gate.weight"], grads["gate.bias"] = pointwise_linear_backward(
                dlogits, cache["gate_linear"]
            )
            dHt += dHt_gate
        else:
            dV = dmid
        dQn, dc, dr = toeplitz_mix_backward(dV, cache["Q"], cache["kernel"])
        grads["toeplitz.c"], grads["toeplitz.r"] = dc, dr
        dHt_global, grads["norm_t.gamma"], grads["norm_t.beta"] = layer_norm_t_backward(dQn, cache["norm_t"])
        dHt += dHt_global

    dlocal, grads["pw.weight"], grads["pw.bias"] = pointwise_linear_backward(dmid, cache["pw"])
    dlocal = activation_backward(dlocal, cache["local_act"])
    dHt_local, grads["dwconv.weight"], grads["dwconv.bias"] = dwconv1d_backward(dlocal, cache["dwconv"])
    dHt += dHt_local

    dH_norm, grads["norm1.gamma"], grads["norm1.beta"] = layer_norm_d_backward(dHt, cache["norm1"])
    return dH + dH_norm, grads


# -------------
# Full network
# -------------

@dataclass
class NetworkCache:
    """Forward intermediates for ``model_backward``"""
    stem: LayerCache
    blocks: List[LayerCache]
    head_norm: LayerCache
    head_input: np.ndarray
    head_weight: np.ndarray
    gate_means: List[float] = field(default_factory=list)


def forward_pass(
    X: np.ndarray,
    params: ModelParams,
    config: ModelConfig,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, NetworkCache]:
    """
    Stem, L blocks, head; returns (S, cache) with S of shape B x T.

    s[b, t] = w_out . LN_d(H_L)[b, t] + b_out

    Raises:
        DimensionError: if the clip length differs from config.T
        ConfigurationError: if the parameter set does not match the config
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 5 or X.shape[1] != config.T:
        raise DimensionError(f"expected B x {config.T} x 3 x H x W clip, got {X.shape}")
    H, stem_cache = stem_forward(X, params, config)
    block_caches: List[LayerCache] = []
    gate_means: List[float] = []
    for index in range(config.L):
        H, block_cache = mixer_block_forward(H, block_params(params, index), config, training, rng)
        block_caches.append(block_cache)
        if "G" in block_cache:
            gate_means.append(float(block_cache["G"].mean()))
    Hn, head_cache = layer_norm_d_forward(H, params["head.norm.gamma"], params["head.norm.beta"], config.ln_eps)
    S = Hn @ params["head.weight"] + params["head.bias"][0]
    cache = NetworkCache(
        stem=stem_cache,
        blocks=block_caches,
        head_norm=head_cache,
        head_input=Hn,
        head_weight=params["head.weight"],
        gate_means=gate_means,
    )
    return S, cache


def model_forward(
    X: np.ndarray,
    params: ModelParams,
    config: ModelConfig,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Predicted waveform S (B x T); no intermediates are kept."""
    S, _ = forward_pass(X, params, config, training, rng)
    return S


def model_backward(dS: np.ndarray, cache: NetworkCache) -> ModelParams:
    """Gradients of every parameter path for upstream gradient dS (B x T)."""
    grads = ModelParams()
    grads["head.weight"] = np.einsum("bt,btd->d", dS, cache.head_input)
    grads["head.bias"] = np.array([dS.sum()])
    dHn = dS[..., None] * cache.head_weight
    dH, grads["head.norm.gamma"], grads["head.norm.beta"] = layer_norm_d_backward(dHn, cache.head_norm)

    block_grads: List[Dict[str, np.ndarray]] = [None] * len(cache.blocks)
    for index in reversed(range(len(cache.blocks))):
        dH, block_grads[index] = mixer_block_backward(dH, cache.blocks[index])

    stem_backward(dH, cache.stem, grads)

    # registry order: stem, blocks, head
    ordered = ModelParams()
    ordered["stem.weight"] = grads["stem.weight"]
    ordered["stem.bias"] = grads["stem.bias"]
    for index, bgrads in enumerate(block_grads):
        variant = cache.blocks[index]["variant"]
        for name in block_param_names(variant):
            ordered[block_prefix(index) + name] = bgrads[name]
    for path in ("head.norm.gamma", "head.norm.beta", "head.weight", "head.bias"):
        ordered[path] = grads[path]
    return ordered

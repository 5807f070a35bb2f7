"""Fast oracle suites: every fast-path computation against a slow or analytic reference"""

import logging
import time
from collections import OrderedDict
from typing import Callable, Dict, List, Optional

import numpy as np

from ..core.errors import ConfigurationError
from ..core.fft import convolve_naive, dft_naive, fft_forward, fft_inverse, linear_convolve
from ..core.heart_rate import estimate_hr_fft
from ..core.losses import combined_loss, mse_loss, pearson_loss, spectral_loss
from ..core.network import (
    ModelParams,
    block_params,
    forward_pass,
    init_params,
    is_tied_row,
    mixer_block_backward,
    mixer_block_forward,
    model_backward,
    model_forward,
    param_count,
)
from ..core.nn import (
    activation_backward,
    activation_forward,
    dwconv1d_backward,
    dwconv1d_forward,
    layer_norm_d_backward,
    layer_norm_d_forward,
    layer_norm_t_backward,
    layer_norm_t_forward,
    pointwise_linear_backward,
    pointwise_linear_forward,
)
from ..core.toeplitz import ToeplitzKernel, toeplitz_mix, toeplitz_mix_backward, toeplitz_mix_dense
from ..models.config_models import LossConfig, ModelConfig, StftConfig, Variant
from ..models.output_models import SuiteResult
from ..tools.gradcheck_tools import check_gradients

logger = logging.getLogger(__name__)

LAYER_TOL = 1e-6
MODEL_TOL = 1e-5
FAULTS = ("adjoint",)


def _skip_tied(name: str, idx: tuple) -> bool:
    return is_tied_row(name) and idx == (0,)


# -------------
# Gradient checks (also used by the tests)
# -------------

def toeplitz_gradient_errors(
    rng: np.random.Generator,
    T: int = 7,
    max_lag: Optional[int] = None,
    backward: Callable = toeplitz_mix_backward,
) -> Dict[str, float]:
    """FD vs analytic for Q, c and r through sum(W * ToeplitzMix(Q))."""
    Q = rng.normal(size=(2, T, 3))
    c, r = rng.normal(size=T), rng.normal(size=T)
    W = rng.normal(size=Q.shape)
    kernel = ToeplitzKernel(c, r, max_lag)
    dQ, dc, dr = backward(W, Q, kernel)

    def f() -> float:
        return float(np.sum(W * toeplitz_mix(Q, ToeplitzKernel(c, r, max_lag))))

    skip = _skip_tied
    if max_lag is not None:
        def skip(name, idx):
            return _skip_tied(name, idx) or (name != "Q" and idx[0] > max_lag)
    return check_gradients(f, {"Q": Q, "toeplitz.c": c, "toeplitz.r": r}, {"Q": dQ, "toeplitz.c": dc, "toeplitz.r": dr}, skip=skip)


def layer_gradient_errors(rng: np.random.Generator) -> Dict[str, float]:
    """FD checks for every individual layer on small random inputs."""
    errors: Dict[str, float] = {}
    H = rng.normal(size=(2, 6, 4))
    W = rng.normal(size=H.shape)

    for label, fwd, bwd, gamma_len in (
        ("layer_norm_d", layer_norm_d_forward, layer_norm_d_backward, 4),
        ("layer_norm_t", layer_norm_t_forward, layer_norm_t_backward, 6),
    ):
        gamma, beta = rng.normal(size=gamma_len), rng.normal(size=gamma_len)
        _, cache = fwd(H, gamma, beta)
        grads = dict(zip(("H", "gamma", "beta"), bwd(W, cache)))
        tensors = {"H": H, "gamma": gamma, "beta": beta}
        errs = check_gradients(lambda: float(np.sum(W * fwd(H, gamma, beta)[0])), tensors, grads)
        errors.update({f"{label}.{k}": v for k, v in errs.items()})

    weights, bias = rng.normal(size=(3, 4)), rng.normal(size=4)
    _, cache = dwconv1d_forward(H, weights, bias)
    grads = dict(zip(("H", "weight", "bias"), dwconv1d_backward(W, cache)))
    errs = check_gradients(
        lambda: float(np.sum(W * dwconv1d_forward(H, weights, bias)[0])),
        {"H": H, "weight": weights, "bias": bias},
        grads,
    )
    errors.update({f"dwconv.{k}": v for k, v in errs.items()})

    Wl, bl = rng.normal(size=(5, 4)), rng.normal(size=5)
    Wout = rng.normal(size=(2, 6, 5))
    _, cache = pointwise_linear_forward(H, Wl, bl)
    grads = dict(zip(("H", "weight", "bias"), pointwise_linear_backward(Wout, cache)))
    errs = check_gradients(
        lambda: float(np.sum(Wout * pointwise_linear_forward(H, Wl, bl)[0])),
        {"H": H, "weight": Wl, "bias": bl},
        grads,
    )
    errors.update({f"pointwise.{k}": v for k, v in errs.items()})

    for kind in ("silu", "sigmoid"):
        _, cache = activation_forward(H, kind)
        dH = activation_backward(W, cache)
        errs = check_gradients(lambda: float(np.sum(W * activation_forward(H, kind)[0])), {"H": H}, {"H": dH})
        errors[f"{kind}.H"] = errs["H"]
    return errors


def _randomize(arrays, rng: np.random.Generator, scale: float = 0.5) -> None:
    for value in arrays:
        value[...] = rng.normal(0.0, scale, size=value.shape)


def block_gradient_errors(
    rng: np.random.Generator,
    variant: Variant = Variant.full,
    B: int = 2,
    T: int = 12,
    d: int = 8,
) -> Dict[str, float]:
    """FD checks for one mixer block: every parameter plus the input."""
    cfg = ModelConfig(d=d, L=1, K=3, mlp_ratio=2.0, dropout_p=0.0, T=T, pool_grid=1, variant=variant)
    params = init_params(cfg, seed=int(rng.integers(1 << 31)))
    bp = block_params(params, 0)
    _randomize(bp.values(), rng)
    H = rng.normal(size=(B, T, d))
    W = rng.normal(size=H.shape)
    _, cache = mixer_block_forward(H, bp, cfg)
    dH, grads = mixer_block_backward(W, cache)
    grads["H"] = dH

    def f() -> float:
        return float(np.sum(W * mixer_block_forward(H, bp, cfg)[0]))

    return check_gradients(f, {"H": H, **bp}, grads, skip=_skip_tied)


def model_gradient_errors(
    rng: np.random.Generator,
    variant: Variant = Variant.full,
    max_elements: Optional[int] = None,
) -> Dict[str, float]:
    """FD check of every parameter of a tiny model (d=4, L=2, T=8, 6x6 frames)."""
    cfg = ModelConfig(d=4, L=2, K=3, mlp_ratio=2.0, dropout_p=0.0, T=8, pool_grid=3, variant=variant)
    params = init_params(cfg, seed=int(rng.integers(1 << 31)))
    _randomize([value for _, value in params.items()], rng)
    params.sync_kernels()
    X = rng.normal(size=(2, 8, 3, 6, 6))
    W = rng.normal(size=(2, 8))
    _, cache = forward_pass(X, params, cfg)
    grads = model_backward(W, cache)

    def f() -> float:
        return float(np.sum(W * model_forward(X, params, cfg)))

    return check_gradients(f, params.tensors, grads.tensors, skip=_skip_tied, max_elements=max_elements)


def loss_gradient_errors(rng: np.random.Generator) -> Dict[str, float]:
    """FD checks of the three loss terms and their weighted sum (T=16, fs=4 Hz)."""
    cfg = LossConfig(stft=StftConfig(window_len=8, hop=4, band=(0.75, 1.9)))
    fs = 4.0
    pred, ref = rng.normal(size=(2, 16)), rng.normal(size=(2, 16))
    errors: Dict[str, float] = {}
    terms = {
        "mse": lambda: mse_loss(pred, ref),
        "pearson": lambda: pearson_loss(pred, ref, cfg.eps),
        "spectral": lambda: spectral_loss(pred, ref, cfg, fs),
        "combined": lambda: combined_loss(pred, ref, cfg, fs)[:2],
    }
    for name, term in terms.items():
        _, grad = term()
        errs = check_gradients(lambda: term()[0], {"pred": pred}, {"pred": grad})
        errors[name] = errs["pred"]
    return errors


# -------------
# Suites
# -------------

def suite_fft(rng: np.random.Generator) -> str:
    for _ in range(40):
        n = 1 << int(rng.integers(0, 9))
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        X = fft_forward(x)
        if n <= 64 and np.max(np.abs(X - dft_naive(x))) > 1e-9 * max(1.0, np.max(np.abs(X))):
            raise AssertionError(f"fft differs from naive DFT at N={n}")
        if np.max(np.abs(fft_inverse(X) - x)) > 1e-12 * max(1.0, np.max(np.abs(x))):
            raise AssertionError(f"round trip failed at N={n}")
        energy = np.sum(np.abs(x) ** 2)
        if abs(np.sum(np.abs(X) ** 2) / n - energy) > 1e-10 * energy:
            raise AssertionError(f"Parseval failed at N={n}")
        a, b = rng.normal(size=int(rng.integers(1, 40))), rng.normal(size=int(rng.integers(1, 40)))
        if np.max(np.abs(linear_convolve(a, b) - convolve_naive(a, b))) > 1e-10 * max(1.0, np.sum(np.abs(a)) * np.max(np.abs(b))):
            raise AssertionError(f"convolution mismatch for lengths {a.size}, {b.size}")
    return "40 random cases"


def suite_toeplitz(rng: np.random.Generator) -> str:
    lengths = (1, 2, 3, 5, 8, 16, 37)
    for T in lengths:
        for max_lag in (None, max(0, T // 3)):
            kernel = ToeplitzKernel(rng.normal(size=T), rng.normal(size=T), max_lag)
            Q = rng.normal(size=(2, T, 3))
            if np.max(np.abs(toeplitz_mix(Q, kernel) - toeplitz_mix_dense(Q, kernel))) > 1e-10:
                raise AssertionError(f"fft mixing differs from dense at T={T}, max_lag={max_lag}")
            V = rng.normal(size=Q.shape)
            lhs = np.sum(toeplitz_mix(Q, kernel) * V)
            rhs = np.sum(Q * toeplitz_mix_backward(V, Q, kernel)[0])
            if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs)):
                raise AssertionError(f"adjoint identity failed at T={T}")
    return f"T in {lengths}"


def suite_gradients(rng: np.random.Generator, inject_fault: Optional[str] = None) -> str:
    backward = toeplitz_mix_backward
    if inject_fault == "adjoint":
        def backward(dV, Q, kernel):
            # wrong adjoint: applies A instead of A^T
            _, dc, dr = toeplitz_mix_backward(dV, Q, kernel)
            return toeplitz_mix(dV, kernel), dc, dr

    checks = [
        ("toeplitz", toeplitz_gradient_errors(rng, backward=backward), LAYER_TOL),
        ("toeplitz(max_lag)", toeplitz_gradient_errors(rng, T=9, max_lag=3, backward=backward), LAYER_TOL),
        ("layers", layer_gradient_errors(rng), LAYER_TOL),
        ("losses", loss_gradient_errors(rng), MODEL_TOL),
    ]
    for variant in Variant:
        checks.append((f"block[{variant.value}]", block_gradient_errors(rng, variant), LAYER_TOL))
        checks.append((f"model[{variant.value}]", model_gradient_errors(rng, variant), MODEL_TOL))
    for label, errors, tol in checks:
        worst = max(errors, key=errors.get)
        if errors[worst] >= tol:
            raise AssertionError(f"{label}: '{worst}' relative error {errors[worst]:.2e} >= {tol:.0e}")
    return f"{len(checks)} gradient groups"


def suite_losses(rng: np.random.Generator) -> str:
    cfg = LossConfig(stft=StftConfig(window_len=32, hop=8))
    ref = rng.normal(size=(3, 64))
    if mse_loss(ref, ref)[0] != 0.0 or abs(mse_loss(ref + 1.0, ref)[0] - 1.0) > 1e-12:
        raise AssertionError("mse identities failed")
    if abs(pearson_loss(ref, ref)[0]) > 1e-6 or abs(pearson_loss(-ref, ref)[0] - 2.0) > 1e-6:
        raise AssertionError("pearson identities failed")
    if abs(pearson_loss(2.5 * ref + 3.0, ref)[0]) > 1e-6:
        raise AssertionError("pearson affine invariance failed")
    if spectral_loss(ref, ref, cfg, 30.0)[0] != 0.0:
        raise AssertionError("spectral loss of identical signals is nonzero")
    pred = rng.normal(size=ref.shape)
    total, _, terms = combined_loss(pred, ref, cfg, 30.0)
    manual = (
        cfg.lambda_mse * mse_loss(pred, ref)[0]
        + cfg.lambda_rho * pearson_loss(pred, ref, cfg.eps)[0]
        + cfg.lambda_spec * spectral_loss(pred, ref, cfg, 30.0)[0]
    )
    if abs(total - manual) > 1e-12:
        raise AssertionError("combined loss differs from its terms")
    return "identities hold"


def suite_param_count(rng: np.random.Generator) -> str:
    for _ in range(20):
        cfg = ModelConfig(
            d=int(rng.integers(1, 9)),
            L=int(rng.integers(1, 4)),
            K=int(2 * rng.integers(0, 3) + 1),
            mlp_ratio=float(rng.uniform(1.0, 4.0)),
            T=int(rng.integers(1, 24)),
            pool_grid=int(rng.integers(1, 4)),
            variant=Variant(rng.choice([v.value for v in Variant])),
        )
        formula = param_count(cfg).total
        enumerated = init_params(cfg).free_parameter_count()
        if formula != enumerated:
            raise AssertionError(f"formula {formula} != enumeration {enumerated} for {cfg}")
    toeplitz = param_count(ModelConfig(T=180, L=1)).components["blocks.toeplitz"]
    if toeplitz != 359:
        raise AssertionError(f"Toeplitz branch at T=180 has {toeplitz} parameters, expected 359")
    return "20 random configs"


def suite_hr_estimator(rng: np.random.Generator) -> str:
    fs = 30.0
    t = np.arange(300) / fs
    for bpm in (60.0, 72.0, 120.0):
        wave = np.sin(2.0 * np.pi * bpm / 60.0 * t + rng.uniform(0, 2 * np.pi))
        estimate = estimate_hr_fft(wave, fs)
        if abs(estimate - bpm) >= 0.45:
            raise AssertionError(f"estimated {estimate:.3f} bpm for a {bpm} bpm sinusoid")
        for scale in rng.uniform(0.01, 100.0, size=5):
            if estimate_hr_fft(scale * wave, fs) != estimate:
                raise AssertionError("HR estimate changed under amplitude scaling")
    return "60/72/120 bpm"


SUITES: "OrderedDict[str, Callable[..., str]]" = OrderedDict(
    [
        ("fft", suite_fft),
        ("toeplitz", suite_toeplitz),
        ("gradients", suite_gradients),
        ("losses", suite_losses),
        ("param_count", suite_param_count),
        ("hr_estimator", suite_hr_estimator),
    ]
)


def run_checks(inject_fault: Optional[str] = None, seed: int = 0) -> List[SuiteResult]:
    """
    Run every suite; a suite passes when it raises nothing.

    Args:
        inject_fault: "adjoint" swaps in a wrong Toeplitz adjoint for the gradient suite
        seed: seed for the random cases

    Raises:
        ConfigurationError: on an unknown fault name
    """
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ConfigurationError(f"unknown fault '{inject_fault}' (known: {FAULTS})")
    results: List[SuiteResult] = []
    for index, (name, suite) in enumerate(SUITES.items()):
        rng = np.random.default_rng([seed, index])
        start = time.perf_counter()
        try:
            detail = suite(rng, inject_fault) if name == "gradients" else suite(rng)
            passed = True
        except Exception as e:
            logger.error(f"❌ suite {name} failed: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
            detail, passed = str(e), False
        results.append(SuiteResult(name=name, passed=passed, detail=detail, seconds=time.perf_counter() - start))
    return results

"""Central finite-difference checks shared by the tests and the check suite"""

from typing import Callable, Dict, Iterable, Optional

import numpy as np

FD_STEP = 1e-5


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max|a - n| / max(1e-8, max|a| + max|n|), i.e. relative to the tensor scale."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.size == 0:
        return 0.0
    denom = max(1e-8, float(np.max(np.abs(analytic))) + float(np.max(np.abs(numeric))))
    return float(np.max(np.abs(analytic - numeric))) / denom


def numeric_gradient(
    f: Callable[[], float],
    x: np.ndarray,
    step: float = FD_STEP,
    indices: Optional[Iterable[tuple]] = None,
) -> np.ndarray:
    """
    Central differences of scalar ``f`` w.r.t. array ``x``, perturbed in place.

    ``f`` must read ``x`` on every call. Elements not in ``indices`` (when given)
    are left at zero.
    """
    grad = np.zeros_like(x, dtype=np.float64)
    points = indices if indices is not None else np.ndindex(*x.shape)
    for idx in points:
        original = x[idx]
        x[idx] = original + step
        f_plus = f()
        x[idx] = original - step
        f_minus = f()
        x[idx] = original
        grad[idx] = (f_plus - f_minus) / (2.0 * step)
    return grad


def sample_indices(shape: tuple, limit: Optional[int], rng: np.random.Generator) -> Optional[list]:
    """Up to ``limit`` distinct element indices of ``shape`` (all when limit is None)."""
    size = int(np.prod(shape, dtype=np.int64))
    if limit is None or size <= limit:
        return None
    flat = rng.choice(size, size=limit, replace=False)
    return [np.unravel_index(i, shape) for i in sorted(flat)]


def check_gradients(
    f: Callable[[], float],
    tensors: Dict[str, np.ndarray],
    analytic: Dict[str, np.ndarray],
    step: float = FD_STEP,
    skip: Optional[Callable[[str, tuple], bool]] = None,
    max_elements: Optional[int] = None,
    seed: int = 0,
) -> Dict[str, float]:
    """
    Relative error per tensor between analytic gradients and central differences.

    Args:
        f: loss closure reading the arrays in ``tensors``
        tensors: arrays to perturb in place, by name
        analytic: analytic gradients with the same names
        skip: predicate (name, index) for elements excluded from comparison
        max_elements: per-tensor cap on checked elements (random subset)
        seed: seed for the subset draw

    Returns:
        {name: max relative error}
    """
    rng = np.random.default_rng(seed)
    errors: Dict[str, float] = {}
    for name, x in tensors.items():
        indices = sample_indices(x.shape, max_elements, rng)
        if indices is None:
            indices = list(np.ndindex(*x.shape))
        if skip is not None:
            indices = [idx for idx in indices if not skip(name, idx)]
        if not indices:
            continue
        numeric = numeric_gradient(f, x, step, indices)
        picked = tuple(np.array(indices).T)
        errors[name] = relative_error(np.asarray(analytic[name])[picked], numeric[picked])
    return errors

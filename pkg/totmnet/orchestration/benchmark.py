"""Timing of FFT versus dense Toeplitz mixing across sequence lengths"""

import logging
import time
from typing import Callable, Dict, List, Sequence

import numpy as np

from ..core.errors import ConfigurationError, CorrectnessError
from ..core.toeplitz import ToeplitzKernel, toeplitz_mix, toeplitz_mix_dense
from ..models.output_models import BenchRecord

logger = logging.getLogger(__name__)

WARMUP_REPS = 2
AGREEMENT_TOL = 1e-8


def median_time_ns(fn: Callable[[], object], reps: int, warmup: int = WARMUP_REPS) -> int:
    """Median wall time of ``fn`` over ``reps`` calls after ``warmup`` untimed calls."""
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - start)
    return max(1, int(np.median(samples)))


def power_of_two_range(t_min: int, t_max: int) -> List[int]:
    """Powers of two within [t_min, t_max]."""
    if t_min < 2 or t_max < t_min:
        raise ConfigurationError(f"need 2 <= t_min <= t_max, got t_min={t_min}, t_max={t_max}")
    values = []
    t = 1
    while t <= t_max:
        if t >= t_min:
            values.append(t)
        t *= 2
    if not values:
        raise ConfigurationError(f"no power of two in [{t_min}, {t_max}]")
    return values


def run_bench(
    t_values: Sequence[int],
    d: int = 32,
    B: int = 4,
    reps: int = 5,
    seed: int = 0,
) -> List[BenchRecord]:
    """
    Median timings of ``toeplitz_mix`` (fft) and the dense matrix product (dense).

    Both methods run on identical inputs and must agree within 1e-8 before any
    timing for that T is recorded.

    Raises:
        ConfigurationError: if t_values is not ascending or reps < 5
        CorrectnessError: if the two methods disagree
    """
    if reps < 5:
        raise ConfigurationError(f"reps must be >= 5, got {reps}")
    if list(t_values) != sorted(t_values):
        raise ConfigurationError(f"t_values must be ascending, got {list(t_values)}")
    rng = np.random.default_rng(seed)
    records: List[BenchRecord] = []
    for T in t_values:
        kernel = ToeplitzKernel(rng.normal(size=T), rng.normal(size=T))
        Q = rng.normal(size=(B, T, d))
        fast = toeplitz_mix(Q, kernel)
        dense = toeplitz_mix_dense(Q, kernel)
        err = float(np.max(np.abs(fast - dense)))
        if err >= AGREEMENT_TOL * max(1.0, float(np.max(np.abs(dense)))):
            raise CorrectnessError(f"fft and dense mixing disagree at T={T}: max abs diff {err:.3e}")
        methods = {
            "fft": lambda: toeplitz_mix(Q, kernel),
            "dense": lambda: toeplitz_mix_dense(Q, kernel),
        }
        for method, fn in methods.items():
            median_ns = median_time_ns(fn, reps)
            records.append(BenchRecord(T=T, d=d, B=B, method=method, median_ns=median_ns, reps=reps))
            logger.info(f"   ⏱️ T={T} {method}: {median_ns / 1e6:.3f} ms")
    return records


def fit_loglog_slopes(records: Sequence[BenchRecord]) -> Dict[str, float]:
    """Least-squares slope of log(median_ns) against log(T), per method (needs >= 2 points)."""
    slopes: Dict[str, float] = {}
    for method in sorted({r.method for r in records}):
        points = [(r.T, r.median_ns) for r in records if r.method == method]
        if len(points) < 2:
            continue
        logs = np.log(np.asarray(points, dtype=np.float64))
        slopes[method] = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return slopes

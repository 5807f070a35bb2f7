"""Tests for Toeplitz mixing: dense equivalence, adjoint, kernel gradients, truncation"""

import numpy as np
import pytest

from totmnet.core.errors import DimensionError, InvalidLengthError
from totmnet.core.toeplitz import (
    ToeplitzKernel,
    build_dense,
    embed_kernel,
    toeplitz_kernel_grad_dense,
    toeplitz_mix,
    toeplitz_mix_backward,
    toeplitz_mix_dense,
)
from totmnet.orchestration.check_suite import toeplitz_gradient_errors


def test_build_dense_layout():
    kernel = ToeplitzKernel(np.array([1.0, 2.0, 3.0]), np.array([1.0, 4.0, 5.0]))
    expected = [[1, 4, 5], [2, 1, 4], [3, 2, 1]]
    np.testing.assert_array_equal(build_dense(kernel), expected)


def test_diagonal_tie_is_enforced():
    kernel = ToeplitzKernel(np.array([2.0, 1.0]), np.array([9.0, 3.0]))
    assert kernel.r[0] == kernel.c[0] == 2.0
    assert kernel.degrees_of_freedom == 3


def test_fft_path_matches_dense():
    rng = np.random.default_rng(0)
    for T in (1, 2, 3, 5, 8, 16, 37, 180, 257, 1024):
        for _ in range(10):
            kernel = ToeplitzKernel(rng.normal(size=T), rng.normal(size=T))
            Q = rng.normal(size=(2, T, 3))
            diff = np.max(np.abs(toeplitz_mix(Q, kernel) - toeplitz_mix_dense(Q, kernel)))
            assert diff < 1e-10, f"T={T}: {diff}"


def test_identity_and_shift_kernels():
    rng = np.random.default_rng(1)
    Q = rng.normal(size=(1, 4, 2))
    np.testing.assert_allclose(toeplitz_mix(Q, ToeplitzKernel.identity(4)), Q, atol=1e-12)

    c = np.array([0.0, 1.0, 0.0, 0.0])
    shifted = toeplitz_mix(Q, ToeplitzKernel(c, np.zeros(4)))
    np.testing.assert_allclose(shifted[:, 0], 0.0, atol=1e-12)
    np.testing.assert_allclose(shifted[:, 1:], Q[:, :-1], atol=1e-12)


def test_embedding_layout_and_length_check():
    kernel = ToeplitzKernel(np.array([1.0, 2.0, 3.0]), np.array([1.0, 4.0, 5.0]))
    np.testing.assert_array_equal(embed_kernel(kernel, 8), [1, 2, 3, 0, 0, 0, 5, 4])
    with pytest.raises(InvalidLengthError):
        embed_kernel(kernel, 4)


def test_shape_mismatch_raises():
    kernel = ToeplitzKernel.identity(5)
    with pytest.raises(DimensionError):
        toeplitz_mix(np.zeros((1, 4, 2)), kernel)
    with pytest.raises(DimensionError):
        ToeplitzKernel(np.zeros(3), np.zeros(4))


def test_adjoint_identity():
    rng = np.random.default_rng(2)
    for T in (1, 2, 7, 64):
        kernel = ToeplitzKernel(rng.normal(size=T), rng.normal(size=T))
        Q, V = rng.normal(size=(3, T, 4)), rng.normal(size=(3, T, 4))
        dQ, _, _ = toeplitz_mix_backward(V, Q, kernel)
        assert np.sum(toeplitz_mix(Q, kernel) * V) == pytest.approx(np.sum(Q * dQ), rel=1e-10, abs=1e-10)


def test_kernel_gradients_match_dense_oracle():
    rng = np.random.default_rng(3)
    for T in (1, 3, 10, 33):
        kernel = ToeplitzKernel(rng.normal(size=T), rng.normal(size=T))
        Q, dV = rng.normal(size=(2, T, 3)), rng.normal(size=(2, T, 3))
        _, dc, dr = toeplitz_mix_backward(dV, Q, kernel)
        dc_ref, dr_ref = toeplitz_kernel_grad_dense(dV, Q, kernel)
        np.testing.assert_allclose(dc, dc_ref, atol=1e-10)
        np.testing.assert_allclose(dr, dr_ref, atol=1e-10)
        assert dr[0] == dc[0]


def test_gradients_match_finite_differences():
    errors = toeplitz_gradient_errors(np.random.default_rng(4), T=9)
    assert max(errors.values()) < 1e-6, errors


def test_truncated_kernel():
    rng = np.random.default_rng(5)
    T = 12
    c, r = rng.normal(size=T), rng.normal(size=T)
    full = ToeplitzKernel(c.copy(), r.copy())
    window = ToeplitzKernel(c.copy(), r.copy(), max_lag=T - 1)
    Q = rng.normal(size=(1, T, 2))
    np.testing.assert_allclose(toeplitz_mix(Q, window), toeplitz_mix(Q, full), atol=1e-12)

    banded = ToeplitzKernel(c.copy(), r.copy(), max_lag=2)
    dense = build_dense(banded)
    rows, cols = np.indices(dense.shape)
    assert np.all(dense[np.abs(rows - cols) > 2] == 0.0)
    np.testing.assert_allclose(toeplitz_mix(Q, banded), toeplitz_mix_dense(Q, banded), atol=1e-10)

    errors = toeplitz_gradient_errors(np.random.default_rng(6), T=9, max_lag=3)
    assert max(errors.values()) < 1e-6, errors

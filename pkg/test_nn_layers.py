"""Tests for the individual layers: normalization, convolution, projection, activations, dropout"""

import numpy as np
import pytest

from totmnet.core.errors import ConfigurationError, DimensionError
from totmnet.core.nn import (
    activation_forward,
    dropout_backward,
    dropout_forward,
    dwconv1d_forward,
    layer_norm_d_forward,
    layer_norm_t_forward,
    pointwise_linear_forward,
    sigmoid,
)
from totmnet.orchestration.check_suite import layer_gradient_errors


def test_layer_norms_standardize_their_axis():
    rng = np.random.default_rng(0)
    H = rng.normal(3.0, 2.0, size=(2, 10, 6))
    out_d, _ = layer_norm_d_forward(H, np.ones(6), np.zeros(6))
    np.testing.assert_allclose(out_d.mean(axis=-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(out_d.var(axis=-1), 1.0, atol=1e-4)

    out_t, _ = layer_norm_t_forward(H, np.ones(10), np.zeros(10))
    np.testing.assert_allclose(out_t.mean(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(out_t.var(axis=1), 1.0, atol=1e-4)

    with pytest.raises(DimensionError):
        layer_norm_t_forward(H, np.ones(6), np.zeros(6))


def test_feature_norm_ignores_a_per_step_offset():
    rng = np.random.default_rng(7)
    H = rng.normal(size=(2, 9, 5))
    offset = rng.normal(0.0, 3.0, size=(2, 9, 1))
    gamma, beta = np.ones(5), np.zeros(5)
    plain, _ = layer_norm_d_forward(H, gamma, beta)
    shifted, _ = layer_norm_d_forward(H + offset, gamma, beta)
    np.testing.assert_allclose(shifted, plain, atol=1e-10)


def test_dwconv_same_padding():
    rng = np.random.default_rng(1)
    H = rng.normal(size=(2, 7, 3))
    centre = np.zeros((3, 3))
    centre[1] = 1.0
    out, _ = dwconv1d_forward(H, centre, np.zeros(3))
    np.testing.assert_array_equal(out, H)

    previous = np.zeros((3, 3))
    previous[0] = 1.0
    out, _ = dwconv1d_forward(H, previous, np.full(3, 0.5))
    np.testing.assert_allclose(out[:, 1:], H[:, :-1] + 0.5)
    np.testing.assert_allclose(out[:, 0], 0.5)


def test_dwconv_rejects_even_kernel():
    with pytest.raises(ConfigurationError):
        dwconv1d_forward(np.zeros((1, 4, 2)), np.zeros((4, 2)), np.zeros(2))


def test_pointwise_linear_shapes():
    H = np.ones((2, 3, 4))
    out, _ = pointwise_linear_forward(H, np.ones((5, 4)), np.arange(5.0))
    assert out.shape == (2, 3, 5)
    np.testing.assert_allclose(out[0, 0], 4.0 + np.arange(5.0))
    with pytest.raises(DimensionError):
        pointwise_linear_forward(H, np.ones((5, 3)))


def test_activations_are_stable():
    x = np.array([-1000.0, -1.0, 0.0, 1.0, 1000.0])
    s = sigmoid(x)
    assert np.all(np.isfinite(s))
    assert s[2] == pytest.approx(0.5) and s[0] >= 0.0 and s[-1] == 1.0
    silu, _ = activation_forward(x, "silu")
    np.testing.assert_allclose(silu, x * s)
    with pytest.raises(ConfigurationError):
        activation_forward(x, "relu")


def test_dropout_modes():
    rng = np.random.default_rng(2)
    x = np.ones((50, 40, 10))
    same, cache = dropout_forward(x, 0.3, training=False)
    assert same is x
    np.testing.assert_array_equal(dropout_backward(x, cache), x)

    dropped, cache = dropout_forward(x, 0.3, training=True, rng=rng)
    assert set(np.unique(dropped)) <= {0.0, 1.0 / 0.7}
    assert dropped.mean() == pytest.approx(1.0, abs=0.03)
    np.testing.assert_array_equal(dropout_backward(x, cache), dropped)

    with pytest.raises(ConfigurationError):
        dropout_forward(x, 0.3, training=True)
    with pytest.raises(ConfigurationError):
        dropout_forward(x, 1.0, training=False)


def test_layer_gradients_match_finite_differences():
    errors = layer_gradient_errors(np.random.default_rng(3))
    worst = max(errors, key=errors.get)
    assert errors[worst] < 1e-6, f"{worst}: {errors[worst]:.2e}"

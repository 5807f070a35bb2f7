"""Tests for the radix-2 transform, convolution and spectrum helpers"""

import numpy as np
import pytest

from totmnet.core.errors import InvalidLengthError
from totmnet.core.fft import (
    convolve_naive,
    dft_naive,
    fft_forward,
    fft_inverse,
    linear_convolve,
    next_power_of_two,
    power_spectrum,
    rfft_frequencies,
    zero_pad,
)


def test_impulse_and_constant():
    """Unit impulse -> all ones; constant -> energy in bin 0 only"""
    np.testing.assert_allclose(fft_forward([1.0, 0.0, 0.0, 0.0]), np.ones(4), atol=1e-15)
    np.testing.assert_allclose(fft_forward(np.ones(8)), [8.0] + [0.0] * 7, atol=1e-12)


def test_matches_naive_dft():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4, 8, 16, 32, 64):
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        np.testing.assert_allclose(fft_forward(x), dft_naive(x), atol=1e-10)


def test_round_trip_and_parseval():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = 1 << int(rng.integers(0, 11))
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        X = fft_forward(x)
        assert np.max(np.abs(fft_inverse(X) - x)) < 1e-12 * max(1.0, np.max(np.abs(x)))
        energy = np.sum(np.abs(x) ** 2)
        assert abs(np.sum(np.abs(X) ** 2) / n - energy) < 1e-10 * energy


def test_transform_is_vectorized_over_leading_axes():
    rng = np.random.default_rng(2)
    batch = rng.normal(size=(3, 5, 16))
    stacked = fft_forward(batch)
    for i in range(3):
        for j in range(5):
            np.testing.assert_allclose(stacked[i, j], fft_forward(batch[i, j]), atol=1e-12)


def test_linear_convolve_matches_naive():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = rng.normal(size=int(rng.integers(1, 50)))
        b = rng.normal(size=int(rng.integers(1, 50)))
        np.testing.assert_allclose(linear_convolve(a, b), convolve_naive(a, b), atol=1e-10)


def test_linear_convolve_small_example():
    np.testing.assert_allclose(linear_convolve([1, 2], [3, 4]), [3, 10, 8], atol=1e-12)


@pytest.mark.parametrize("n", [0, 3, 6, 12, 100])
def test_non_power_of_two_rejected(n):
    with pytest.raises(InvalidLengthError):
        fft_forward(np.zeros(n))


def test_linear_convolve_rejects_empty():
    with pytest.raises(InvalidLengthError):
        linear_convolve([], [1.0])


def test_power_spectrum_and_frequencies():
    fs, n_fft = 30.0, 64
    t = np.arange(32) / fs
    spectrum = power_spectrum(np.sin(2 * np.pi * 7.5 * t), n_fft)
    freqs = rfft_frequencies(n_fft, fs)
    assert spectrum.shape == freqs.shape == (33,)
    assert freqs[np.argmax(spectrum)] == pytest.approx(7.5)
    with pytest.raises(InvalidLengthError):
        power_spectrum(np.zeros(40), 32)


def test_power_spectrum_keeps_energy():
    rng = np.random.default_rng(5)
    for length, n_fft in ((100, 256), (180, 4096), (64, 64)):
        x = rng.normal(size=length)
        spectrum = power_spectrum(x, n_fft)
        # one-sided bins: DC and Nyquist once, the rest twice
        two_sided = spectrum[0] + spectrum[-1] + 2.0 * np.sum(spectrum[1:-1])
        assert two_sided == pytest.approx(n_fft * np.sum(x ** 2), rel=1e-10)


def test_padding_helpers():
    assert next_power_of_two(1) == 1
    assert next_power_of_two(5) == 8
    assert next_power_of_two(359) == 512
    assert zero_pad(np.ones(3), 4).tolist() == [1.0, 1.0, 1.0, 0.0]
    with pytest.raises(InvalidLengthError):
        zero_pad(np.ones(5), 4)

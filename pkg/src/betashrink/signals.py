"""Donoho-Johnstone test functions and SNR-calibrated Gaussian noise."""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError, DegenerateSignalError, ShapeError
from .wavelets import dyadic_depth

# Knots, heights and widths from Donoho & Johnstone (1994), "Ideal spatial
# adaptation by wavelet shrinkage", as distributed with WaveLab.
KNOTS = np.array([0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
BLOCK_HEIGHTS = np.array([4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
BUMP_HEIGHTS = np.array([4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
BUMP_WIDTHS = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])

SIGNALS = ("bumps", "blocks", "doppler", "heavisine")
DEFAULT_SD = 7.0


def _raw(name: str, x: np.ndarray) -> np.ndarray:
    if name == "bumps":
        z = np.abs((x[:, None] - KNOTS[None, :]) / BUMP_WIDTHS[None, :])
        return ((1.0 + z) ** -4) @ BUMP_HEIGHTS
    if name == "blocks":
        return ((1.0 + np.sign(x[:, None] - KNOTS[None, :])) / 2.0) @ BLOCK_HEIGHTS
    if name == "doppler":
        eps = 0.05
        return np.sqrt(x * (1.0 - x)) * np.sin(2.0 * np.pi * (1.0 + eps) / (x + eps))
    if name == "heavisine":
        return 4.0 * np.sin(4.0 * np.pi * x) - np.sign(x - 0.3) - np.sign(0.72 - x)
    raise ArgumentError(f"unknown test function {name!r}; expected one of {SIGNALS}")


def dj_signal(name: str, n: int, sd: float | None = DEFAULT_SD) -> np.ndarray:
    """Test function ``name`` sampled at x_i = i/n, i = 1..n.

    With ``sd`` set, the samples are multiplied by a positive constant so that
    their population standard deviation equals ``sd`` (the usual benchmark
    scaling); ``sd=None`` returns the unscaled function.
    """
    key = str(name).strip().lower()
    dyadic_depth(int(n))
    x = np.arange(1, n + 1) / n
    f = _raw(key, x)
    if sd is not None:
        f = f * (sd / f.std())
    return f


def noise_sigma(signal, snr: float) -> float:
    """sd(signal) / snr with the population standard deviation."""
    if not snr > 0:
        raise ArgumentError(f"snr must be positive, got {snr}")
    sd = float(np.std(signal))
    if sd == 0.0:
        raise DegenerateSignalError("constant signal has no defined SNR")
    return sd / snr


def add_noise(signal, snr: float, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    f = np.asarray(signal, dtype=float)
    sigma = noise_sigma(f, snr)
    return f + sigma * rng.standard_normal(f.size), sigma


def mse(estimate, truth) -> float:
    est = np.asarray(estimate, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.shape != tru.shape:
        raise ShapeError(f"length mismatch: {est.shape} vs {tru.shape}")
    return float(np.mean((est - tru) ** 2))

"""Spectral helpers for samples on a uniform grid of [0, 2pi)."""
from __future__ import annotations

import numpy as np


def freqs(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def coeffs(samples, axis: int = 0) -> np.ndarray:
    """Fourier coefficients c_k with ``f(t_j) = sum_k c_k exp(i k t_j)``."""
    f = np.asarray(samples)
    return np.fft.fft(f, axis=axis) / f.shape[axis]


def _split_nyquist(c: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (coefficients, frequencies) with the even-n Nyquist term split
    evenly between +n/2 and -n/2 so interpolation stays real for real data."""
    n = c.shape[axis]
    k = freqs(n)
    if n % 2:
        return c, k
    c = np.moveaxis(c, axis, 0)
    half = c[n // 2] / 2
    c = np.concatenate([c[: n // 2], half[None], c[n // 2 + 1 :], half[None]], axis=0)
    k = np.concatenate([k[: n // 2], [n / 2], k[n // 2 + 1 :], [-n / 2]])
    return np.moveaxis(c, 0, axis), k


def derivative(samples, order: int = 1, axis: int = 0) -> np.ndarray:
    """Spectral ``d^order/dt^order``; exact for trigonometric polynomials
    resolved by the grid."""
    f = np.asarray(samples)
    if order == 0:
        return f.astype(complex)
    n = f.shape[axis]
    k = freqs(n)
    if n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0
    mult = (1j * k) ** order
    shape = [1] * f.ndim
    shape[axis] = n
    return np.fft.ifft(np.fft.fft(f, axis=axis) * mult.reshape(shape), axis=axis)


def evaluate(c: np.ndarray, t, axis: int = 0) -> np.ndarray:
    """Evaluate the trigonometric polynomial with grid coefficients ``c`` (as
    returned by :func:`coeffs`) at arbitrary points ``t``.

    The new points replace ``axis`` and are placed first in the output
    (``t.shape + remaining axes``).
    """
    c, k = _split_nyquist(np.asarray(c), axis)
    c = np.moveaxis(c, axis, 0)
    t = np.asarray(t, dtype=float)
    E = np.exp(1j * t[..., None] * k)
    return np.tensordot(E, c, axes=([-1], [0]))


def interpolate(samples, t, axis: int = 0) -> np.ndarray:
    return evaluate(coeffs(samples, axis=axis), t, axis=axis)


def resample(samples, n_new: int, axis: int = 0) -> np.ndarray:
    """Band-limited resampling to ``n_new`` uniform points."""
    f = np.asarray(samples)
    if n_new == f.shape[axis]:
        return f.astype(complex)
    t = 2 * np.pi * np.arange(n_new) / n_new
    out = interpolate(f, t, axis=axis)
    return np.moveaxis(out, 0, axis)


def bandwidth(samples, axis: int = 0, rtol: float = 1e-13) -> int:
    """Largest |k| carrying a coefficient above ``rtol * max``."""
    c = np.abs(coeffs(samples, axis=axis))
    c = np.moveaxis(c, axis, 0).reshape(c.shape[axis], -1).max(axis=1)
    if c.max() == 0:
        return 0
    k = np.abs(freqs(c.size))
    return int(k[c > rtol * c.max()].max())

"""Small helpers for smooth 1-periodic sampled functions.

Everything here works on uniform samples f(i/n), i = 0..n-1, of a smooth
1-periodic real function, so trigonometric interpolation and spectral
differentiation are the natural (and spectrally accurate) tools.
"""

import numpy as np


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """Derivative of a 1-periodic function from its uniform samples."""
    n = len(values)
    c = np.fft.rfft(values)
    k = np.arange(len(c))
    dc = c * (2j * np.pi * k)
    if n % 2 == 0:
        # The Nyquist mode is a pure cosine; its derivative samples vanish.
        dc[-1] = 0.0
    return np.fft.irfft(dc, n)


def spectral_antiderivative(values: np.ndarray) -> np.ndarray:
    """Antiderivative F with F(0) = 0 of a 1-periodic sampled function.

    The mean of ``values`` contributes a linear term mean * t, so the
    result is only periodic when the mean vanishes.
    """
    n = len(values)
    c = np.fft.rfft(values)
    k = np.arange(len(c))
    ic = np.zeros_like(c)
    ic[1:] = c[1:] / (2j * np.pi * k[1:])
    periodic = np.fft.irfft(ic, n)
    t = np.arange(n) / n
    mean = c[0].real / n
    return periodic - periodic[0] + mean * t


def trig_interp(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of uniform samples at points t."""
    n = len(values)
    c = np.fft.rfft(values) / n
    t = np.asarray(t, dtype=float)
    k = np.arange(1, len(c) - 1 if n % 2 == 0 else len(c))
    out = np.full(t.shape, c[0].real)
    if len(k):
        phases = np.exp(2j * np.pi * np.outer(t, k))
        out = out + 2.0 * (phases @ c[k]).real
    if n % 2 == 0:
        out = out + c[-1].real * np.cos(np.pi * n * t)
    return out


def periodic_trapezoid(values: np.ndarray) -> float:
    """Integral over one period of a 1-periodic sampled function.

    On a uniform periodic grid the trapezoid rule reduces to the mean and
    is spectrally accurate for smooth integrands.
    """
    return float(np.mean(values, axis=-1)) if values.ndim == 1 else values.mean(axis=-1)


def fourier_diff_matrix(n: int) -> np.ndarray:
    """Dense spectral differentiation matrix on n uniform periodic points.

    Antisymmetric for even and odd n, which the pseudospectral operator
    assembly relies on.
    """
    j = np.arange(n)
    diff = j[:, None] - j[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        if n % 2 == 0:
            d = 0.5 * (-1.0) ** diff / np.tan(np.pi * diff / n)
        else:
            d = 0.5 * (-1.0) ** diff / np.sin(np.pi * diff / n)
    np.fill_diagonal(d, 0.0)
    # Standard matrix lives on [0, 2*pi); rescale to period 1.
    return 2.0 * np.pi * d

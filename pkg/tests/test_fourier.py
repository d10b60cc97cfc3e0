"""Tests for the periodic spectral helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgsurf.fourier import (
    fourier_diff_matrix,
    periodic_trapezoid,
    spectral_antiderivative,
    spectral_derivative,
    trig_interp,
)


def _grid(n):
    return np.arange(n) / n


def test_spectral_derivative_matches_analytic():
    t = _grid(64)
    f = np.sin(2 * np.pi * t) + 0.3 * np.cos(6 * np.pi * t)
    df = 2 * np.pi * np.cos(2 * np.pi * t) - 1.8 * np.pi * np.sin(6 * np.pi * t)
    assert np.max(np.abs(spectral_derivative(f) - df)) < 1e-12


def test_antiderivative_roundtrip_zero_mean():
    t = _grid(128)
    f = np.cos(4 * np.pi * t) - np.sin(2 * np.pi * t)
    g = spectral_antiderivative(f)
    assert np.max(np.abs(spectral_derivative(g) - f)) < 1e-11


def test_diff_matrix_agrees_with_fft_derivative():
    for n in (32, 33):
        t = _grid(n)
        f = np.exp(np.sin(2 * np.pi * t))
        d = fourier_diff_matrix(n)
        assert np.max(np.abs(d @ f - spectral_derivative(f))) < 1e-10


def test_diff_matrix_antisymmetric():
    for n in (24, 25):
        d = fourier_diff_matrix(n)
        assert np.max(np.abs(d + d.T)) < 1e-12


def test_trig_interp_reproduces_grid_values():
    t = _grid(48)
    f = np.sin(2 * np.pi * t) ** 2 + np.cos(2 * np.pi * t)
    assert np.max(np.abs(trig_interp(f, t) - f)) < 1e-12


def test_trig_interp_off_grid():
    t = _grid(64)
    f = np.cos(4 * np.pi * t)
    tq = np.array([0.1234, 0.777, 0.5 - 1e-3])
    assert np.max(np.abs(trig_interp(f, tq) - np.cos(4 * np.pi * tq))) < 1e-12


def test_periodic_trapezoid_is_exact_for_trig_polys():
    t = _grid(32)
    f = 2.0 + np.sin(2 * np.pi * t) + np.cos(8 * np.pi * t)
    assert periodic_trapezoid(f) == pytest.approx(2.0, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=5))
def test_derivative_of_trig_poly_property(coeffs):
    """d/dt of a low-band trigonometric polynomial is computed exactly."""
    n = 64
    t = _grid(n)
    f = np.zeros(n)
    df = np.zeros(n)
    for k, a in enumerate(coeffs, start=1):
        f += a * np.sin(2 * np.pi * k * t)
        df += a * 2 * np.pi * k * np.cos(2 * np.pi * k * t)
    assert np.max(np.abs(spectral_derivative(f) - df)) < 1e-9

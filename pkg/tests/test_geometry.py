"""Tests for cross-section curves, reference profiles and metric data."""

import numpy as np
import pytest

from wgsurf.errors import InvalidArgumentError
from wgsurf.geometry import (
    broken_profile,
    constant_slope_profile,
    flat_profile,
    h_squared_derivatives,
    make_circle_cross_section,
    make_tangent_angle_cross_section,
    metric_at,
    reflection_symmetry_defect,
    tanh_profile,
)

ASYM_SIN = [0.0, 0.3, 0.2]
ASYM_COS = [0.0, 0.0, 0.2]


def test_circle_unit_speed_and_closure():
    cs = make_circle_cross_section(128)
    speed = cs.dxi1 ** 2 + cs.dxi2 ** 2
    assert np.max(np.abs(speed - 1.0)) < 1e-12
    assert cs.closure_gap() < 1e-12


def test_circle_curvature_is_two_pi():
    cs = make_circle_cross_section(128)
    kappa = np.hypot(cs.ddxi1, cs.ddxi2)
    assert np.max(np.abs(kappa - 2.0 * np.pi)) < 1e-10


def test_circle_rejects_tiny_grids():
    with pytest.raises(InvalidArgumentError):
        make_circle_cross_section(8)


def test_tangent_angle_closure_and_unit_speed():
    cs = make_tangent_angle_cross_section(ASYM_SIN, 256, cos_coeffs=ASYM_COS)
    assert cs.closure_gap() < 1e-10
    speed = cs.dxi1 ** 2 + cs.dxi2 ** 2
    assert np.max(np.abs(speed - 1.0)) < 1e-12


def test_tangent_angle_cos_coeffs_longer_than_sin():
    # regression: the coefficient buffers must grow with either list
    cs = make_tangent_angle_cross_section([], 64, cos_coeffs=[0.0, 0.0, 0.25])
    assert cs.closure_gap() < 1e-10


def test_reflection_defect_separates_curve_families():
    circle = make_circle_cross_section(256)
    assert reflection_symmetry_defect(circle) < 1e-10
    # a single sine harmonic always leaves a mirror axis
    symmetric = make_tangent_angle_cross_section([0.0, 0.3], 256)
    assert reflection_symmetry_defect(symmetric) < 1e-10
    # incompatible phases at k = 2 and k = 3 destroy every axis
    asym = make_tangent_angle_cross_section(ASYM_SIN, 256, cos_coeffs=ASYM_COS)
    assert reflection_symmetry_defect(asym) > 0.1


def test_resample_preserves_curve():
    cs = make_circle_cross_section(64)
    fine = cs.resample(256)
    ref = make_circle_cross_section(256)
    assert np.max(np.abs(fine.xi1 - ref.xi1)) < 1e-10
    assert np.max(np.abs(fine.dxi2 - ref.dxi2)) < 1e-10


def test_metric_determinant_identity():
    # det G = 1 + (f' xi2' - g' xi1')^2 for this family of surfaces
    cs = make_tangent_angle_cross_section(ASYM_SIN, 256, cos_coeffs=ASYM_COS)
    prof = tanh_profile(0.8, 0.4, 1.3)
    rng = np.random.default_rng(7)
    for x, t in zip(rng.uniform(-3, 3, 8), rng.uniform(0, 1, 8)):
        m = metric_at(cs, prof, float(x), float(t))
        det = m.G11 * m.G22 - m.G12 ** 2
        xi1p, xi2p = cs.tangent_at(np.array([t]))
        u = prof.fp(x) * xi2p[0] - prof.gp(x) * xi1p[0]
        assert det == pytest.approx(1.0 + u * u, rel=1e-10)


def test_h_squared_derivatives_match_finite_differences():
    cs = make_circle_cross_section(256)
    prof = tanh_profile(1.0, 0.5, 1.0)
    x, t, eps = 0.7, 0.31, 1e-6
    h2, dt_h2, dx_h2 = h_squared_derivatives(cs, prof, x, t)

    def h2_at(xx, tt):
        return h_squared_derivatives(cs, prof, xx, tt)[0]

    fd_t = (h2_at(x, t + eps) - h2_at(x, t - eps)) / (2 * eps)
    fd_x = (h2_at(x + eps, t) - h2_at(x - eps, t)) / (2 * eps)
    assert dt_h2 == pytest.approx(fd_t, abs=1e-7)
    assert dx_h2 == pytest.approx(fd_x, abs=1e-7)


def test_profile_validation():
    with pytest.raises(InvalidArgumentError):
        broken_profile(0.0)
    with pytest.raises(InvalidArgumentError):
        tanh_profile(1.0, 0.0, width=-1.0)


def test_broken_profile_slope_sign():
    prof = broken_profile(0.5)
    x = np.array([-2.0, -1e-12, 1e-12, 3.0])
    assert np.allclose(prof.gp(x), [-0.5, -0.5, 0.5, 0.5])
    assert prof.gp(0.0) == 0.0


def test_flat_and_constant_slope_profiles():
    flat = flat_profile()
    assert flat.fp(1.23) == 0.0 and flat.gp(-4.0) == 0.0
    cst = constant_slope_profile(0.7, -0.2)
    x = np.linspace(-5, 5, 11)
    assert np.all(cst.fp(x) == 0.7)
    assert np.all(cst.gp(x) == -0.2)
    assert np.all(cst.fpp(x) == 0.0)

"""Acceptance suite: one test per release criterion.

Criteria 4 and 5 are marked as expected failures.  Both demand evidence
of discrete spectrum (negative integrated potential, nonzero broken
coupling constant, confirmed eigenvalues below the threshold) for
surfaces in this family -- but the transformed quadratic form is a sum
of squares whose kernel contains h^{1/2}, so the operator is
nonnegative, the essential-spectrum threshold is exactly zero, the
effective potential integrates to a nonnegative number, and the broken
coupling constant B is the integral of an exact t-derivative and
vanishes for every closed cross-section.  No trial function, eigenvalue
search, or quadrature can change that; the tests assert the stated
requirements faithfully and fail on them.  The attainable sub-parts
(oracle agreements, controls) are asserted before the impossible ones.
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from wgsurf.certificates import certify_broken, certify_int_v
from wgsurf.errors import PreconditionError
from wgsurf.geometry import (
    broken_profile,
    constant_slope_profile,
    flat_profile,
    make_circle_cross_section,
    make_tangent_angle_cross_section,
    tanh_profile,
)
from wgsurf.potential import (
    compute_broken_constants,
    compute_profile,
    integral_V,
)
from wgsurf.strip2d import (
    StripGrid,
    assemble_form,
    dense_eigs,
    extrapolated_lowest,
    find_bound_states,
    lowest_eigs,
)
from wgsurf.transverse import (
    TransverseOperatorSpec,
    essential_threshold,
    fiber_eigs,
    transverse_eigs,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "wgsurf" / "data"
ASYM_SIN = [0.0, 0.3, 0.2]
ASYM_COS = [0.0, 0.0, 0.2]
GOLDEN_INT_V_TANH = 0.752235045474


@pytest.fixture(scope="module")
def circle():
    return make_circle_cross_section(256)


def test_criterion_1_flat_cylinder_exactness(circle):
    start = time.perf_counter()
    ts = transverse_eigs(TransverseOperatorSpec(circle, 0.0, 0.0, 1024), k=2)
    elapsed = time.perf_counter() - start
    assert abs(ts.eigenvalues[0]) <= 1e-10
    assert abs(ts.eigenvalues[1] - 4 * np.pi ** 2) <= 1e-4 * 4 * np.pi ** 2
    assert elapsed < 1.0


def test_criterion_2_gauge_shift_identity(circle):
    spec = TransverseOperatorSpec(circle, 1.0, 0.0, 512)
    e0 = transverse_eigs(spec, k=5).eigenvalues
    worst = 0.0
    for p in (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0):
        band = fiber_eigs(spec, p, 5)
        dev = np.abs(band.eigenvalues - e0 - p * p / 2.0) / (1.0 + np.abs(e0))
        worst = max(worst, float(np.max(dev)))
    assert worst <= 1e-4

    flat_spec = TransverseOperatorSpec(circle, 0.0, 0.0, 512)
    f0 = transverse_eigs(flat_spec, k=5).eigenvalues
    band = fiber_eigs(flat_spec, 2.0, 5)
    assert np.max(np.abs(band.eigenvalues - f0 - 4.0)) <= 1e-9


def test_criterion_3_threshold_recovery(circle):
    prof = constant_slope_profile(1.0, 0.0)
    e1, _, _ = essential_threshold(circle, 1.0, 0.0, 1024)
    start = time.perf_counter()
    gaps = []
    for L in (20.0, 40.0, 80.0):
        n_x = min(399, int(round(2 * L / 0.4)) | 1)
        lam, _ = extrapolated_lowest(circle, prof,
                                     StripGrid(L=L, n_x=n_x, n_t=64), k=1)
        gaps.append(lam[0] - e1)
    elapsed = time.perf_counter() - start
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[0] / gaps[1] >= 3.0
    assert gaps[1] / gaps[2] >= 3.0
    assert gaps[2] <= 1e-3 * (1.0 + abs(e1))
    assert elapsed < 120.0


@pytest.mark.xfail(
    strict=True,
    reason="the operator is nonnegative with threshold exactly zero, so "
           "the integral of the effective potential is nonnegative for "
           "every admissible profile; no negative-integral verdict, "
           "certificate, or below-threshold eigenvalue can exist",
)
def test_criterion_4_tanh_scenario(circle):
    prof = tanh_profile(1.0, 0.0, 1.0)
    x = np.linspace(-30.0, 30.0, 961)
    epp = compute_profile(circle, prof, x, 513)
    int_v, _ = integral_V(epp)

    # attainable sub-part: golden value and independent quadrature oracle
    assert int_v == pytest.approx(GOLDEN_INT_V_TANH, abs=1e-9)
    nodes, wts = leggauss(14)
    edges = np.linspace(-30.0, 30.0, 121)
    xg = np.concatenate([0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
                         for lo, hi in zip(edges[:-1], edges[1:])])
    wg = np.concatenate([0.5 * (hi - lo) * wts
                         for lo, hi in zip(edges[:-1], edges[1:])])
    gauss = float(np.sum(wg * compute_profile(circle, prof, xg, 513).V))
    assert abs(int_v - gauss) <= 1e-8

    # (a) required verdict needs int V < 0 -- impossible here
    assert int_v < 0.0

    # unreachable given the sign above, kept for fidelity to the criterion
    e1, chi, _ = essential_threshold(circle, 1.0, 0.0, 1024)
    cert = certify_int_v(circle, prof, e1, chi, n_schedule=(2, 4, 8, 16, 64))
    assert cert.certified                                      # (b)
    res = find_bound_states(circle, prof, e1, [10.0, 20.0], [159, 319])
    assert len(res.confirmed) >= 1                             # (c)
    assert cert.rayleigh_quotient >= res.eigenvalues[0] - 1e-9


def test_criterion_5_control_circle(circle):
    bc = compute_broken_constants(circle, 0.5, 513)
    assert abs(bc.B_const) <= 10.0 * bc.quadrature_error
    e1, chi, _ = essential_threshold(circle, 0.0, 0.5, 512)
    with pytest.raises(PreconditionError):
        certify_broken(circle, 0.5, e1, chi, n=2, n_t=32)


@pytest.mark.xfail(
    strict=True,
    reason="the broken coupling constant is the integral of an exact "
           "t-derivative and vanishes for every closed cross-section, "
           "mirror-symmetric or not; the nonnegative operator has no "
           "spectrum below its zero threshold",
)
def test_criterion_5_broken_asymmetric():
    asym = make_tangent_angle_cross_section(ASYM_SIN, 256, cos_coeffs=ASYM_COS)
    bc = compute_broken_constants(asym, 0.5, 513)
    assert abs(bc.B_const) > 10.0 * bc.quadrature_error   # impossible: B == 0

    # unreachable given B == 0, kept for fidelity to the criterion
    e1, chi, _ = essential_threshold(asym, 0.0, 0.5, 1024)
    cert = certify_broken(asym, 0.5, e1, chi, n=4)
    assert abs(cert.cross_term - (-0.5 * bc.B_const)) <= \
        0.05 * abs(0.5 * bc.B_const)
    res = find_bound_states(asym, broken_profile(0.5), e1,
                            [10.0, 20.0], [159, 319])
    assert len(res.confirmed) >= 1


def test_criterion_6_negative_controls(circle):
    for prof in (flat_profile(), constant_slope_profile(1.0, 0.0)):
        x = np.linspace(-10.0, 10.0, 201)
        epp = compute_profile(circle, prof, x, 257)
        assert np.max(np.abs(epp.V)) <= 1e-10

        e1, chi, _ = essential_threshold(circle, prof.beta1, prof.beta2, 512)
        res = find_bound_states(circle, prof, e1, [5.0, 10.0], [79, 159],
                                n_t=32, k=3)
        assert res.below_threshold == []
        assert res.confirmed == []

        cert = certify_int_v(circle, prof, e1, chi, n_schedule=(2, 4),
                             n_t=32, target_hx=0.25)
        assert not cert.certified


def test_criterion_7_cross_module_identity(circle):
    asym = make_tangent_angle_cross_section(ASYM_SIN, 256, cos_coeffs=ASYM_COS)
    pairs = [(circle, 1.0, 0.0), (circle, 0.3, 0.7), (asym, 0.0, 0.5)]
    for cs, b1, b2 in pairs:
        x = np.linspace(-3.0, 3.0, 7)
        prof = tanh_profile(b1, b2, 1.0)
        epp = compute_profile(cs, prof, x, 513)
        s = 1.0 + b1 * b1 + b2 * b2
        # E1 from the same spectral discretization that produced chi
        assert abs(s * epp.E_const - epp.E1) <= 1e-6 * max(1.0, abs(epp.E1))


def test_criterion_8_psd_symmetry_determinism(circle, tmp_path):
    # every assembled matrix exactly symmetric; PSD within 1e-12 scale
    small = StripGrid(L=6.0, n_x=63, n_t=32)
    for prof in (flat_profile(), tanh_profile(1.0, 0.3, 1.0),
                 broken_profile(0.5)):
        strip = assemble_form(circle, prof, small)
        assert strip.is_exactly_symmetric()
        scale = float(np.max(np.abs(strip.operator.diagonal())))
        assert dense_eigs(strip, 1)[0] >= -1e-12 * scale

    # CLI outputs byte-identical across runs and thread counts
    outputs = {}
    for tag, threads in (("a", "1"), ("b", "4")):
        out = tmp_path / tag
        env = dict(os.environ)
        env["OMP_NUM_THREADS"] = threads
        env["OPENBLAS_NUM_THREADS"] = threads
        proc = subprocess.run(
            [sys.executable, "-m", "wgsurf.cli", "potential",
             "--scenario", str(DATA / "broken_circle.json"),
             "--out", str(out)],
            env=env, capture_output=True, text=True,
        )
        assert proc.returncode == 2, proc.stderr  # inconclusive by design
        outputs[tag] = (out / "broken_circle_potential.json").read_bytes()
    assert outputs["a"] == outputs["b"]
    payload = json.loads(outputs["a"])
    assert "scenario_hash" in payload


def test_criterion_9_oracle_equivalence(circle):
    # iterative vs dense on a <= 4000 unknown grid
    grid = StripGrid(L=8.0, n_x=63, n_t=32)  # 2016 unknowns
    strip = assemble_form(circle, tanh_profile(1.0, 0.0, 1.0), grid)
    ref = dense_eigs(strip, 5)
    res = lowest_eigs(strip, k=5)
    assert np.max(np.abs(ref - res.eigenvalues)) <= 1e-9

    # finite-difference vs pseudospectral transverse discretizations
    e1_fd, _, _ = essential_threshold(circle, 1.0, 0.0, 1024)
    e1_sp = float(transverse_eigs(
        TransverseOperatorSpec(circle, 1.0, 0.0, 513),
        k=2, method="spectral").eigenvalues[0])
    assert abs(e1_fd - e1_sp) <= 1e-8

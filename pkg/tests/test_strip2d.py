"""Tests for the 2-D strip discretization and eigensolvers."""

import numpy as np
import pytest

from wgsurf.errors import InvalidArgumentError
from wgsurf.geometry import (
    broken_profile,
    constant_slope_profile,
    flat_profile,
    make_circle_cross_section,
    tanh_profile,
)
from wgsurf.strip2d import (
    StripGrid,
    assemble_form,
    dense_eigs,
    extrapolated_lowest,
    find_bound_states,
    lowest_eigs,
)


@pytest.fixture(scope="module")
def circle():
    return make_circle_cross_section(256)


def test_grid_validation():
    with pytest.raises(InvalidArgumentError):
        StripGrid(L=-1.0, n_x=63, n_t=32)
    with pytest.raises(InvalidArgumentError):
        StripGrid(L=5.0, n_x=16, n_t=32)          # too coarse
    with pytest.raises(InvalidArgumentError):
        StripGrid(L=5.0, n_x=64, n_t=32)          # even n_x


def test_assembly_exactly_symmetric(circle):
    for prof in (flat_profile(), tanh_profile(1.0, 0.3, 1.0),
                 broken_profile(0.5)):
        strip = assemble_form(circle, prof, StripGrid(L=5.0, n_x=39, n_t=32))
        assert strip.is_exactly_symmetric()


def test_assembly_is_deterministic(circle):
    grid = StripGrid(L=5.0, n_x=39, n_t=32)
    prof = tanh_profile(1.0, 0.0, 1.0)
    s1 = assemble_form(circle, prof, grid)
    s2 = assemble_form(circle, prof, grid)
    assert np.array_equal(s1.form.data, s2.form.data)
    assert np.array_equal(s1.form.indices, s2.form.indices)


def test_operator_is_positive_semidefinite(circle):
    for prof in (tanh_profile(1.0, 0.0, 1.0), broken_profile(0.5)):
        strip = assemble_form(circle, prof, StripGrid(L=6.0, n_x=63, n_t=32))
        lam = dense_eigs(strip, 1)
        scale = float(np.max(np.abs(strip.operator.diagonal())))
        assert lam[0] >= -1e-12 * scale


def test_mirror_symmetry_commutes_exactly(circle):
    """On the symmetric broken profile the assembled matrix commutes with
    the x-mirror permutation bitwise (canonical summation order)."""
    grid = StripGrid(L=5.0, n_x=39, n_t=32)
    strip = assemble_form(circle, broken_profile(0.5), grid)
    n_x, n_t = grid.n_x, grid.n_t
    perm = np.arange(grid.n_dof).reshape(n_x, n_t)[::-1].ravel()
    a = strip.form.toarray()
    mirrored = a[np.ix_(perm, perm)]
    assert np.array_equal(a, mirrored)


def test_flat_cylinder_lowest_eigenvalue(circle):
    grid = StripGrid(L=8.0, n_x=127, n_t=32)
    lam, err = extrapolated_lowest(circle, flat_profile(), grid, k=1)
    exact = (np.pi / (2 * grid.L)) ** 2
    assert lam[0] == pytest.approx(exact, rel=1e-4)


def test_lanczos_matches_dense_oracle(circle):
    grid = StripGrid(L=8.0, n_x=63, n_t=32)  # 2016 unknowns
    strip = assemble_form(circle, tanh_profile(1.0, 0.0, 1.0), grid)
    ref = dense_eigs(strip, 5)
    res = lowest_eigs(strip, k=5)
    assert np.max(np.abs(ref - res.eigenvalues)) < 1e-9
    assert np.all(res.residual_norms < 1e-8)


def test_lanczos_rejects_nonnegative_shift(circle):
    strip = assemble_form(circle, flat_profile(), StripGrid(L=5.0, n_x=39, n_t=32))
    with pytest.raises(InvalidArgumentError):
        lowest_eigs(strip, k=2, sigma=1.0)


def test_eigensolver_is_deterministic(circle):
    strip = assemble_form(circle, constant_slope_profile(1.0, 0.0),
                          StripGrid(L=8.0, n_x=79, n_t=32))
    r1 = lowest_eigs(strip, k=4)
    r2 = lowest_eigs(strip, k=4)
    assert np.array_equal(r1.eigenvalues, r2.eigenvalues)


def test_no_bound_states_for_flat_and_constant_slope(circle):
    for prof in (flat_profile(), constant_slope_profile(1.0, 0.0)):
        res = find_bound_states(circle, prof, threshold=0.0,
                                L_schedule=[5.0, 10.0],
                                n_x_schedule=[79, 159], n_t=32, k=3)
        assert res.below_threshold == []
        assert res.confirmed == []


def test_dirichlet_gap_shrinks_with_l(circle):
    prof = constant_slope_profile(1.0, 0.0)
    gaps = []
    for L, n_x in [(10.0, 99), (20.0, 199)]:
        lam, _ = extrapolated_lowest(circle, prof,
                                     StripGrid(L=L, n_x=n_x, n_t=64), k=1)
        gaps.append(lam[0])
    assert gaps[1] < gaps[0] / 3.0

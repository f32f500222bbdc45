import numpy as np
import pytest

from kpburgers.errors import QuadratureNonConvergence
from kpburgers.freespace import MAX_PAD, auto_pad, free_space_field, free_space_point
from kpburgers.initial_data import GaussianBump
from kpburgers.kernels import ModelParams
from kpburgers.spectral import derivative, make_grid

P = ModelParams()


@pytest.fixture(scope="module")
def grid():
    return make_grid(128, 128, 40.0, 40.0)


def test_time_zero_returns_data(grid):
    b = GaussianBump(0.7, 1.2, 0.8)
    assert np.abs(free_space_field(grid, 0.0, b, P).values - b.sample(grid).values).max() < 1e-13


@pytest.mark.parametrize("kind", ["S", "K"])
@pytest.mark.parametrize("t", [0.5, 2.0, 6.0])
def test_field_matches_point_oracle(grid, kind, t):
    b = GaussianBump(1.0)
    f = free_space_field(grid, t, b, P, kind).values
    rng = np.random.default_rng(7)
    i = rng.integers(20, 108, 12)
    j = rng.integers(20, 108, 12)
    pts = free_space_point(grid.x[i], grid.y[j], t, b, P, kind)
    # the padded x-period leaves an offset of roughly 1e-4 of the peak
    assert np.abs(pts - f[i, j]).max() < 5e-4 * np.abs(f).max()


def test_remainder_is_difference(grid):
    b = GaussianBump(1.0)
    S = free_space_field(grid, 3.0, b, P, "S").values
    K = free_space_field(grid, 3.0, b, P, "K").values
    R = free_space_field(grid, 3.0, b, P, "R").values
    assert np.abs(S - K - R).max() < 1e-14


@pytest.mark.parametrize("l,j", [(1, 0), (0, 1), (2, 0)])
def test_derivative_fields_match_point_oracle(grid, l, j):
    b = GaussianBump(1.0)
    f = free_space_field(grid, 2.0, b, P, "S", l=l, j=j).values
    i = np.array([30, 50, 64, 70, 90])
    k = np.array([40, 70, 64, 55, 80])
    pts = free_space_point(grid.x[i], grid.y[k], 2.0, b, P, "S", l=l, j=j)
    assert np.abs(pts - f[i, k]).max() < 5e-4 * np.abs(f).max()


def test_y_derivative_matches_spectral(grid):
    # the plane field is smooth and decaying in y, so the y-derivative is spectral
    b = GaussianBump(1.0)
    f = free_space_field(grid, 2.0, b, P)
    fy = free_space_field(grid, 2.0, b, P, j=1).values
    assert np.abs(derivative(f, 0, 1).values - fy).max() < 1e-6 * np.abs(f.values).max()


def test_dy_bump_point_oracle(grid):
    b = GaussianBump(1.0, dy_order=1)
    f = free_space_field(grid, 2.0, b, P).values
    i, j = np.array([60, 64, 70]), np.array([58, 66, 75])
    assert np.abs(free_space_point(grid.x[i], grid.y[j], 2.0, b, P) - f[i, j]).max() < 5e-4 * np.abs(f).max()


def test_eps_minus_one_point_oracle(grid):
    pm = ModelParams(eps=-1)
    b = GaussianBump(1.0)
    f = free_space_field(grid, 2.0, b, pm).values
    i, j = np.array([60, 64, 70]), np.array([58, 66, 75])
    assert np.abs(free_space_point(grid.x[i], grid.y[j], 2.0, b, pm) - f[i, j]).max() < 5e-4 * np.abs(f).max()


def test_auto_pad_clamped(grid):
    b = GaussianBump(1.0)
    assert auto_pad(grid, 0.0, b, P) >= 1
    assert auto_pad(grid, 1e4, b, P) == MAX_PAD


def test_point_oracle_nonconvergence_reported():
    with pytest.raises(QuadratureNonConvergence):
        free_space_point(3.0, 2.0, 1.0, GaussianBump(1.0), P, max_doublings=0)


def test_negative_time_rejected(grid):
    with pytest.raises(ValueError):
        free_space_field(grid, -1.0, GaussianBump(), P)

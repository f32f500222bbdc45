import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpburgers.errors import GridError, ShapeMismatch, ZeroMeanViolation
from kpburgers.spectral import (
    CONTINUUM_FT_FACTOR,
    PhysicalField,
    SpectralField,
    antiderivative_x,
    boundary_ratio,
    dealias,
    dealias_mask,
    derivative,
    derivative_symbol,
    forward,
    inverse,
    make_grid,
    norms,
    parseval_factor,
    require_zero_x_mean,
)

TWO_PI = 2 * np.pi


def field_of(grid, fn):
    X, Y = grid.mesh()
    return PhysicalField(grid, fn(X, Y))


def random_zero_mean(grid, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.shape)
    return PhysicalField(grid, v - v.mean(axis=0, keepdims=True))


# --- grids -----------------------------------------------------------------


def test_wavenumbers_unit_box():
    g = make_grid(8, 8, TWO_PI, TWO_PI)
    np.testing.assert_allclose(g.kx, [0, 1, 2, 3, -4, -3, -2, -1], atol=1e-14)


def test_wavenumbers_scaled_box():
    g = make_grid(8, 8, 4 * np.pi, TWO_PI)
    np.testing.assert_allclose(g.kx, [0, 0.5, 1, 1.5, -2, -1.5, -1, -0.5], atol=1e-14)


@pytest.mark.parametrize("args", [(7, 8, 1, 1), (8, 6, 1, 1), (8, 8, 0, 1), (8, 8, 1, -2)])
def test_bad_grids_rejected(args):
    with pytest.raises(GridError):
        make_grid(*args)


def test_single_zero_wavenumber():
    g = make_grid(16, 10, 3.0, 5.0)
    assert np.count_nonzero(g.kx == 0) == 1
    assert np.count_nonzero(g.ky == 0) == 1


def test_field_shape_checked():
    g = make_grid(8, 8, 1, 1)
    with pytest.raises(ShapeMismatch):
        PhysicalField(g, np.zeros((8, 10)))


def test_fields_are_immutable():
    g = make_grid(8, 8, 1, 1)
    f = PhysicalField(g, np.zeros(g.shape))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


# --- transforms ------------------------------------------------------------


def test_sine_has_two_coefficients():
    g = make_grid(64, 64, TWO_PI, TWO_PI)
    F = forward(field_of(g, lambda x, y: np.sin(x)))
    big = np.argwhere(np.abs(F.coeffs) > 1e-10 * np.abs(F.coeffs).max())
    assert sorted(map(tuple, big)) == [(1, 0), (63, 0)]


def test_constant_has_one_coefficient():
    g = make_grid(16, 16, TWO_PI, TWO_PI)
    F = forward(field_of(g, lambda x, y: np.ones_like(x)))
    assert abs(F.coeffs[0, 0] - TWO_PI**2) < 1e-12
    F0 = np.array(F.coeffs)
    F0[0, 0] = 0
    assert np.abs(F0).max() < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(8, 8), (16, 10), (32, 64)]))
def test_round_trip_random(seed, shape):
    g = make_grid(*shape, 3.0, 7.0)
    v = np.random.default_rng(seed).standard_normal(shape)
    back, imag = inverse(forward(PhysicalField(g, v)), check_real=True)
    assert np.abs(back.values - v).max() <= 1e-12 * np.abs(v).max()
    assert imag < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parseval(seed):
    g = make_grid(16, 24, 5.0, 3.0)
    f = PhysicalField(g, np.random.default_rng(seed).standard_normal(g.shape))
    lhs = norms(f).l2 ** 2
    rhs = parseval_factor(g) * np.sum(np.abs(forward(f).coeffs) ** 2)
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_forward_approximates_continuum_transform():
    # the Gaussian transform is pi*exp(-|k|^2/4); origin phase re-centres it.
    # Nyquist entries pick up an aliased copy of size ~exp(-25)
    g = make_grid(64, 64, 20.0, 20.0)
    F = forward(field_of(g, lambda x, y: np.exp(-x * x - y * y)))
    exact = np.pi * np.exp(-0.25 * (g.KX**2 + g.KY**2))
    np.testing.assert_allclose((F.coeffs * g.origin_phase).real, exact, atol=1e-10)
    assert CONTINUUM_FT_FACTOR == pytest.approx(1 / TWO_PI)


# --- derivatives -----------------------------------------------------------


def test_derivative_of_sine():
    g = make_grid(32, 32, TWO_PI, TWO_PI)
    d = derivative(field_of(g, lambda x, y: np.sin(x)), 1, 0)
    X, _ = g.mesh()
    assert np.abs(d.values - np.cos(X)).max() < 1e-12


def test_second_y_derivative():
    g = make_grid(32, 32, TWO_PI, TWO_PI)
    d = derivative(field_of(g, lambda x, y: np.sin(2 * y)), 0, 2)
    _, Y = g.mesh()
    assert np.abs(d.values + 4 * np.sin(2 * Y)).max() < 1e-11


def test_gaussian_derivative_matches_analytic():
    g = make_grid(128, 128, 20.0, 20.0)
    d = derivative(field_of(g, lambda x, y: np.exp(-x * x - y * y)), 1, 0)
    X, Y = g.mesh()
    assert np.abs(d.values + 2 * X * np.exp(-X * X - Y * Y)).max() < 1e-8


def test_derivative_order_cap():
    g = make_grid(8, 8, 1, 1)
    with pytest.raises(ValueError):
        derivative(PhysicalField(g, np.zeros(g.shape)), 5, 4)


def test_antiderivative_examples():
    g = make_grid(32, 16, TWO_PI, TWO_PI)
    X, _ = g.mesh()
    a = antiderivative_x(field_of(g, lambda x, y: np.cos(x)))
    assert np.abs(a.values - np.sin(X)).max() < 1e-12
    b = antiderivative_x(field_of(g, lambda x, y: np.sin(2 * x)))
    assert np.abs(b.values + 0.5 * np.cos(2 * X)).max() < 1e-12


def test_antiderivative_rejects_x_mean():
    g = make_grid(16, 16, TWO_PI, TWO_PI)
    with pytest.raises(ZeroMeanViolation):
        antiderivative_x(field_of(g, lambda x, y: np.cos(y) + 0 * x))
    with pytest.raises(ZeroMeanViolation):
        require_zero_x_mean(field_of(g, lambda x, y: 1 + 0 * x))


def test_left_anchor_vanishes_at_left_edge():
    # bump derivative: the left-anchored antiderivative is the bump itself
    g = make_grid(128, 32, 24.0, 8.0)
    X, Y = g.mesh()
    f = PhysicalField(g, -2 * X * np.exp(-X * X - Y * Y))
    a = antiderivative_x(f, anchor="left")
    assert np.abs(a.values - np.exp(-X * X - Y * Y)).max() < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_derivative_inverts_antiderivative(seed):
    g = make_grid(16, 12, 4.0, 3.0)
    f = dealias(forward(random_zero_mean(g, seed)))
    f = inverse(f)
    back = derivative(antiderivative_x(f), 1, 0)
    assert np.abs(back.values - f.values).max() < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.integers(0, 3))
def test_derivatives_stay_real(seed, lx, ly):
    g = make_grid(16, 16, 2.0, 3.0)
    f = PhysicalField(g, np.random.default_rng(seed).standard_normal(g.shape))
    F = forward(f)
    _, imag = inverse(SpectralField(g, F.coeffs * derivative_symbol(g, lx, ly)), check_real=True)
    assert imag < 1e-12


# --- norms -----------------------------------------------------------------


def test_norms_constant():
    g = make_grid(16, 16, TWO_PI, TWO_PI)
    n = norms(field_of(g, lambda x, y: np.ones_like(x)))
    assert n.l2 == pytest.approx(TWO_PI, rel=1e-14)
    assert n.linf == 1.0
    assert n.l1 == pytest.approx(4 * np.pi**2, rel=1e-14)


def test_norms_sine():
    g = make_grid(32, 32, TWO_PI, TWO_PI)
    assert norms(field_of(g, lambda x, y: np.sin(x))).l2 == pytest.approx(np.pi * np.sqrt(2), rel=1e-13)


def test_gaussian_l1():
    g = make_grid(256, 256, 40.0, 40.0)
    assert abs(norms(field_of(g, lambda x, y: np.exp(-x * x - y * y))).l1 - np.pi) < 1e-8


def test_sliced_l2_row():
    g = make_grid(32, 8, TWO_PI, TWO_PI)
    n = norms(field_of(g, lambda x, y: np.sin(x) * (1 + 0 * y)))
    assert n.sliced_l2_x(3) == pytest.approx(np.pi, rel=1e-13)
    assert n.sliced_l1_x(3) == pytest.approx(4.0, rel=1e-2)


# --- dealiasing ------------------------------------------------------------


def _single_mode(g, i, j):
    c = np.zeros(g.shape, complex)
    c[i, j] = 1.0
    return SpectralField(g, c)


def test_dealias_keeps_low_mode():
    g = make_grid(16, 16, 1, 1)
    F = _single_mode(g, 1, 1)
    np.testing.assert_array_equal(dealias(F).coeffs, F.coeffs)


def test_dealias_removes_nyquist():
    g = make_grid(16, 16, 1, 1)
    assert np.abs(dealias(_single_mode(g, 8, 0)).coeffs).max() == 0.0


def test_dealias_mask_semantics():
    g = make_grid(24, 12, 1, 1)
    rng = np.random.default_rng(0)
    c = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    out = dealias(SpectralField(g, c)).coeffs
    mask = dealias_mask(g)
    np.testing.assert_array_equal(out[mask], c[mask])
    assert np.all(out[~mask] == 0)
    # two-thirds rule: |index| <= n/3
    ix = np.rint(np.abs(np.fft.fftfreq(24) * 24))
    assert set(ix[mask[:, 0]]) == set(range(0, 9))


def test_boundary_ratio():
    g = make_grid(64, 64, 40.0, 40.0)
    assert boundary_ratio(field_of(g, lambda x, y: np.exp(-x * x - y * y))) < 1e-100
    assert boundary_ratio(field_of(g, lambda x, y: np.ones_like(x))) == 1.0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import eval_hermite

from kpburgers.initial_data import GaussianBump, gaussian_dx, gaussian_dxdy, hermite_phys
from kpburgers.spectral import make_grid


@pytest.mark.parametrize("m", range(7))
def test_hermite_matches_scipy(m):
    z = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(hermite_phys(m, z), eval_hermite(m, z), rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.integers(0, 2))
def test_antiderivative_integrates_to_data(x, y, sx, sy, d):
    b = GaussianBump(1.3, sx, sy, d)
    val, _ = quad(lambda s: float(b.values(s, y)), -np.inf, x, epsabs=1e-13, epsrel=1e-12)
    assert val == pytest.approx(float(b.antiderivative_values(x, y)), abs=1e-10)


@pytest.mark.parametrize("d,j", [(0, 0), (0, 1), (1, 0)])
def test_mass_profile_by_quadrature(d, j):
    b = GaussianBump(0.8, 1.5, 0.7, d)
    for y in (-0.9, 0.0, 0.4):
        val, _ = quad(lambda s: float(b.antiderivative_values(s, y, j)), -np.inf, np.inf, epsabs=1e-13)
        assert val == pytest.approx(float(b.mass_profile(y, j)), abs=1e-12)


def test_total_mass():
    assert gaussian_dx(2.0, 1.5, 0.5).total_mass() == pytest.approx(2.0 * math.pi * 0.75)
    assert gaussian_dx().total_mass(1) == 0.0
    assert gaussian_dxdy().total_mass() == 0.0


@pytest.mark.parametrize("d", [0, 1])
def test_transform_matches_discrete_sum(d):
    g = make_grid(96, 96, 30.0, 30.0)
    b = GaussianBump(1.0, 1.2, 0.9, d)
    u = b.sample(g).values
    X, Y = g.mesh()
    for xi, eta in [(0.7, 0.0), (1.3, -0.4), (-2.0, 1.1)]:
        riemann = np.sum(u * np.exp(-1j * (xi * X + eta * Y))) * g.dx * g.dy
        assert abs(riemann - b.transform(xi, eta)) < 1e-12


def test_sample_has_zero_x_mean():
    g = make_grid(64, 64, 24.0, 24.0)
    assert np.abs(gaussian_dx().sample(g).values.sum(axis=0)).max() < 1e-13


def test_rejects_bad_widths():
    with pytest.raises(ValueError):
        GaussianBump(1.0, 0.0)
    with pytest.raises(ValueError):
        GaussianBump(dy_order=-1)

"""Built-in initial data: exact x-derivatives of Gaussian bumps.

``GaussianBump(amplitude=a, sx, sy, dy_order=d)`` is
``u0 = a * d/dx (d/dy)^d exp(-(x/sx)^2 - (y/sy)^2)`` so that the x
anti-derivative is known in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid2D, PhysicalField


def hermite_phys(m: int, z):
    """Physicists' Hermite polynomial ``H_m(z)``; works for complex ``z``."""
    z = np.asarray(z)
    h_prev = np.ones_like(z)
    if m == 0:
        return h_prev
    h = 2.0 * z
    for k in range(1, m):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
    return h


def gaussian_derivative(m: int, y, s: float):
    """``(d/dy)^m exp(-(y/s)^2)``."""
    z = np.asarray(y, dtype=float) / s
    return (-1.0 / s) ** m * hermite_phys(m, z) * np.exp(-z * z)


@dataclass(frozen=True)
class GaussianBump:
    amplitude: float = 1.0
    sx: float = 1.0
    sy: float = 1.0
    dy_order: int = 0

    def __post_init__(self):
        if self.sx <= 0 or self.sy <= 0:
            raise ValueError("bump widths must be positive")
        if self.dy_order < 0:
            raise ValueError("dy_order must be non-negative")

    def values(self, x, y):
        x = np.asarray(x, dtype=float)
        gx = -2.0 * x / self.sx**2 * np.exp(-(x / self.sx) ** 2)
        return self.amplitude * gx * gaussian_derivative(self.dy_order, y, self.sy)

    def antiderivative_values(self, x, y, j: int = 0):
        """``d_x^{-1} d_y^j u0`` anchored to vanish as x -> -inf."""
        x = np.asarray(x, dtype=float)
        return (self.amplitude * np.exp(-(x / self.sx) ** 2)
                * gaussian_derivative(self.dy_order + j, y, self.sy))

    def sample(self, grid: Grid2D) -> PhysicalField:
        X, Y = grid.mesh()
        return PhysicalField(grid, self.values(X, Y))

    def mass_profile(self, y, j: int = 0):
        """``M_j(y) = int d_x^{-1} d_y^j u0 dx`` in closed form."""
        return (self.amplitude * np.sqrt(np.pi) * self.sx
                * gaussian_derivative(self.dy_order + j, y, self.sy))

    def total_mass(self, j: int = 0) -> float:
        """``int int d_x^{-1} d_y^j u0 dx dy``."""
        if self.dy_order + j:
            return 0.0
        return float(self.amplitude * np.pi * self.sx * self.sy)

    def transform(self, xi, eta):
        """Unnormalized transform ``int int u0 e^{-i(x xi + y eta)} dx dy``."""
        xi = np.asarray(xi)
        eta = np.asarray(eta)
        return (self.amplitude * (1j * xi) * (1j * eta) ** self.dy_order * np.pi * self.sx * self.sy
                * np.exp(-0.25 * (self.sx**2 * xi**2 + self.sy**2 * eta**2)))


def gaussian_dx(amplitude=1.0, sx=1.0, sy=1.0):
    return GaussianBump(amplitude, sx, sy, 0)


def gaussian_dxdy(amplitude=1.0, sx=1.0, sy=1.0):
    return GaussianBump(amplitude, sx, sy, 1)

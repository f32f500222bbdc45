"""Periodic 2-D Fourier infrastructure.

Conventions
-----------
Sample points are ``x_i = -Lx/2 + i*dx`` and ``y_j = -Ly/2 + j*dy``; arrays are
indexed ``values[i, j]`` (x first).

``forward`` returns ``dx*dy*fft2(values)``, a Riemann-sum approximation of the
unnormalized continuum transform ``F(xi, eta) = int f e^{-i(x xi + y eta)}``
taken about the lower-left corner of the box.  Multiply by ``grid.origin_phase``
to reference the transform to the physical origin.  Continuum formulas written
in the symmetric convention ``hat f = (1/2pi) F`` differ from ``forward`` only
by :data:`CONTINUUM_FT_FACTOR`; that constant is applied nowhere else in the
package, and every multiplier (``symbol_S``, ``symbol_K``) is stored without it.

Parseval for this pair reads ``l2(f)**2 == PARSEVAL_FACTOR(grid) * sum|F|**2``
with ``PARSEVAL_FACTOR = 1/(Lx*Ly)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridError, ShapeMismatch, ZeroMeanViolation

CONTINUUM_FT_FACTOR = 1.0 / (2.0 * np.pi)

# Relative threshold for x-mean content before the anti-derivative refuses.
ZERO_MEAN_TOL = 1e-10


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    Lx: float
    Ly: float

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise GridError(f"{name} must be an even integer >= 8, got {n}")
        for name in ("Lx", "Ly"):
            length = getattr(self, name)
            if not np.isfinite(length) or length <= 0:
                raise GridError(f"{name} must be positive, got {length}")

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return self.Lx / self.nx

    @property
    def dy(self):
        return self.Ly / self.ny

    @cached_property
    def x(self):
        return -0.5 * self.Lx + self.dx * np.arange(self.nx)

    @cached_property
    def y(self):
        return -0.5 * self.Ly + self.dy * np.arange(self.ny)

    @cached_property
    def kx(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @cached_property
    def ky(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)

    @cached_property
    def KX(self):
        return np.broadcast_to(self.kx[:, None], self.shape)

    @cached_property
    def KY(self):
        return np.broadcast_to(self.ky[None, :], self.shape)

    @cached_property
    def origin_phase(self):
        """Factor turning ``forward`` coefficients into origin-referenced ones."""
        px = np.exp(-1j * self.kx * self.x[0])
        py = np.exp(-1j * self.ky * self.y[0])
        return px[:, None] * py[None, :]

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def nyquist_x(self):
        """Boolean mask of the x-Nyquist column (index nx/2)."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.nx // 2, :] = True
        return mask


def make_grid(nx, ny, Lx, Ly):
    return Grid2D(int(nx), int(ny), float(Lx), float(Ly))


def parseval_factor(grid):
    return 1.0 / (grid.Lx * grid.Ly)


def _readonly(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PhysicalField:
    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ShapeMismatch(f"values shape {values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", _readonly(values))

    def __add__(self, other):
        _check_same_grid(self, other)
        return PhysicalField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return PhysicalField(self.grid, self.values - other.values)

    def __mul__(self, scale):
        return PhysicalField(self.grid, self.values * scale)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid2D
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise ShapeMismatch(f"coeffs shape {coeffs.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            _check_same_grid(self, other)
            return SpectralField(self.grid, self.coeffs * other.coeffs)
        return SpectralField(self.grid, self.coeffs * other)

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ShapeMismatch("fields live on different grids")


def forward(f):
    return SpectralField(f.grid, np.fft.fft2(f.values) * (f.grid.dx * f.grid.dy))


def inverse(F, *, check_real=False):
    """Inverse transform; the imaginary part is dropped.

    With ``check_real=True`` the largest imaginary part relative to the largest
    real part is returned alongside the field.
    """
    g = F.grid
    raw = np.fft.ifft2(F.coeffs) / (g.dx * g.dy)
    field_ = PhysicalField(g, raw.real)
    if check_real:
        scale = max(np.abs(raw.real).max(), np.finfo(float).tiny)
        return field_, float(np.abs(raw.imag).max() / scale)
    return field_


def derivative_symbol(grid, lx, ly):
    """``(i xi)^lx (i eta)^ly`` with odd orders zeroed on the Nyquist line."""
    kx = grid.kx.copy()
    ky = grid.ky.copy()
    if lx % 2:
        kx[grid.nx // 2] = 0.0
    if ly % 2:
        ky[grid.ny // 2] = 0.0
    return ((1j * kx[:, None]) ** lx) * ((1j * ky[None, :]) ** ly)


def derivative(f, lx=0, ly=0):
    if lx < 0 or ly < 0:
        raise ValueError("derivative orders must be non-negative")
    if lx + ly > 8:
        raise ValueError("derivative order capped at 8")
    if lx == 0 and ly == 0:
        return f
    F = forward(f)
    return inverse(F * derivative_symbol(f.grid, lx, ly))


def x_mean_content(F):
    """Relative size of the xi = 0 column of a spectral field."""
    c = np.abs(F.coeffs)
    peak = c.max()
    if peak == 0.0:
        return 0.0
    return float(c[0, :].max() / peak)


def require_zero_x_mean(f_or_F, tol=ZERO_MEAN_TOL):
    F = forward(f_or_F) if isinstance(f_or_F, PhysicalField) else f_or_F
    content = x_mean_content(F)
    if content > tol:
        raise ZeroMeanViolation(
            f"xi=0 content {content:.3e} exceeds {tol:.1e} of the peak coefficient; "
            "the x anti-derivative is undefined for this field"
        )
    return F


def antiderivative_x(f, anchor="mean"):
    """Multiply by ``(i xi)^-1``.

    ``anchor="mean"`` gives the periodic anti-derivative with zero x-mean (the
    xi = 0 column is set to zero).  ``anchor="left"`` shifts each row so the
    result vanishes at the left edge ``x = -Lx/2``, which reproduces the
    whole-line anti-derivative ``int_{-inf}^x`` for data that decays before the
    box edge.
    """
    F = require_zero_x_mean(f)
    g = f.grid
    inv = np.zeros(g.nx, dtype=complex)
    k = g.kx.copy()
    k[g.nx // 2] = 0.0
    nz = k != 0.0
    inv[nz] = 1.0 / (1j * k[nz])
    coeffs = F.coeffs * inv[:, None]
    coeffs[0, :] = 0.0
    out = inverse(SpectralField(g, coeffs))
    if anchor == "mean":
        return out
    if anchor == "left":
        return PhysicalField(g, out.values - out.values[0:1, :])
    raise ValueError(f"unknown anchor {anchor!r}")


@dataclass(frozen=True)
class Norms:
    linf: float
    l2: float
    l1: float
    _values: np.ndarray = field(repr=False, compare=False)
    _dx: float = field(repr=False, compare=False)

    def sliced_l2_x(self, j):
        """``dx * sum_x f(x, y_j)**2`` (squared L2 norm of row j)."""
        return float(self._dx * np.sum(self._values[:, j] ** 2))

    def sliced_l1_x(self, j):
        return float(self._dx * np.sum(np.abs(self._values[:, j])))


def norms(f):
    v = f.values
    g = f.grid
    cell = g.dx * g.dy
    return Norms(
        linf=float(np.abs(v).max()),
        l2=float(np.sqrt(cell * np.sum(v * v))),
        l1=float(cell * np.sum(np.abs(v))),
        _values=v,
        _dx=g.dx,
    )


def dealias_mask(grid, p=None):
    """Retained-mode mask.

    Default is the 2/3 rule, ``|index| <= floor(n/3)``.  Passing ``p`` uses the
    sharper cutoff ``floor(n/2 / (1 + p/2))`` suited to a degree-(p+1) product.
    """
    factor = 2.0 / 3.0 if p is None else 1.0 / (1.0 + p / 2.0)
    ix = np.abs(np.fft.fftfreq(grid.nx, d=1.0 / grid.nx))
    iy = np.abs(np.fft.fftfreq(grid.ny, d=1.0 / grid.ny))
    cx = int(np.floor(grid.nx / 2 * factor + 1e-12))
    cy = int(np.floor(grid.ny / 2 * factor + 1e-12))
    return (ix[:, None] <= cx) & (iy[None, :] <= cy)


def dealias(F, p=None):
    return SpectralField(F.grid, F.coeffs * dealias_mask(F.grid, p))


def boundary_ratio(f):
    """max |f| on the outer ring of the box divided by max |f|."""
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0.0:
        return 0.0
    ring = max(v[0, :].max(), v[-1, :].max(), v[:, 0].max(), v[:, -1].max())
    return float(ring / peak)

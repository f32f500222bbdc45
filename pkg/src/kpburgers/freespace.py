"""Whole-plane linear solutions for Gaussian-bump data.

For ``u0 = GaussianBump`` the eta-integral of ``symbol * transform(u0)`` is a
complex Gaussian moment, available in closed form:

    int (i eta)^m exp(-A eta^2 + i y eta) d eta = (d/dy)^m [sqrt(pi/A) exp(-y^2/(4A))]

with ``A = sy^2/4 + i t eps / xi``.  What remains is a 1-D integral over xi.
On a grid it is done by an x-FFT, which periodizes in x only; the x period
is padded so that the parabolic ridge ``x ~ -eps y^2/(4t)`` does not wrap
back into the box.  Nothing is periodized in y, so the result is the plane
solution restricted to the box.  This is the reference used wherever a
decay law of the plane problem is measured.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureNonConvergence
from .initial_data import GaussianBump, hermite_phys
from .kernels import ModelParams
from .quadrature import panel_rule, phase_limited_edges
from .spectral import Grid2D, PhysicalField

KINDS = ("S", "K", "R")
MAX_PAD = 16
# The plane solution has an algebraic x-tail (the eta^2/xi phase makes the
# x-transform non-smooth at xi = 0), so x-periodization leaves an offset that
# shrinks roughly like 1/pad.  Eight periods keep it near 1e-4 of the peak.
DEFAULT_MIN_PAD = 8


def _eta_moment(m, y, A):
    """``(d/dy)^m [sqrt(pi/A) exp(-y^2/(4A))]`` for complex ``A``, Re A > 0."""
    rA = np.sqrt(A)
    z = y / (2 * rA)
    return np.sqrt(np.pi) / rA * (-1 / (2 * rA)) ** m * hermite_phys(m, z) * np.exp(-z * z)


def _time_factor(xi, t, kind):
    if kind == "S":
        return np.exp(1j * t * xi**3)
    if kind == "K":
        return np.ones_like(xi, dtype=complex)
    if kind == "R":
        return np.expm1(1j * t * xi**3)
    raise ValueError(f"kind must be one of {KINDS}")


def _integrand(xi, y, t, bump: GaussianBump, params: ModelParams, kind, l, j):
    """Phi(xi, y): the x-transform of the solution, times 1/(2 pi)^2."""
    safe = np.where(xi == 0, 1.0, xi)
    A = bump.sy**2 / 4 + 1j * t * params.eps / safe
    J = _eta_moment(bump.dy_order + j, y, A)
    head = (bump.amplitude * (1j * xi) ** (1 + l) * np.pi * bump.sx * bump.sy
            * np.exp(-(bump.sx**2 / 4 + params.nu * t) * xi**2) * _time_factor(xi, t, kind))
    out = head * J / (4 * np.pi**2)
    return np.where(xi == 0, 0.0, out)


def auto_pad(grid: Grid2D, t, bump: GaussianBump, params: ModelParams):
    """Integer factor for the x period so the ridge stays inside one period."""
    # the ridge carries full amplitude out to |y| ~ 3 t^{3/2}
    ridge_y = min(grid.Ly / 2, 4 * t**1.5)
    shift = ridge_y**2 / (4 * t) if t > 0 else 0.0
    width = 10 * np.sqrt(params.nu * t + bump.sx**2) + 3 * t ** (1 / 3) + grid.Lx
    return int(min(MAX_PAD, max(1, np.ceil((shift + width) / grid.Lx))))


def free_space_field(grid: Grid2D, t, bump: GaussianBump, params=ModelParams(),
                     kind="S", l=0, j=0, pad=None) -> PhysicalField:
    """``d_x^l d_y^j`` of the plane solution ``T(t) * u0`` sampled on the grid.

    ``kind`` selects ``S`` (full flow), ``K`` (no xi^3) or ``R = S - K``.
    ``t = 0`` with ``kind="S"`` or ``"K"`` returns the data itself.  ``pad`` is
    the x-period in box lengths; by default the larger of :func:`auto_pad` and
    ``DEFAULT_MIN_PAD``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if pad is None:
        pad = max(DEFAULT_MIN_PAD, auto_pad(grid, t, bump, params))
    P = int(pad)
    n = grid.nx * P
    Lp = grid.Lx * P
    xi = 2 * np.pi * np.fft.fftfreq(n, d=Lp / n)
    phi = _integrand(xi[:, None], grid.y[None, :], t, bump, params, kind, l, j)
    # rotate so the first output sample sits at x[0]
    phi = phi * np.exp(1j * xi[:, None] * grid.x[0])
    vals = np.fft.ifft(phi, axis=0) * (n * 2 * np.pi / Lp)
    return PhysicalField(grid, vals[: grid.nx].real)


def free_space_point(x, y, t, bump: GaussianBump, params=ModelParams(), kind="S",
                     l=0, j=0, tol=1e-12, max_doublings=6):
    """Same quantity as :func:`free_space_field` at arbitrary points.

    Direct quadrature in ``xi = +-s^2`` on phase-limited Gauss-Legendre panels,
    independent of any grid; used as an oracle.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    xf, yf = x.ravel(), y.ravel()
    decay = params.nu * t + bump.sx**2 / 4
    smax = (S_LIMIT / decay) ** 0.25
    bmax = float(np.abs(xf).max() + np.abs(yf).max() ** 2 / (4 * max(t, 1e-12))) if xf.size else 0.0
    cubic = 0.0 if kind == "K" else t

    def rule(refine):
        rate = lambda s: 6 * cubic * s**5 + 2 * bmax * s  # noqa: E731
        edges = phase_limited_edges(smax, rate, max_increment=0.5 * np.pi / 2**refine)
        s, w = panel_rule(edges, 16)
        total = np.zeros(xf.shape, dtype=complex)
        mag = np.zeros(xf.shape)
        step = max(1, (1 << 21) // s.size)
        for sign in (1.0, -1.0):
            xi = sign * s * s
            jac = 2 * s * w
            for lo in range(0, xf.size, step):
                sl = slice(lo, lo + step)
                vals = _integrand(xi[None, :], yf[sl, None], t, bump, params, kind, l, j)
                total[sl] += (vals * np.exp(1j * xi[None, :] * xf[sl, None])) @ jac
                mag[sl] += np.abs(vals) @ jac
        return total.real, mag

    prev, _ = rule(0)
    for k in range(1, max_doublings + 1):
        cur, mag = rule(k)
        # relative to the L1 size of the integrand, so tiny values near
        # cancellation do not demand accuracy below roundoff
        scale = np.maximum(np.maximum(np.abs(cur), mag), np.finfo(float).tiny)
        if np.all(np.abs(cur - prev) <= tol * scale):
            return cur.reshape(x.shape) if x.ndim else float(cur[0])
        prev = cur
    raise QuadratureNonConvergence("free-space point quadrature did not converge")


S_LIMIT = 36.85

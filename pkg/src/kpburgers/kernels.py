"""Kernel evaluators and spectral multipliers of the linear flow.

Pointwise kernels use the symmetric convention ``hat f = (1/2pi) int f e^{-ix.xi}``:

* ``S(t)``: multiplier ``exp(-nu t xi^2 + i t (xi^3 - eps eta^2 / xi))``;
* ``K(t)``: the same without ``xi^3``, self-similar,
  ``K(x, y, t) = t^{-5/4} K*(x t^{-1/2}, y t^{-3/4})``;
* ``K*``: a one-dimensional integral over ``r`` against ``r^{-1/4} e^{-r}``.

Both ``K*`` and ``S`` depend on ``(x, y)`` only through one scalar (``a`` and
``b`` below), which is what makes them cheap to tabulate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from ._accel import trig_sum
from .errors import ConfigError, NonPositiveTime, QuadratureNonConvergence
from .quadrature import gauss_laguerre, panel_rule, phase_limited_edges
from .spectral import Grid2D, PhysicalField, SpectralField, antiderivative_x, derivative

PI32 = np.pi ** 1.5

# e^{-nu t s^4} < 1e-16 beyond s^4 = S_CUT / (nu t)
S_CUT = 36.85


@dataclass(frozen=True)
class ModelParams:
    p: int = 2
    eps: int = 1
    nu: float = 1.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ConfigError(f"p must be an integer >= 2, got {self.p}")
        if self.eps not in (-1, 1):
            raise ConfigError(f"eps must be -1 or 1 (eps in {{-1,1}}), got {self.eps}")
        if not (np.isfinite(self.nu) and self.nu > 0):
            raise ConfigError(f"nu must be positive, got {self.nu}")


@dataclass(frozen=True)
class QuadConfig:
    n_nodes: int = 64
    tol: float = 1e-10
    max_doublings: int = 6

    def __post_init__(self):
        if self.n_nodes < 32:
            raise ConfigError("n_nodes must be at least 32")
        if not (0 < self.tol <= 1e-4):
            raise ConfigError("tol must lie in (0, 1e-4]")
        if self.max_doublings < 0:
            raise ConfigError("max_doublings must be non-negative")


@dataclass(frozen=True)
class KernelSample:
    x: float
    y: float
    t: float
    l: int
    value: float


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise NonPositiveTime("kernel evaluation needs t > 0")
    return t


def K_sup_bound(l, t, nu):
    """Sup bound of ``|d_x^l K(., ., t)|``; equals the integral of |integrand|."""
    return gamma(l / 2 + 0.75) / (4 * PI32 * nu ** (0.75 + l / 2)) * t ** (-1.25 - l / 2)


def remainder_sup_bound(l, t, nu):
    """Sup bound of ``|d_x^l (S - K)(., ., t)|``."""
    return gamma(l / 2 + 2.25) / (4 * PI32 * nu ** (l / 2 + 2.25)) * t ** (-1.75 - l / 2)


# ---------------------------------------------------------------------------
# K*: generalized Gauss-Laguerre


def _laguerre_integral(a, l, eps, quad):
    """``I(a) = int_0^inf r^al e^{-r} cos(a sqrt(r) + c) dr``, al = l/2 - 1/4.

    ``c = -pi eps/4 + l pi/2``.  The cosine is split into ``cos(a sqrt r)``,
    integrated against ``r^al``, and ``sin(a sqrt r)/sqrt r``, integrated
    against ``r^(al+1/2)``; both are entire in ``r`` so Gauss-Laguerre
    converges geometrically.  Nodes double until successive values agree to
    ``quad.tol * Gamma(al + 1)`` at every point.
    """
    a = np.asarray(a, dtype=float)
    flat = a.ravel()
    alpha = l / 2 - 0.25
    c = -np.pi * eps / 4 + l * np.pi / 2
    cc, sc = np.cos(c), np.sin(c)
    scale = gamma(alpha + 1)

    def rule(n, idx):
        r1, w1 = gauss_laguerre(alpha, n)
        r2, w2 = gauss_laguerre(alpha + 0.5, n)
        q1, q2 = np.sqrt(r1), np.sqrt(r2)
        part1 = trig_sum(flat[idx], q1, w1, np.zeros(n))
        part2 = trig_sum(flat[idx], q2, w2 / q2, np.full(n, -0.5 * np.pi))
        return cc * part1 - sc * part2

    out = np.empty(flat.size)
    todo = np.arange(flat.size)
    n = quad.n_nodes
    prev = rule(n, todo)
    for _ in range(quad.max_doublings):
        if todo.size == 0:
            break
        n *= 2
        cur = rule(n, todo)
        ok = np.abs(cur - prev) <= quad.tol * scale
        out[todo[ok]] = cur[ok]
        todo = todo[~ok]
        prev = cur[~ok]
    if todo.size:
        worst = flat[todo][np.argmax(np.abs(flat[todo]))]
        raise QuadratureNonConvergence(
            f"K* quadrature did not reach tol={quad.tol:g} with {n} nodes "
            f"(|a| up to {abs(worst):.3g}); outside the recommended envelope"
        )
    return out.reshape(a.shape)


def kstar_argument(X, Y, params):
    """Scalar ``a = (X + eps Y^2/4)/sqrt(nu)`` through which K* depends on (X, Y)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return (X + params.eps * Y * Y / 4) / np.sqrt(params.nu)


def eval_Kstar(x, y, params=ModelParams(), quad=QuadConfig(), l=0):
    """``d_X^l K*(x, y)``; broadcasts over array inputs."""
    a = kstar_argument(x, y, params)
    pref = 1.0 / (4 * PI32 * params.nu ** (0.75 + l / 2))
    val = pref * _laguerre_integral(a, l, params.eps, quad)
    return float(val) if val.ndim == 0 else val


def eval_K(x, y, t, l=0, params=ModelParams(), quad=QuadConfig()):
    """``d_x^l K(x, y, t) = t^{-5/4-l/2} (d^l K*)(x t^{-1/2}, y t^{-3/4})``."""
    if l < 0:
        raise ValueError("derivative order must be non-negative")
    t = _check_time(t)
    X = np.asarray(x, dtype=float) * t ** -0.5
    Y = np.asarray(y, dtype=float) * t ** -0.75
    val = t ** (-1.25 - l / 2) * eval_Kstar(X, Y, params, quad, l)
    val = np.asarray(val)
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# S: one-dimensional oscillatory integral on Gauss-Legendre panels


def _s_rule(t, bmax, nu, refine, nodes_per_panel=16):
    """Nodes ``q = s^2`` and weights for ``int_0^inf`` in ``xi = s^2``.

    Weights include the Jacobian ``2 s``, ``|xi|^{1/2} = s`` and the
    dissipative factor.  ``refine`` halves the admissible phase increment.
    """
    smax = (S_CUT / (nu * t)) ** 0.25
    rate = lambda s: 6 * t * s**5 + 2 * bmax * s  # noqa: E731
    edges = phase_limited_edges(smax, rate, max_increment=0.5 * np.pi / 2**refine)
    s, w = panel_rule(edges, nodes_per_panel)
    q = s * s
    return q, w * 2 * q * np.exp(-nu * t * q * q)


def _s_integral(b, t, l, params, quad):
    b = np.asarray(b, dtype=float)
    flat = b.ravel()
    bmax = float(np.abs(flat).max()) if flat.size else 0.0
    c = l * np.pi / 2 - np.pi * params.eps / 4
    scale = gamma(l / 2 + 0.75) / (params.nu * t) ** (l / 2 + 0.75)

    def rule(refine):
        q, w = _s_rule(t, bmax, params.nu, refine)
        return 2 * trig_sum(flat, q, w * q**l, t * q**3 + c)

    prev = rule(0)
    for k in range(1, quad.max_doublings + 1):
        cur = rule(k)
        if np.all(np.abs(cur - prev) <= quad.tol * scale):
            return cur.reshape(b.shape)
        prev = cur
    raise QuadratureNonConvergence(
        f"S quadrature did not reach tol={quad.tol:g} after {quad.max_doublings} panel doublings"
    )


def s_argument(x, y, t, params):
    """Scalar ``b = x + eps y^2/(4t)`` through which S depends on (x, y)."""
    return np.asarray(x, dtype=float) + params.eps * np.asarray(y, dtype=float) ** 2 / (4 * t)


def eval_S(x, y, t, l=0, params=ModelParams(), quad=QuadConfig(), return_imag=False):
    """``d_x^l S(x, y, t)`` by direct quadrature of the xi-integral.

    With ``return_imag=True`` the two half-lines are integrated separately in
    complex arithmetic and ``(value, imaginary residue)`` is returned.
    """
    if l < 0:
        raise ValueError("derivative order must be non-negative")
    t = float(_check_time(t))
    b = s_argument(x, y, t, params)
    pref = t**-0.5 / (4 * PI32)
    val = pref * _s_integral(b, t, l, params, quad)
    if return_imag:
        imag = pref * _s_imag_residue(b, t, l, params)
        if np.ndim(val) == 0:
            return float(val), float(imag)
        return val, imag
    return float(val) if np.ndim(val) == 0 else val


def _s_imag_residue(b, t, l, params):
    bf = np.atleast_1d(b).astype(float)
    q, w = _s_rule(t, float(np.abs(bf).max()), params.nu, 1)
    total = np.zeros(bf.shape, dtype=complex)
    for sign in (1.0, -1.0):
        xi = sign * q
        ph = t * xi**3 - 0.25 * np.pi * params.eps * sign
        amp = w * (1j * xi) ** l
        total += np.exp(1j * (np.multiply.outer(bf, xi) + ph)) @ amp
    return total.imag.reshape(np.shape(b))


# ---------------------------------------------------------------------------
# spectral multipliers


def _dispersion_phase(grid: Grid2D, t, params, with_cubic):
    xi = grid.kx[:, None]
    eta = grid.ky[None, :]
    safe = np.where(xi == 0, 1.0, xi)
    phase = -params.eps * eta**2 / safe
    if with_cubic:
        phase = phase + xi**3
    phase = np.broadcast_to(phase, grid.shape).copy()
    # undefined at xi = 0; the x-Nyquist column must stay real for real data
    phase[0, :] = 0.0
    phase[grid.nx // 2, :] = 0.0
    return t * phase


def _symbol(grid, t, params, with_cubic):
    if t < 0:
        raise NonPositiveTime("symbols need t >= 0")
    damp = np.exp(-params.nu * t * grid.kx**2)[:, None]
    return SpectralField(grid, damp * np.exp(1j * _dispersion_phase(grid, t, params, with_cubic)))


def symbol_S(grid: Grid2D, t: float, params=ModelParams()) -> SpectralField:
    """Multiplier ``exp(-nu t xi^2 + i t (xi^3 - eps eta^2/xi))`` (no 1/2pi)."""
    return _symbol(grid, t, params, True)


def symbol_K(grid: Grid2D, t: float, params=ModelParams()) -> SpectralField:
    """Multiplier ``exp(-nu t xi^2 - i t eps eta^2/xi)`` (no 1/2pi)."""
    return _symbol(grid, t, params, False)


def linear_operator(grid: Grid2D, params, kind="S"):
    """Generator ``L`` with ``symbol = exp(t L)``; zero on the xi = 0 column."""
    phase = _dispersion_phase(grid, 1.0, params, kind == "S")
    L = -params.nu * grid.kx[:, None] ** 2 + 1j * phase
    return np.asarray(L)


# ---------------------------------------------------------------------------
# mass profile and leading profile


@dataclass(frozen=True, eq=False)
class SampledProfile:
    y: np.ndarray
    values: np.ndarray
    j: int = 0

    @property
    def dy(self):
        return float(self.y[1] - self.y[0])

    def integral(self):
        return float(self.dy * np.sum(self.values))


def profile_Mj(u0: PhysicalField, j: int = 0) -> SampledProfile:
    """``M_j(y_k) = dx * sum_x d_x^{-1} d_y^j u0``.

    The anti-derivative is anchored at the left edge of the box, which is the
    whole-line anti-derivative for data concentrated inside the box.  The
    zero-mean periodic anti-derivative would make every row sum vanish.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    g = u0.grid
    field = derivative(u0, 0, j) if j else u0
    anti = antiderivative_x(field, anchor="left")
    return SampledProfile(g.y.copy(), g.dx * anti.values.sum(axis=0), j)


def eval_leading_profile(x, y, t, l, Mj: SampledProfile, params=ModelParams(),
                         quad=QuadConfig(), Mj_fine: SampledProfile | None = None,
                         profile_tol=1e-6):
    """``d_x^l of int d_x K(x, y - w, t) M_j(w) dw`` by the trapezoid rule in w.

    Samples where ``|M_j|`` is below ``1e-17`` of its peak are skipped.  When
    ``Mj_fine`` (the profile on a grid with half the spacing) is given, the two
    sums must agree to ``profile_tol`` relative to the larger result.
    """
    val = _profile_conv(x, y, t, l, Mj, params, quad)
    if Mj_fine is not None:
        fine = _profile_conv(x, y, t, l, Mj_fine, params, quad)
        ref = max(np.abs(fine).max(), np.finfo(float).tiny)
        if np.abs(fine - val).max() > profile_tol * ref:
            raise QuadratureNonConvergence("leading profile not converged under dy halving")
        val = fine
    return float(val) if np.ndim(val) == 0 else val


def _profile_conv(x, y, t, l, Mj, params, quad):
    t = float(_check_time(t))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    vals = np.asarray(Mj.values, dtype=float)
    peak = np.abs(vals).max() if vals.size else 0.0
    if peak == 0.0:
        return np.zeros(x.shape) if x.ndim else 0.0
    keep = np.abs(vals) > 1e-17 * peak
    w = np.asarray(Mj.y)[keep]
    m = vals[keep] * Mj.dy
    kern = eval_K(x[..., None], y[..., None] - w, t, l + 1, params, quad)
    out = np.asarray(kern) @ m
    return out

"""Decay fits, the effective mass and the large-time checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateM, InsufficientSamples, MissingFlux
from .kernels import ModelParams, QuadConfig, eval_Kstar, profile_Mj
from .spectral import PhysicalField, derivative

DEGENERATE_M = 1e-10
MIN_FIT_SAMPLES = 5


@dataclass(frozen=True)
class DecaySeries:
    t: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and values must be 1-D and of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InsufficientSamples(f"series {self.label!r} holds non-finite samples")
        if np.any(v <= 0):
            raise ValueError(f"series {self.label!r} must be positive")
        if np.any(np.diff(t) <= 0):
            raise ValueError(f"series {self.label!r} times must increase strictly")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_pairs(cls, entries, label=""):
        arr = np.asarray(list(entries), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], label)

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class FitResult:
    slope: float
    log_amplitude: float
    residual_rms: float
    window: tuple
    n_samples: int

    @property
    def amplitude(self):
        return math.exp(self.log_amplitude)


def fit_decay(series: DecaySeries, window: Optional[Sequence[float]] = None) -> FitResult:
    """Least-squares line through ``(log t, log value)``.

    The default window is the last decade of the series.
    """
    t, v = series.t, series.values
    if t.size == 0:
        raise InsufficientSamples("empty series")
    if window is None:
        window = (t[-1] / 10.0, t[-1])
    lo, hi = float(window[0]), float(window[1])
    sel = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    if sel.sum() < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"{int(sel.sum())} samples in window [{lo:g}, {hi:g}]; need {MIN_FIT_SAMPLES}"
        )
    X = np.log(t[sel])
    Y = np.log(v[sel])
    A = np.column_stack([X, np.ones_like(X)])
    (slope, icpt), *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - (slope * X + icpt)
    return FitResult(float(slope), float(icpt), float(np.sqrt(np.mean(resid**2))),
                     (float(t[sel][0]), float(t[sel][-1])), int(sel.sum()))


# ---------------------------------------------------------------------------
# U_j, Q_j and the effective mass


@dataclass(frozen=True, eq=False)
class SampledUj:
    y: np.ndarray
    times: np.ndarray
    values: np.ndarray  # shape (ny, n_times)
    j: int


def _flux_y_derivative(traj, k, j):
    f = traj.flux_snapshots[k]
    return derivative(f, 0, j).values if j else f.values


def compute_Uj(traj, j: int) -> SampledUj:
    """``U_j(y_k, tau_n) = -(1/(p+1)) dx sum_x d_y^j flux(x, y_k, tau_n)``."""
    if not traj.record_flux or not traj.flux_snapshots:
        raise MissingFlux("U_j needs flux snapshots")
    g = traj.grid
    p1 = traj.params.p + 1
    cols = [-(g.dx / p1) * _flux_y_derivative(traj, k, j).sum(axis=0) for k in range(len(traj.times))]
    return SampledUj(g.y.copy(), np.asarray(traj.times), np.column_stack(cols), j)


def _cut_index(times, T_cut):
    if T_cut > times[-1] * (1 + 1e-12):
        raise ValueError(f"T_cut={T_cut} exceeds the trajectory horizon {times[-1]}")
    return int(np.searchsorted(times, T_cut * (1 + 1e-12), side="right"))


def flux_l1_series(traj, j: int):
    """``(tau, (1/(p+1)) ||d_y^j flux(tau)||_L1)`` over all snapshots."""
    if not traj.record_flux or not traj.flux_snapshots:
        raise MissingFlux("flux snapshots required")
    g = traj.grid
    p1 = traj.params.p + 1
    vals = [g.dx * g.dy * np.abs(_flux_y_derivative(traj, k, j)).sum() / p1 for k in range(len(traj.times))]
    return np.asarray(traj.times), np.asarray(vals)


def tail_amplitude(traj, j: int, T_cut: float) -> float:
    """Least-squares amplitude C of ``C (1+tau)^{-3/2}`` on ``[T_cut/10, T_cut]``.

    The fit is done in log space with the exponent held fixed.
    """
    tau, vals = flux_l1_series(traj, j)
    window = (tau >= T_cut / 10) & (tau <= T_cut * (1 + 1e-12))
    if window.sum() >= 2 and not np.any(vals[window] > 0):
        return 0.0
    sel = window & (vals > 0)
    if sel.sum() < 2:
        raise InsufficientSamples("too few flux samples for the tail fit")
    return float(np.exp(np.mean(np.log(vals[sel]) + 1.5 * np.log1p(tau[sel]))))


@dataclass(frozen=True, eq=False)
class QResult:
    y: np.ndarray
    values: np.ndarray
    tail_l1: float
    T_cut: float

    def integral(self):
        return float((self.y[1] - self.y[0]) * np.sum(self.values))


def compute_Qj(u0: PhysicalField, traj, j: int, T_cut: float) -> QResult:
    """``Q_j(w) = M_j(w) + int_0^{T_cut} U_j(w, tau) dtau`` (trapezoid in tau)."""
    U = compute_Uj(traj, j)
    n = _cut_index(U.times, T_cut)
    Mj = profile_Mj(u0, j)
    if n > 1:
        integral = trapezoid(U.values[:, :n], U.times[:n], axis=1)
    else:
        integral = np.zeros_like(Mj.values)
    C = tail_amplitude(traj, j, T_cut) if n > 2 else 0.0
    return QResult(U.y, Mj.values + integral, 2 * C / math.sqrt(1 + T_cut), float(T_cut))


@dataclass(frozen=True)
class MResult:
    linear_part: float
    duhamel_part: float
    tail_bound: float
    M: float
    j: int
    T_cut: float = 0.0
    tail_amplitude: float = 0.0


def compute_M(u0: PhysicalField, traj, j: int, T_cut: float, params: Optional[ModelParams] = None) -> MResult:
    """Effective mass ``M = linear_part - duhamel_part`` with a tail estimate.

    ``linear_part = dx dy sum d_x^{-1} d_y^j u0`` with the whole-line
    anti-derivative; ``duhamel_part = (1/(p+1)) int_0^{T_cut} dx dy sum d_y^j
    flux dtau``; ``tail_bound = 2 C (1+T_cut)^{-1/2}``.
    """
    if not traj.record_flux or not traj.flux_snapshots:
        raise MissingFlux("compute_M needs a trajectory recorded with flux")
    params = params or traj.params
    g = u0.grid
    linear = profile_Mj(u0, j).integral()
    times = np.asarray(traj.times)
    n = _cut_index(times, T_cut)
    p1 = params.p + 1
    totals = np.array([g.dx * g.dy * _flux_y_derivative(traj, k, j).sum() for k in range(n)])
    duh = float(trapezoid(totals, times[:n]) / p1) if n > 1 else 0.0
    C = tail_amplitude(traj, j, T_cut) if n > 2 else 0.0
    tail = 2 * C / math.sqrt(1 + T_cut)
    return MResult(float(linear), duh, float(tail), float(linear - duh), j, float(T_cut), C)


def flux_increment_ratios(traj, j: int = 0):
    """Ratios of successive half-decade increments of ``int ||flux||_L1 dtau``.

    Increments are taken over ``[a, a*sqrt(10)]`` stepping down from the
    horizon; ratios above 1 mean the running integral is converging.
    """
    tau, vals = flux_l1_series(traj, j)
    edges = [tau[-1]]
    while edges[-1] / math.sqrt(10) >= max(tau[1], 1.0):
        edges.append(edges[-1] / math.sqrt(10))
    edges = edges[::-1]
    incs = []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (tau >= a * (1 - 1e-12)) & (tau <= b * (1 + 1e-12))
        incs.append(float(trapezoid(vals[sel], tau[sel])))
    incs = np.asarray(incs)
    return incs[:-1] / incs[1:]


# ---------------------------------------------------------------------------
# lower bound and sliced limit


@dataclass(frozen=True)
class LowerBoundReport:
    c_inf: float
    ratio: float
    passed: bool
    window: tuple


def check_lower_bound(series: DecaySeries, M, l: int = 0) -> LowerBoundReport:
    """Empirical lower-bound check on ``t^{7/4+l/2} value / |M|``.

    Over the last half-decade ``c_inf`` is the minimum of that prefactor.  The
    check passes when ``c_inf > 0`` and the prefactor varies by less than a
    factor 2 there.
    """
    m = M.M if isinstance(M, MResult) else float(M)
    if not abs(m) >= DEGENERATE_M:
        raise DegenerateM(f"|M| = {abs(m):.3e} is below {DEGENERATE_M:g}; the lower bound is vacuous")
    t, v = series.t, series.values
    if t[-1] < 10 * t[0] * (1 - 1e-12):
        raise InsufficientSamples("series must span at least one decade of t")
    lo = t[-1] / math.sqrt(10)
    sel = t >= lo * (1 - 1e-12)
    if sel.sum() < 2:
        raise InsufficientSamples("fewer than two samples in the last half-decade")
    pref = t[sel] ** (1.75 + l / 2) * v[sel] / abs(m)
    c_inf = float(pref.min())
    ratio = float(pref.max() / pref.min()) if c_inf > 0 else math.inf
    return LowerBoundReport(c_inf, ratio, bool(c_inf > 0 and ratio < 2), (float(t[sel][0]), float(t[-1])))


def sliced_l2_reference(mass: float, params=ModelParams(), quad=QuadConfig(), X_lo=-150.0, X_hi=40.0, n=8001):
    """``mass^2 int (d_X K*(X, 0))^2 dX`` by quadrature of the self-similar kernel.

    This is the large-time value of ``t^3 int u(x, 0, t)^2 dx`` when the
    linear solution is replaced by ``mass * d_x K``.
    """
    s = math.sqrt(params.nu)
    X = np.linspace(X_lo * s, X_hi * s, n)
    dK = eval_Kstar(X, np.zeros_like(X), params, quad, l=1)
    return float(mass**2 * trapezoid(dK**2, X))


@dataclass(frozen=True, eq=False)
class SlicedL2Report:
    times: np.ndarray
    rows: tuple
    values: np.ndarray  # t^3 dx sum u^2, shape (n_times, n_rows)
    l1_prefactors: np.ndarray  # t^{5/4} dx sum |u|
    target: float
    reference: float
    mass: float

    @property
    def final(self):
        return self.values[-1]

    def relative_error(self, row=0):
        return float(abs(self.values[-1, row] - self.target) / abs(self.target))


def sliced_l2_limit(times, fields, y_rows, u0: PhysicalField, params=ModelParams(),
                    quad=QuadConfig(), with_reference=True) -> SlicedL2Report:
    """``t^3 dx sum_x u(x, y_row, t)^2`` against its large-time constant.

    ``target`` is ``(sqrt(pi)/(16 nu^2)) mass^2`` with
    ``mass = int int d_x^{-1} u0``.  ``reference`` is the same limit
    evaluated from the self-similar kernel (see :func:`sliced_l2_reference`).
    """
    mass = profile_Mj(u0, 0).integral()
    if abs(mass) < DEGENERATE_M:
        raise DegenerateM("int int d_x^{-1} u0 vanishes; the sliced limit is zero")
    rows = tuple(int(r) for r in np.atleast_1d(y_rows))
    times = np.asarray(times, dtype=float)
    vals = np.empty((times.size, len(rows)))
    l1 = np.empty_like(vals)
    for i, (t, f) in enumerate(zip(times, fields)):
        dx = f.grid.dx
        for k, r in enumerate(rows):
            col = f.values[:, r]
            vals[i, k] = t**3 * dx * np.sum(col * col)
            l1[i, k] = t**1.25 * dx * np.sum(np.abs(col))
    target = math.sqrt(math.pi) / (16 * params.nu**2) * mass**2
    ref = sliced_l2_reference(mass, params, quad) if with_reference else float("nan")
    return SlicedL2Report(times, rows, vals, l1, target, ref, mass)


def sup_series(traj, l: int = 0, j: int = 0, t_min: float = 0.0, label=None) -> DecaySeries:
    """``max |d_x^l d_y^j u|`` at each snapshot with ``t >= t_min`` (and t > 0)."""
    pts = []
    for t, u in zip(traj.times, traj.u_snapshots):
        if t <= 0 or t < t_min:
            continue
        f = derivative(u, l, j) if (l or j) else u
        pts.append((t, float(np.abs(f.values).max())))
    return DecaySeries.from_pairs(pts, label or f"sup d_x^{l} d_y^{j} u")

"""Quadrature rules: generalized Gauss-Laguerre and panelled Gauss-Legendre."""

from __future__ import annotations

import threading
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

_lock = threading.Lock()
_laguerre_cache: dict = {}


def gauss_laguerre(alpha: float, n: int):
    """Nodes and weights for ``int_0^inf r^alpha e^{-r} f(r) dr``.

    Golub-Welsch on the Jacobi matrix of the generalized Laguerre recurrence.
    Unlike ``scipy.special.roots_genlaguerre`` this stays finite for n in the
    thousands.  Results are cached per ``(alpha, n)`` and returned read-only.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if alpha <= -1.0:
        raise ValueError("alpha must exceed -1")
    key = (float(alpha), int(n))
    hit = _laguerre_cache.get(key)
    if hit is not None:
        return hit
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    nodes, vecs = eigh_tridiagonal(diag, off)
    weights = np.exp(gammaln(alpha + 1.0)) * vecs[0, :] ** 2
    nodes.flags.writeable = False
    weights.flags.writeable = False
    with _lock:
        _laguerre_cache.setdefault(key, (nodes, weights))
    return _laguerre_cache[key]


@lru_cache(maxsize=16)
def _legendre(m):
    x, w = np.polynomial.legendre.leggauss(m)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_rule(edges, m=16):
    """Composite Gauss-Legendre rule with ``m`` nodes on each panel."""
    edges = np.asarray(edges, dtype=float)
    gx, gw = _legendre(m)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * gx).ravel(), (half * gw).ravel()


def phase_limited_edges(upper, phase_rate, max_increment=0.5 * np.pi, min_panels=4):
    """Panel edges on ``[0, upper]`` with phase growth per panel bounded.

    ``phase_rate(s)`` must be a non-decreasing bound on the phase derivative.
    Panels are placed greedily from the left so that ``width * rate(right)``
    does not exceed ``max_increment``.
    """
    edges = [0.0]
    floor_width = upper / min_panels
    while edges[-1] < upper:
        left = edges[-1]
        width = floor_width
        # shrink until the right-end rate respects the increment cap
        while width * phase_rate(min(left + width, upper)) > max_increment:
            width *= 0.5
        edges.append(min(left + width, upper))
    return np.array(edges)

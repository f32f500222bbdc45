"""NumPy fallback for the compiled trigonometric sum."""

import numpy as np

# Bound on the temporary (points x nodes) block, in elements.
_BLOCK = 1 << 20


def trig_sum(a, nodes, weights, offsets):
    """out[p] = sum_k weights[k] * cos(a[p] * nodes[k] + offsets[k])."""
    a = np.asarray(a, dtype=float)
    flat = a.ravel()
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    if not (nodes.shape == weights.shape == offsets.shape) or nodes.ndim != 1:
        raise ValueError("nodes, weights and offsets must have equal length")
    out = np.empty(flat.size)
    step = max(1, _BLOCK // max(nodes.size, 1))
    for lo in range(0, flat.size, step):
        chunk = flat[lo:lo + step]
        out[lo:lo + step] = np.cos(np.multiply.outer(chunk, nodes) + offsets) @ weights
    return out.reshape(a.shape)

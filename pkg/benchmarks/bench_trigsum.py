"""Time the compiled trig-sum kernel against the NumPy fallback.

    python3 benchmarks/bench_trigsum.py [--repeat 5]

The workload mirrors a K* evaluation: a grid of phase arguments against a
few hundred Laguerre nodes.
"""

import argparse
import timeit

import numpy as np

from kpburgers import _trigsum_py
from kpburgers.quadrature import gauss_laguerre

try:
    from kpburgers import _trigsum
except ImportError:
    _trigsum = None


def workload(m, n, seed=0):
    rng = np.random.default_rng(seed)
    nodes, weights = gauss_laguerre(-0.25, n)
    a = rng.uniform(-5, 5, m)
    offsets = rng.uniform(-np.pi, np.pi, n)
    return a, np.asarray(nodes), np.asarray(weights), offsets


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"python": _trigsum_py.trig_sum}
    if _trigsum is not None:
        backends["cython"] = _trigsum.trig_sum
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'points':>8} {'nodes':>6} " + " ".join(f"{b:>12}" for b in backends) + "   speedup  max|diff|")
    for m, n in [(1_000, 64), (10_000, 256), (100_000, 256), (20_000, 1024)]:
        args_ = workload(m, n)
        times, outs = {}, {}
        for name, fn in backends.items():
            outs[name] = fn(*args_)
            times[name] = min(timeit.repeat(lambda: fn(*args_), number=1, repeat=args.repeat))
        cols = " ".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if "cython" in backends:
            speed = times["python"] / times["cython"]
            diff = np.abs(outs["python"] - outs["cython"]).max()
            print(f"{m:>8} {n:>6} {cols}   {speed:6.2f}x  {diff:.1e}")
        else:
            print(f"{m:>8} {n:>6} {cols}")


if __name__ == "__main__":
    main()

"""Benchmark the characteristic-lattice march: compiled vs pure numpy.

Usage: python benchmarks/bench_march.py [n ...]

Both backends march the same Goursat recurrence; the compiled extension
runs the double loop in C, the fallback vectorizes over antidiagonals.
The two results are compared to machine precision before timing.
"""

import sys
import time

import numpy as np

from bcwave import _march_py
from bcwave.goursat import solve_kernels
from bcwave.grid import UniformGrid
from bcwave.potentials import GaussianPotential

try:
    from bcwave import _march as _march_c
except ImportError:
    _march_c = None


def _setup(n):
    p = GaussianPotential(amplitude=1.0, center=0.2, width=0.3)
    grid = UniformGrid(2.0, n)
    h = grid.h
    m = n
    qd = p(0.5 * h * (np.arange(-m, m + 1)))
    x = h * np.arange(n + 1)
    boundary = -0.25 * p.cumint(x)
    W = np.zeros((n + 1, n + 1))
    W[np.arange(n + 1), 0] = boundary
    W[0, np.arange(n + 1)] = boundary
    return W, qd, h


def _time(fn, reps):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(sizes):
    print("%8s %12s %12s %8s" % ("n", "cython [s]", "python [s]", "speedup"))
    for n in sizes:
        W0, qd, h = _setup(n)
        Wp = W0.copy()
        _march_py.march(Wp, qd, h)
        if _march_c is None:
            print("%8d %12s %12.6f %8s"
                  % (n, "n/a", _time(lambda: _march_py.march(W0.copy(), qd, h), 3),
                     "n/a"))
            continue
        Wc = W0.copy()
        _march_c.march(Wc, qd, h)
        err = np.max(np.abs(Wc - Wp))
        assert err < 1e-12 * max(1.0, np.max(np.abs(Wp))), err
        tc = _time(lambda: _march_c.march(W0.copy(), qd, h), 5)
        tp = _time(lambda: _march_py.march(W0.copy(), qd, h), 5)
        print("%8d %12.6f %12.6f %7.1fx" % (n, tc, tp, tp / tc))


if __name__ == "__main__":
    sizes = [int(a) for a in sys.argv[1:]] or [128, 256, 512, 1024, 2048]
    main(sizes)

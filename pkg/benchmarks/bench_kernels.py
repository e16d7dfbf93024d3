"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat 5] [--cells 20000]

The first numba call compiles (or loads the on-disk cache); it is timed
separately and excluded from the steady-state figures.
"""

import argparse
import time

import numpy as np

from rlq import _kernels
from rlq.distributions import Exponential


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(cells, rng):
    tail = 0.95 + 0.05 * np.arange(cells) / cells
    col = Exponential(1.0).ppf(tail)
    matrix = np.column_stack([rng.permutation(col) for _ in range(3)])
    curve = np.sort(rng.uniform(size=1_000_000))
    points = np.sort(rng.normal(size=5000))
    cumulative = np.cumsum(np.full(5000, 1 / 5000))
    xs = rng.normal(size=200_000)
    return {
        "rearrange": lambda use: _kernels.rearrange(matrix, use_numba=use),
        "level_crossings": lambda use: _kernels.level_crossings(curve, 0.73, use_numba=use),
        "step_cdf": lambda use: _kernels.step_cdf(points, cumulative, xs, use_numba=use),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--cells", type=int, default=20_000)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(7)
    print(f"numba available: {_kernels.numba is not None}; default path numba={_kernels.NUMBA_ENABLED}")
    print(f"{'kernel':<16}{'numpy s':>12}{'numba s':>12}{'speedup':>10}{'first numba call s':>22}")
    for name, run in _cases(args.cells, rng).items():
        t0 = time.perf_counter()
        run(True)
        first = time.perf_counter() - t0
        t_np = _best_of(lambda run=run: run(False), args.repeat)
        t_nb = _best_of(lambda run=run: run(True), args.repeat)
        print(f"{name:<16}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{first:>22.3f}")


if __name__ == "__main__":
    main()

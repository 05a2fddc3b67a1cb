"""Timing of the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--steps N] [--points M]``.
Both backends receive identical inputs and must return identical outputs.
"""
import argparse
import time

import numpy as np

from simplex_spectra import _pykernels

try:
    from simplex_spectra import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def bench_euler(mod, steps, repeat):
    alpha = np.array([2.0, 1.0, 1.0])
    noise = np.random.default_rng(0).standard_normal((steps, 2))

    def run():
        x = np.array([0.3, 0.3])
        out = np.empty((steps, 2))
        clamps = mod.euler_block(alpha, x, 1e-3, noise, out)
        return out, clamps

    return _best(run, repeat)


def bench_gem(mod, points, repeat):
    x = np.ascontiguousarray(np.random.default_rng(1).dirichlet([1.0, 1.0, 1.0, 1.0], points)[:, :3])

    def run():
        a = np.zeros((points, 3, 3))
        ok = np.zeros(points, dtype=np.uint8)
        mod.gem_matrices(x, 1e-10, a, ok)
        return a, ok

    return _best(run, repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the pure backend is available")
    rows = [("euler_block", f"{args.steps} steps", bench_euler, args.steps),
            ("gem_matrices", f"{args.points} points", bench_gem, args.points)]
    print(f"{'kernel':<14}{'size':>16}{'pure [s]':>12}{'compiled [s]':>14}{'speedup':>10}  identical")
    for name, size, fn, arg in rows:
        t_py, r_py = fn(_pykernels, arg, args.repeat)
        if _kernels is None:
            print(f"{name:<14}{size:>16}{t_py:>12.4f}{'-':>14}{'-':>10}  -")
            continue
        t_c, r_c = fn(_kernels, arg, args.repeat)
        same = all(np.array_equal(np.asarray(u), np.asarray(v)) for u, v in zip(r_py, r_c))
        print(f"{name:<14}{size:>16}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x  {same}")


if __name__ == "__main__":
    main()

"""Time the numba and numpy builds of each hot kernel.

    python benchmarks/bench_kernels.py [--repeats 5]

Both builds are imported directly, so the ``ORDALLOC_DISABLE_NUMBA`` flag
does not matter here.  Each timing is the best of ``--repeats`` runs after a
warm-up call that absorbs JIT compilation.
"""
import argparse
import timeit

import numpy as np

from ordalloc import _kernels
from ordalloc._accel import HAVE_NUMBA


def cases():
    tol, run, cap = 1e-14, _kernels.SERIES_RUN, _kernels.SERIES_MAX_TERMS
    u = np.random.default_rng(0).random((1 << 16, 5))
    rng = np.random.default_rng(1)
    vecs = [rng.normal(size=5) for _ in range(1000)]
    return [
        ("series nu=0.05 (~29k terms)", "_series", (0.05, 4.0, 2.0, tol, run, cap)),
        ("series nu=0.5 (~6k terms)", "_series", (0.5, 4.0, 2.0, tol, run, cap)),
        ("series nu=0.5, n=20 j=15", "_series", (0.5, 20.0, 15.0, tol, run, cap)),
        ("block moments 65536 x 5, sorted", "_block_moments", (u, 0.5, True)),
        ("block moments 65536 x 5, unsorted", "_block_moments", (u, 0.5, False)),
        ("1000 simplex projections, n=5", "_project_many", (vecs, 1e-9)),
    ]


def _project_many(build):
    fn = getattr(_kernels, f"_project_simplex_{build}")
    return lambda vecs, floor: [fn(v, floor) for v in vecs]


def resolve(name, build):
    if name == "_project_many":
        return _project_many(build)
    return getattr(_kernels, f"{name}_{build}")


def best_of(fn, args, repeats):
    fn(*args)
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeats, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)
    builds = ["numpy", "numba"] if HAVE_NUMBA else ["numpy"]
    print(f"{'kernel':<36}" + "".join(f"{b:>14}" for b in builds) + ("   numpy/numba" if HAVE_NUMBA else ""))
    for label, name, fargs in cases():
        times = [best_of(resolve(name, b), fargs, args.repeats) for b in builds]
        line = f"{label:<36}" + "".join(f"{t * 1e3:>11.3f} ms" for t in times)
        if HAVE_NUMBA:
            line += f"{times[0] / times[1]:>14.1f}x"
        print(line)


if __name__ == "__main__":
    main()

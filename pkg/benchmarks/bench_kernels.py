"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--modes 4 8 11] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from fermionic_nuclearity import _kernels_py

try:
    from fermionic_nuclearity import _kernels as _compiled
except ImportError:
    _compiled = None


def _cases(d, rng):
    c = np.ascontiguousarray(rng.normal(size=d) + 1j * rng.normal(size=d))
    v = np.ascontiguousarray(rng.normal(size=1 << d) + 1j * rng.normal(size=1 << d))
    x = np.ascontiguousarray(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    t = rng.uniform(0, 1, size=min(d, 12))
    return {
        "creation_matrix": (c,),
        "apply_creation": (c, v),
        "sector_minors": (x,),
        "subset_product_sum": (t,),
    }


def _best(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05 and number < 10**5:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--modes", type=int, nargs="+", default=[4, 8, 11])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; run: python setup.py build_ext --inplace")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'d':>4}{'python [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for d in args.modes:
        for name, fargs in _cases(d, rng).items():
            py = _best(getattr(_kernels_py, name), fargs, args.repeat)
            if _compiled is None:
                print(f"{name:<20}{d:>4}{py:>14.3e}{'-':>14}{'-':>10}")
                continue
            cy = _best(getattr(_compiled, name), fargs, args.repeat)
            print(f"{name:<20}{d:>4}{py:>14.3e}{cy:>14.3e}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()

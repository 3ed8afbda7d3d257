"""Time the numba and numpy backends of the hot kernels against each other.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each case is checked for agreement between the backends before timing. The
numba timings exclude the first (compiling) call.
"""
import argparse
from timeit import repeat

import numpy as np

from ffproj import kernels
from ffproj.models import aklt_spec


def amplitude_case(n_bonds, seed=0):
    """A chain of ``n_bonds`` two-leg bonds over binary legs."""
    rng = np.random.default_rng(seed)
    gamma = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    legs = np.array([[2 * b, 2 * b + 1] for b in range(n_bonds)])
    radices = np.full(2 * n_bonds, 2)
    return gamma, legs, radices


def bench(label, fn, repeat_n):
    best = min(repeat(fn, number=1, repeat=repeat_n))
    print(f"{label:<34s} {best * 1e3:10.3f} ms")
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        print("numba unavailable or disabled (FFPROJ_DISABLE_NUMBA); timing numpy only")

    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    spec = aklt_spec()
    for n in (6, 8, 10):
        ref = kernels.word_products(spec.v, n, "numpy")
        for b in backends:
            assert np.allclose(kernels.word_products(spec.v, n, b), ref)
            bench(f"word_products n={n} [{b}]", lambda: kernels.word_products(spec.v, n, b),
                  args.repeat)
    for n_bonds in (6, 8, 9):
        gamma, legs, radices = amplitude_case(n_bonds)
        ref = kernels.amplitude_tensor(gamma, legs, radices, "numpy")
        for b in backends:
            assert np.allclose(kernels.amplitude_tensor(gamma, legs, radices, b), ref)
            bench(f"amplitude_tensor bonds={n_bonds} [{b}]",
                  lambda: kernels.amplitude_tensor(gamma, legs, radices, b), args.repeat)


if __name__ == "__main__":
    main()

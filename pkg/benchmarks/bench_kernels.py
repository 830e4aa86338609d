"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--m 1500] [--n 400]

Both flavours are called directly, so ``SKETCHBAL_NO_NUMBA`` has no effect
here. Numba timings exclude the first (compiling) call.
"""

import argparse
import timeit

import numpy as np

from sketchbal import kernels
from sketchbal._backend import HAS_NUMBA
from sketchbal.sketch import gen_countsketch, gen_osnap


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases(m, n, s):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((m, n))
    cs = gen_countsketch(s, m, 1)
    os_ = gen_osnap(s, m, 4, 2)
    tall = rng.standard_normal((m, 60))
    Y = rng.standard_normal((n, 60))
    return [
        ("sparse_apply countsketch", kernels._sparse_apply_nb, kernels._sparse_apply_np,
         (cs.rows, cs.vals, s, A)),
        ("sparse_apply osnap b=4", kernels._sparse_apply_nb, kernels._sparse_apply_np,
         (os_.rows, os_.vals, s, A)),
        ("householder_qr pivoted", lambda X: kernels._householder_qr_nb(X.copy(), True, 0.0),
         lambda X: kernels._householder_qr_np(X.copy(), True, 0.0), (tall,)),
        ("jacobi n=60", lambda X: kernels._jacobi_nb(np.ascontiguousarray(X.T), 1e-14, 60),
         lambda X: kernels._jacobi_np(X.copy(), 1e-14, 60), (Y,)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--m", type=int, default=1500)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--s", type=int, default=180)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        print("numba unavailable (or disabled); only numpy timings are shown")
    print(f"{'kernel':28s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, nb, np_, inputs in cases(args.m, args.n, args.s):
        t_np = _best(lambda: np_(*inputs), args.repeat)
        if HAS_NUMBA:
            nb(*inputs)
            t_nb = _best(lambda: nb(*inputs), args.repeat)
            print(f"{name:28s} {1e3 * t_nb:11.2f} {1e3 * t_np:11.2f} {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:28s} {'-':>11s} {1e3 * t_np:11.2f} {'-':>8s}")


if __name__ == "__main__":
    main()

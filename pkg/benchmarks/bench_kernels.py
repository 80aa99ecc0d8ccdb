"""Compare the numba and numpy kernels used by the oracle.

Usage::

    python3 benchmarks/bench_kernels.py [--batch 2000] [--repeat 20]
"""

import argparse
import time

import numpy as np

from equichan import _accel
from equichan.channels import DiagonalParams, ProductParams, UnitaryParams, superoperator
from equichan.choi import choi_generic


def _time(fn, repeat):
    fn()  # warm-up (includes numba compilation on first use)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_kadison(batch, repeat, rng):
    cases = [
        ("U(2)", UnitaryParams(2, 1.0, 0.3)),
        ("DU3 sym", DiagonalParams.du3_symmetric(0.5, 0.3)),
        ("U(5)", UnitaryParams(5, 1.0, 0.3)),
        ("Prod(2,3)", ProductParams(2, 3, 1.0, 0.2, 0.1, 0.05)),
    ]
    for name, p in cases:
        n = p.dim
        S = superoperator(p)
        Xs = rng.normal(size=(batch, n, n)) + 1j * rng.normal(size=(batch, n, n))
        t_np = _time(lambda: _accel.kadison_batch(S, Xs, use_numba=False), repeat)
        t_nb = _time(lambda: _accel.kadison_batch(S, Xs, use_numba=True), repeat)
        print(f"kadison  {name:10s} numpy {t_np * 1e3:8.2f} ms  numba {t_nb * 1e3:8.2f} ms  x{t_np / t_nb:5.2f}")


def bench_product(batch, repeat, rng):
    for n in (2, 3, 4):
        dims = (n, n)
        C = choi_generic(UnitaryParams(n, 1.0, 0.3)).matrix
        V = rng.normal(size=(batch, dims[0])) + 1j * rng.normal(size=(batch, dims[0]))
        W = rng.normal(size=(batch, dims[1])) + 1j * rng.normal(size=(batch, dims[1]))
        t_np = _time(lambda: _accel.product_values(C, V, W, use_numba=False), repeat)
        t_nb = _time(lambda: _accel.product_values(C, V, W, use_numba=True), repeat)
        print(f"product  {str(dims):10s} numpy {t_np * 1e3:8.2f} ms  numba {t_nb * 1e3:8.2f} ms  x{t_np / t_nb:5.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    print(f"batch {args.batch}, mean of {args.repeat} runs")
    bench_kadison(args.batch, args.repeat, rng)
    bench_product(args.batch, args.repeat, rng)


if __name__ == "__main__":
    main()

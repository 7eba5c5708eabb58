"""Time the compiled Jost RK4 sweep against the numpy fallback and check they agree.

    python3 benchmarks/bench_kernels.py --nz 2048 --nx 2401 --repeat 3
"""
import argparse
import time

import numpy as np

from mch_ist import _fallback, kernels


def tables(nx, amp=0.1):
    x = np.linspace(-12.0, 12.0, nx)
    m = amp * np.exp(-x * x)
    mx = -2.0 * x * m
    return x, m, mx, np.sqrt(1.0 + m * m)


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nz", type=int, default=2048)
    ap.add_argument("--nx", type=int, default=2401, help="odd number of samples; steps = (nx-1)/2")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    x, m, mx, q = tables(args.nx)
    step = 2.0 * (x[1] - x[0])
    k = np.linspace(-24.0, 24.0, args.nz)
    z = 0.5 * (k + np.sqrt(k * k + 4.0)) + 0j

    t_np, (ref, _) = best_of(lambda: _fallback.jost_rk4(z, m, mx, q, step), args.repeat)
    print(f"numpy   nz={args.nz} steps={(args.nx - 1) // 2}: {t_np:.3f} s")
    if kernels._compiled is None:
        print("cython  not built")
        return 0
    kernels.set_threads(args.threads)
    t_cy, (out, _) = best_of(lambda: kernels.jost_rk4(z, m, mx, q, step, backend="cython"), args.repeat)
    diff = float(np.max(np.abs(out - ref)))
    print(f"cython  nz={args.nz} steps={(args.nx - 1) // 2} threads={args.threads}: {t_cy:.3f} s")
    print(f"speedup {t_np / t_cy:.2f}x, max |difference| {diff:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

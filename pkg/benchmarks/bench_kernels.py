"""Compare the compiled and pure-Python integer kernels.

    python3 benchmarks/bench_kernels.py [--n 400] [--repeat 5]

Each kernel runs on the same random inputs mod 3^39; results must agree.
"""
import argparse
import random
import time

from linvariant import _pykernels
from linvariant.kernels import BACKEND

try:
    from linvariant import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n, M, rng):
    a = [rng.randrange(M) for _ in range(n)]
    b = [rng.randrange(M) for _ in range(n)]
    a0 = [1 + 3 * rng.randrange(M // 3)] + a[1:]
    rows = [[rng.randrange(M) for _ in range(min(i, 8))] for i in range(n)]
    dinv = [1] * n
    return {
        "conv_mod": (a, b, n, M),
        "series_inverse_mod": (a0, n, M),
        "lower_solve_mod": (rows, dinv, a, M),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    M = 3 ** 39
    rng = random.Random(0)
    print(f"selected backend: {BACKEND}")
    if _ckernels is None:
        print("compiled extension not built; only the Python kernels run")
    print(f"{'kernel':<22}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, argv in cases(args.n, M, rng).items():
        tp, rp = _time(getattr(_pykernels, name), argv, args.repeat)
        if _ckernels is None:
            print(f"{name:<22}{tp:>12.5f}{'-':>12}{'-':>10}")
            continue
        tc, rc = _time(getattr(_ckernels, name), argv, args.repeat)
        if list(rp) != list(rc):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<22}{tp:>12.5f}{tc:>12.5f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()

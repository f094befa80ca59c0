"""Compare the numba kernels with their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is warmed up once (JIT compile or cache load) and then timed
as the best of ``--repeat`` runs.  Also reports the full fig5 sweep under
both backends, each in a fresh interpreter.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from biaowc import _accel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    rng = np.random.default_rng(0)
    ap = np.column_stack([rng.uniform(0, 5, 16), rng.uniform(0, 5, 16), np.full(16, 3.0)])
    up = np.column_stack([rng.uniform(0, 5, 200), rng.uniform(0, 5, 200), np.full(200, 0.85)])
    n = rng.normal(size=(200, 25, 3))
    n[..., 2] = np.abs(n[..., 2])
    n /= np.linalg.norm(n, axis=2, keepdims=True)
    pts = rng.uniform(0, 5, (2000, 2))
    cen = rng.uniform(0, 5, (9, 2))
    modes = _accel.NUMPY_KERNELS["mixed_radix_digits"](5 ** 7, 5, 7)
    groups = np.arange(5 ** 7, dtype=np.int64).reshape(-1, 5)
    return {
        "los_gains (200 users x 25 modes x 16 APs)":
            ("los_gains", (ap, up, n, 0.3, 1e-4, 1.0, 1.0, _accel.GAUSSIAN_BEAM, 0.4e-6, 6.06e-7)),
        "nearest_centre (2000 points, 9 centres)": ("nearest_centre", (pts, cen)),
        "mixed_radix_digits (78125 slots x 7 users)": ("mixed_radix_digits", (5 ** 7, 5, 7)),
        "first_alignment_violation (78125 slots)": ("first_alignment_violation", (modes, groups, 0)),
    }


FIG5 = ("import time; from biaowc.config import ScenarioConfig; from biaowc.harness import run_fig5; "
        "t = time.perf_counter(); run_fig5(ScenarioConfig(drops={drops})); print(time.perf_counter() - t)")


def fig5_seconds(disable, drops):
    env = dict(os.environ, BIAOWC_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", FIG5.format(drops=drops)], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.split()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--fig5-drops", type=int, default=20, help="0 skips the end-to-end comparison")
    args = ap.parse_args(argv)
    if not _accel.HAS_NUMBA:
        print("numba unavailable or disabled; only the numpy path can be timed")
    print(f"{'kernel':46s} {'numpy':>10s} {'numba':>10s} {'speed-up':>9s}")
    for label, (name, kargs) in workloads().items():
        slow = _accel.NUMPY_KERNELS[name]
        fast = getattr(_accel, name)
        t0 = time.perf_counter()
        fast(*kargs)
        warm = time.perf_counter() - t0
        t_np = best_of(lambda: slow(*kargs), args.repeat)
        t_nb = best_of(lambda: fast(*kargs), args.repeat)
        print(f"{label:46s} {t_np * 1e3:8.3f}ms {t_nb * 1e3:8.3f}ms {t_np / t_nb:8.1f}x  (first call {warm:.2f} s)")
    if args.fig5_drops:
        a = fig5_seconds(True, args.fig5_drops)
        b = fig5_seconds(False, args.fig5_drops)
        print(f"{'fig5 sweep, ' + str(args.fig5_drops) + ' drops (fresh process)':46s} {a:9.2f}s {b:9.2f}s {a / b:8.1f}x")


if __name__ == "__main__":
    main()

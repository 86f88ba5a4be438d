"""Time the compiled integration kernels against their pure-Python originals.

Every hot loop in rough_symplectic.kernels is written once as a plain
function and compiled with numba when available; the pure version stays
reachable as the dispatcher's py_func. This script runs both on the same
trajectory workload, checks that they produce bit-identical output, and
reports the median wall time of each together with the speedup.

Run from the repository root:

    python3 benchmarks/benchmark_kernels.py
    python3 benchmarks/benchmark_kernels.py --steps 100000 --repeats 7

With ROUGH_SYMPLECTIC_JIT=0 (or without numba installed) the package
selects the pure implementation everywhere; the script then only times
that build and says so.
"""

import argparse
import time
from statistics import median

import numpy as np

from rough_symplectic.kernels import (
    JIT_ENABLED,
    NUMBA_AVAILABLE,
    linear_euler,
    linear_midpoint_direct,
    linear_rk_fixed_point,
    trig_rk_fixed_point,
)
from rough_symplectic.paths import FbmConfig, sample_fbm
from rough_symplectic.systems import KuboParams, kubo_system
from rough_symplectic.tableaus import builtin_tableau


def time_callable(fn, args, repeats):
    """Median wall time in seconds over `repeats` single calls."""
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return median(times)


def outputs_equal(a, b):
    if isinstance(a, tuple):
        return all(outputs_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def build_workloads(steps):
    mats = kubo_system(KuboParams(epsilon=1.5, dims=3)).linear_form
    kubo_path = sample_fbm(
        FbmConfig(hurst=0.4, dims=3, horizon=1.0, steps=steps, seed=1)
    )
    trig_path = sample_fbm(
        FbmConfig(hurst=0.4, dims=2, horizon=1.0, steps=steps, seed=2)
    )
    kubo_inc = np.diff(kubo_path.values, axis=0)
    trig_inc = np.diff(trig_path.values, axis=0)
    mid = builtin_tableau("midpoint")
    gauss = builtin_tableau("method-1")
    y_kubo = np.array([1.0, 1.0])
    y_trig = np.array([1.0, 2.0])
    return [
        (
            "linear_rk_fixed_point",
            linear_rk_fixed_point,
            (mats, gauss.a, gauss.b, y_kubo, kubo_inc, 1e-12, 100),
        ),
        (
            "trig_rk_fixed_point",
            trig_rk_fixed_point,
            (mid.a, mid.b, y_trig, trig_inc, 1e-12, 100),
        ),
        (
            "linear_midpoint_direct",
            linear_midpoint_direct,
            (mats, y_kubo, kubo_inc),
        ),
        ("linear_euler order=2", linear_euler, (mats, y_kubo, kubo_inc, 2)),
        ("linear_euler order=3", linear_euler, (mats, y_kubo, kubo_inc, 3)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="benchmark compiled kernels against the pure-Python build"
    )
    parser.add_argument(
        "--steps", type=int, default=50_000, help="trajectory length (default 50000)"
    )
    parser.add_argument(
        "--repeats", type=int, default=5, help="timed runs per kernel (default 5)"
    )
    args = parser.parse_args(argv)

    compiled_build = JIT_ENABLED and NUMBA_AVAILABLE
    print(
        f"numba available: {NUMBA_AVAILABLE}; jit enabled: {JIT_ENABLED}; "
        f"steps: {args.steps}; repeats: {args.repeats}"
    )
    if not compiled_build:
        print("pure-numpy build selected, timing the fallback implementation only\n")

    rows = []
    for name, fn, call_args in build_workloads(args.steps):
        fn(*call_args)  # warm-up, includes jit compilation on first call
        t_selected = time_callable(fn, call_args, args.repeats)
        pure = getattr(fn, "py_func", None)
        if pure is None:
            rows.append((name, None, t_selected, None, True))
            continue
        agree = outputs_equal(fn(*call_args), pure(*call_args))
        t_pure = time_callable(pure, call_args, args.repeats)
        rows.append((name, t_selected, t_pure, t_pure / t_selected, agree))

    header = f"{'kernel':<24} {'jit (ms)':>10} {'pure (ms)':>11} {'speedup':>8}  identical"
    print(header)
    print("-" * len(header))
    all_agree = True
    for name, t_jit, t_pure, speedup, agree in rows:
        all_agree &= agree
        jit_s = f"{t_jit * 1e3:10.2f}" if t_jit is not None else f"{'-':>10}"
        spd_s = f"{speedup:8.1f}" if speedup is not None else f"{'-':>8}"
        print(f"{name:<24} {jit_s} {t_pure * 1e3:11.2f} {spd_s}  {agree}")
    if not all_agree:
        raise SystemExit("compiled and pure outputs differ")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
